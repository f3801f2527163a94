//! Core engine for mixed-variable, multi-objective hyperparameter
//! optimization of regression learners, together with the structural
//! benchmark problems used to exercise it.
//!
//! The crate is organized around a handful of modules:
//!
//! - [`space`]: mixed continuous/integer/categorical design spaces with
//!   conditional parameters, subspace shrinking, and Latin hypercube
//!   sampling.
//! - [`learners`]: four regression learners implemented from scratch
//!   (Gaussian process, support vector, random forest, neural network)
//!   behind a common fit/predict interface.
//! - [`eval`]: dataset handling and cross-validated scoring on the two
//!   error objectives.
//! - [`smbo`]: the sequential model-based optimizer — surrogate-guided
//!   candidate search with recursive design-space shrinking and a Pareto
//!   archive over both objectives.
//! - [`bench`]: desk-scale structural benchmarks (a planar truss solver and
//!   synthetic response surfaces) that generate the datasets the tuner is
//!   exercised on.

pub mod bench;
pub mod eval;
pub mod learners;
pub mod smbo;
pub mod space;
pub mod util;

pub use learners::{fit, FitError, LearnerKind, ModelArtifact, TrainedModel};
pub use space::{DesignSpace, HpPoint, ParamKind, ParamSpec, ParamValue, SpaceError, Subspace};
