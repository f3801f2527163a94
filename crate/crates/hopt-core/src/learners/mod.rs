//! The four regression learners this engine can tune, plus a common
//! fit/predict dispatch keyed by [`LearnerKind`].
//!
//! Every learner is implemented in this crate: Gaussian process regression
//! ([`gpr`]), support vector regression ([`svr`]), random forest regression
//! ([`rfr`]), and a single-hidden-layer neural network ([`ann`]). They share
//! the [`FitError`] taxonomy so evaluation code can treat "this
//! configuration cannot be trained" uniformly.

pub mod ann;
pub mod gpr;
pub mod kernel;
pub mod linalg;
pub mod rfr;
pub mod svr;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

use crate::space::HpPoint;
use ann::{Activation, AnnModel, AnnParams, OptimizerKind};
use gpr::GprModel;
use kernel::KernelSpec;
use rfr::{RfrModel, RfrParams};
use svr::{SvrModel, SvrParams};

/// Why a training attempt failed. `BadConfig`/`BadData` are caller errors;
/// the other variants are properties of the optimization problem itself and
/// are expected occasionally during hyperparameter search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("kernel matrix is not positive definite for {kernel} even with diagonal inflation {max_jitter:e}")]
    IndefiniteKernel { kernel: KernelSpec, max_jitter: f64 },
    #[error("dual solver stopped after {passes} passes with KKT gap {gap:.3e} above tolerance {tol:.1e}")]
    NonConvergence { tol: f64, passes: usize, gap: f64 },
    #[error("training loss became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("invalid learner configuration: {0}")]
    BadConfig(String),
    #[error("invalid training data: {0}")]
    BadData(String),
}

impl FitError {
    /// True when the failure reflects the numerics of this particular
    /// configuration rather than a malformed call.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FitError::IndefiniteKernel { .. }
                | FitError::NonConvergence { .. }
                | FitError::Divergence { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Gpr,
    Svr,
    Rfr,
    Ann,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] =
        [LearnerKind::Gpr, LearnerKind::Svr, LearnerKind::Rfr, LearnerKind::Ann];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Gpr => "gpr",
            LearnerKind::Svr => "svr",
            LearnerKind::Rfr => "rfr",
            LearnerKind::Ann => "ann",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gpr" => Ok(LearnerKind::Gpr),
            "svr" => Ok(LearnerKind::Svr),
            "rfr" => Ok(LearnerKind::Rfr),
            "ann" => Ok(LearnerKind::Ann),
            other => Err(FitError::BadConfig(format!("unknown learner `{other}`"))),
        }
    }
}

/// A fitted model of any learner kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum TrainedModel {
    Gpr(GprModel),
    Svr(SvrModel),
    Rfr(RfrModel),
    Ann(AnnModel),
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::Gpr(m) => m.predict(x),
            TrainedModel::Svr(m) => m.predict(x),
            TrainedModel::Rfr(m) => m.predict(x),
            TrainedModel::Ann(m) => m.predict(x),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            TrainedModel::Gpr(_) => LearnerKind::Gpr,
            TrainedModel::Svr(_) => LearnerKind::Svr,
            TrainedModel::Rfr(_) => LearnerKind::Rfr,
            TrainedModel::Ann(_) => LearnerKind::Ann,
        }
    }
}

fn config_err(e: crate::space::SpaceError) -> FitError {
    FitError::BadConfig(e.to_string())
}

fn usize_field(point: &HpPoint, name: &str) -> Result<usize, FitError> {
    let v = point.int(name).map_err(config_err)?;
    usize::try_from(v)
        .map_err(|_| FitError::BadConfig(format!("parameter `{name}` must be non-negative, got {v}")))
}

/// Reads a learner configuration the way the tuning spaces in
/// [`crate::space::presets`] spell it.
pub fn params_from_point(kind: LearnerKind, point: &HpPoint) -> Result<LearnerParams, FitError> {
    match kind {
        LearnerKind::Gpr => Ok(LearnerParams::Gpr(KernelSpec::from_point(point)?)),
        LearnerKind::Svr => {
            let c = point.real("c").map_err(config_err)?;
            let epsilon = point.real("epsilon").map_err(config_err)?;
            let kernel = KernelSpec::from_point(point)?;
            Ok(LearnerParams::Svr(SvrParams::new(c, epsilon, kernel)))
        }
        LearnerKind::Rfr => {
            let trees = usize_field(point, "trees")?;
            let nf = usize_field(point, "nf")?;
            let min_ts = usize_field(point, "min_ts")?;
            let max_tn = usize_field(point, "max_tn")?;
            Ok(LearnerParams::Rfr(RfrParams::new(trees, nf, min_ts, Some(max_tn))))
        }
        LearnerKind::Ann => {
            let hidden = usize_field(point, "hidden")?;
            let activation = Activation::from_name(point.cat("activation").map_err(config_err)?)?;
            let opt_name = point.cat("optimizer").map_err(config_err)?;
            let momentum = if opt_name == "sgd" {
                point.real("momentum").map_err(config_err)?
            } else {
                0.0
            };
            let optimizer = OptimizerKind::from_name(opt_name, momentum)?;
            let batch_size = usize_field(point, "batch_size")?;
            let learning_rate = point.real("learning_rate").map_err(config_err)?;
            Ok(LearnerParams::Ann(AnnParams::new(
                hidden,
                activation,
                optimizer,
                batch_size,
                learning_rate,
            )))
        }
    }
}

/// Fully resolved training configuration for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerParams {
    Gpr(KernelSpec),
    Svr(SvrParams),
    Rfr(RfrParams),
    Ann(AnnParams),
}

/// Trains `kind` on `(xs, ys)` with hyperparameters read from `point`.
/// `seed` drives the stochastic learners (forest bootstraps, network
/// initialization and batch order); GPR and SVR ignore it.
pub fn fit(
    kind: LearnerKind,
    xs: &[Vec<f64>],
    ys: &[f64],
    point: &HpPoint,
    seed: u64,
) -> Result<TrainedModel, FitError> {
    match params_from_point(kind, point)? {
        LearnerParams::Gpr(kernel) => gpr::gpr_fit(xs, ys, kernel).map(TrainedModel::Gpr),
        LearnerParams::Svr(params) => svr::svr_fit(xs, ys, params).map(TrainedModel::Svr),
        LearnerParams::Rfr(params) => rfr::rfr_fit(xs, ys, &params, seed).map(TrainedModel::Rfr),
        LearnerParams::Ann(params) => ann::ann_fit(xs, ys, params, seed).map(TrainedModel::Ann),
    }
}

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model encoding: {0}")]
    Encoding(#[from] serde_json::Error),
    #[error("model file written by format version {found}; this build reads version {supported}")]
    Version { found: u32, supported: u32 },
}

/// A trained model plus enough context to reproduce or audit it. The JSON
/// encoding round-trips every f64 exactly, so a reloaded artifact predicts
/// bit-for-bit identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub config: HpPoint,
    pub seed: u64,
    pub model: TrainedModel,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

impl ModelArtifact {
    pub fn new(config: HpPoint, seed: u64, model: TrainedModel) -> Self {
        ModelArtifact { format_version: ARTIFACT_VERSION, config, seed, model }
    }

    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(path, body).map_err(|source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let body = std::fs::read_to_string(path).map_err(|source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let probe: VersionProbe = serde_json::from_str(&body)?;
        if probe.format_version != ARTIFACT_VERSION {
            return Err(ArtifactError::Version {
                found: probe.format_version,
                supported: ARTIFACT_VERSION,
            });
        }
        Ok(serde_json::from_str(&body)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{baseline_initial, space_for};
    use rand::Rng;

    fn toy_data(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = crate::util::seeded_rng(seed, 0);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 0.3 + 0.4 * x[0] + 0.2 * x[1] * x[1])
            .collect();
        (xs, ys)
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in LearnerKind::ALL {
            assert_eq!(kind.name().parse::<LearnerKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{kind}\""));
        }
        assert!("tree".parse::<LearnerKind>().is_err());
    }

    #[test]
    fn fit_accepts_each_default_configuration() {
        let (xs, ys) = toy_data(24, 3, 1);
        for kind in LearnerKind::ALL {
            let point = baseline_initial(kind);
            let model = fit(kind, &xs, &ys, &point, 7)
                .unwrap_or_else(|e| panic!("{kind} failed: {e}"));
            assert_eq!(model.kind(), kind);
            let p = model.predict(&xs[0]);
            assert!(p.is_finite(), "{kind} produced {p}");
        }
    }

    #[test]
    fn fit_accepts_sampled_configurations() {
        // Random draws from each tuning space must always be readable,
        // though some may legitimately fail to train.
        let (xs, ys) = toy_data(20, 3, 2);
        for kind in LearnerKind::ALL {
            let space = space_for(kind);
            let sub = space.full_subspace();
            let points = crate::space::lhs_sample(&space, &sub, 5, 99);
            for point in &points {
                match fit(kind, &xs, &ys, point, 3) {
                    Ok(m) => assert!(m.predict(&xs[1]).is_finite()),
                    Err(e) => assert!(e.is_numerical(), "{kind}: unexpected {e}"),
                }
            }
        }
    }

    #[test]
    fn missing_parameter_is_a_config_error() {
        let (xs, ys) = toy_data(10, 2, 3);
        let mut point = baseline_initial(LearnerKind::Svr);
        point.remove("c");
        match fit(LearnerKind::Svr, &xs, &ys, &point, 0) {
            Err(FitError::BadConfig(msg)) => assert!(msg.contains('c'), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn negative_integer_is_a_config_error() {
        let (xs, ys) = toy_data(10, 2, 4);
        let mut point = baseline_initial(LearnerKind::Rfr);
        point.set("trees", crate::space::ParamValue::Int(-5));
        assert!(matches!(
            fit(LearnerKind::Rfr, &xs, &ys, &point, 0),
            Err(FitError::BadConfig(_))
        ));
    }

    #[test]
    fn artifact_round_trip_preserves_predictions_exactly() {
        let (xs, ys) = toy_data(30, 3, 5);
        let dir = tempfile::tempdir().unwrap();
        for kind in LearnerKind::ALL {
            let point = baseline_initial(kind);
            let model = fit(kind, &xs, &ys, &point, 11).unwrap();
            let before: Vec<f64> = xs.iter().map(|x| model.predict(x)).collect();
            let path = dir.path().join(format!("{kind}.model.json"));
            ModelArtifact::new(point, 11, model).save(&path).unwrap();
            let loaded = ModelArtifact::load(&path).unwrap();
            assert_eq!(loaded.format_version, ARTIFACT_VERSION);
            assert_eq!(loaded.seed, 11);
            for (x, want) in xs.iter().zip(&before) {
                let got = loaded.model.predict(x);
                assert_eq!(got.to_bits(), want.to_bits(), "{kind} drifted on reload");
            }
        }
    }

    #[test]
    fn artifact_from_a_newer_format_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("future.model.json");
        std::fs::write(&path, "{\"format_version\": 999}").unwrap();
        match ModelArtifact::load(&path) {
            Err(ArtifactError::Version { found, supported }) => {
                assert_eq!(found, 999);
                assert_eq!(supported, ARTIFACT_VERSION);
            }
            other => panic!("expected version refusal, got {other:?}"),
        }
    }
}
