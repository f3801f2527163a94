//! Desk-scale benchmark problems: a planar truss solver that generates
//! regression datasets, synthetic function families with known ground
//! truth, crash-curve metrics, and the dataset file format.

pub mod curve;
pub mod io;
pub mod synthetic;
pub mod truss;

pub use curve::{compute_cfe, compute_sea, curve_from_csv, curve_to_csv, ForceDeflectionCurve};
pub use io::{dataset_to_csv, read_dataset, sidecar_path, write_dataset};
pub use synthetic::{synthetic_dataset, ComplexityTags, SyntheticFamily};
pub use truss::{
    equilibrium_residual, generate_tbpt_dataset, solve_truss, tbpt_space, NodeLoad,
    TrussGeometry, TrussSolution, AREA_MAX_M2, AREA_MIN_M2, DEFLECTION_CAP_M,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad truss geometry: {0}")]
    Geometry(String),
    #[error("unstable structure: stiffness is singular at node {node}, {axis} direction")]
    Unstable { node: usize, axis: &'static str },
    #[error("bad force-deflection curve: {0}")]
    Curve(String),
    #[error("unknown synthetic family `{0}`; expected smooth, mixed, or discontinuous")]
    UnknownFamily(String),
    #[error("bad dataset request: {0}")]
    Request(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}
