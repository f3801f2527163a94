//! Command-line error taxonomy. Every failure is classified by whose
//! fault it is, and the class fixes the process exit code:
//!
//! * 2 `Config`: bad flags, bad config file, inconsistent request.
//! * 3 `Data`: input files that exist but cannot be used.
//! * 4 `Runtime`: the computation or the machine failed mid-flight.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn config(err: impl std::fmt::Display) -> Self {
        CliError::Config(err.to_string())
    }

    pub fn data(err: impl std::fmt::Display) -> Self {
        CliError::Data(err.to_string())
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Classifies dataset-generation and file-format failures: unknown names
/// and degenerate requests are the caller's flags (2), broken files are
/// data (3), and anything touching the disk or the solver is runtime (4).
pub fn from_bench(err: hopt_core::bench::BenchError) -> CliError {
    use hopt_core::bench::BenchError;
    match err {
        BenchError::UnknownFamily(_) | BenchError::Request(_) => CliError::config(err),
        BenchError::Geometry(_) | BenchError::Curve(_) | BenchError::Parse { .. } => {
            CliError::data(err)
        }
        BenchError::Io { .. } | BenchError::Unstable { .. } => CliError::runtime(err),
    }
}

pub fn from_smbo(err: hopt_core::smbo::SmboError) -> CliError {
    use hopt_core::smbo::SmboError;
    match err {
        SmboError::Config(_) => CliError::config(err),
        SmboError::Eval(_) | SmboError::Surrogate(_) => CliError::runtime(err),
    }
}
