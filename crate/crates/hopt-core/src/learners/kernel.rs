//! Kernel functions shared by the kernel-based learners.
//!
//! Four kinds, each carrying exactly its meaningful shape parameters:
//!
//! * `rbfdot`      k(x, x') = exp(-sigma * ||x - x'||^2)
//! * `polydot`     k(x, x') = (scale * <x, x'> + offset)^degree
//! * `tanhdot`     k(x, x') = tanh(scale * <x, x'> + offset)
//! * `laplacedot`  k(x, x') = exp(-sigma * ||x - x'||)
//!
//! `tanhdot` is not positive semi-definite in general; consumers must be
//! prepared for indefinite Gram matrices.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::FitError;
use crate::space::HpPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Rbfdot { sigma: f64 },
    Polydot { degree: u32, scale: f64, offset: f64 },
    Tanhdot { scale: f64, offset: f64 },
    Laplacedot { sigma: f64 },
}

impl KernelSpec {
    /// Reads a kernel from a hyperparameter point holding `kernel` plus the
    /// shape parameters active for that kind.
    pub fn from_point(point: &HpPoint) -> Result<Self, FitError> {
        let kind = point
            .cat("kernel")
            .map_err(|e| FitError::BadConfig(e.to_string()))?;
        let real = |name: &str| {
            point
                .real(name)
                .map_err(|e| FitError::BadConfig(e.to_string()))
        };
        let spec = match kind {
            "rbfdot" => KernelSpec::Rbfdot { sigma: real("sigma")? },
            "laplacedot" => KernelSpec::Laplacedot { sigma: real("sigma")? },
            "tanhdot" => KernelSpec::Tanhdot {
                scale: real("scale")?,
                offset: real("offset")?,
            },
            "polydot" => {
                let degree = point
                    .int("degree")
                    .map_err(|e| FitError::BadConfig(e.to_string()))?;
                if degree < 1 {
                    return Err(FitError::BadConfig(format!(
                        "polynomial degree must be at least 1, got {degree}"
                    )));
                }
                KernelSpec::Polydot {
                    degree: degree as u32,
                    scale: real("scale")?,
                    offset: real("offset")?,
                }
            }
            other => {
                return Err(FitError::BadConfig(format!("unknown kernel kind `{other}`")))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let finite = match self {
            KernelSpec::Rbfdot { sigma } | KernelSpec::Laplacedot { sigma } => {
                sigma.is_finite() && *sigma >= 0.0
            }
            KernelSpec::Polydot { degree, scale, offset } => {
                *degree >= 1 && scale.is_finite() && offset.is_finite()
            }
            KernelSpec::Tanhdot { scale, offset } => scale.is_finite() && offset.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(FitError::BadConfig(format!("invalid kernel shape: {self}")))
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rbfdot { sigma } => write!(f, "rbfdot(sigma={sigma})"),
            KernelSpec::Polydot { degree, scale, offset } => {
                write!(f, "polydot(degree={degree}, scale={scale}, offset={offset})")
            }
            KernelSpec::Tanhdot { scale, offset } => {
                write!(f, "tanhdot(scale={scale}, offset={offset})")
            }
            KernelSpec::Laplacedot { sigma } => write!(f, "laplacedot(sigma={sigma})"),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Evaluates the kernel at a pair of equal-length feature vectors.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "kernel inputs must have equal length");
    match spec {
        KernelSpec::Rbfdot { sigma } => (-sigma * sq_dist(a, b)).exp(),
        KernelSpec::Polydot { degree, scale, offset } => {
            (scale * dot(a, b) + offset).powi(*degree as i32)
        }
        KernelSpec::Tanhdot { scale, offset } => (scale * dot(a, b) + offset).tanh(),
        KernelSpec::Laplacedot { sigma } => (-sigma * sq_dist(a, b).sqrt()).exp(),
    }
}

/// Dense Gram matrix (row-major) of the kernel over a point set.
pub fn gram(spec: &KernelSpec, xs: &[Vec<f64>]) -> Vec<f64> {
    let n = xs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel_eval(spec, &xs[i], &xs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}
