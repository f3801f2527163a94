//! Gaussian process regression with a zero prior mean.
//!
//! Fitting solves `(K + jitter * I) w = y` by Cholesky factorization.
//! The jitter starts at 1e-8 and escalates by decades up to 1e-2 when the
//! Gram matrix is not positive definite at the current level; if even the
//! largest jitter fails the fit reports an indefinite kernel. Because
//! positive definiteness of `K + jitter * I` is monotone in the jitter, the
//! escalation binary-searches the ladder for the smallest workable level
//! instead of walking every decade.

use serde::{Deserialize, Serialize};

use super::kernel::{gram, kernel_eval, KernelSpec};
use super::linalg::{cholesky, cholesky_solve};
use super::FitError;

/// Jitter decades tried in order of preference (smallest first).
pub const JITTER_LADDER: [f64; 7] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GprModel {
    pub kernel: KernelSpec,
    pub train_x: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// The jitter that actually produced the factorization.
    pub jitter: f64,
}

/// Fits the interpolation weights for `kernel` on `(xs, ys)`.
pub fn gpr_fit(xs: &[Vec<f64>], ys: &[f64], kernel: KernelSpec) -> Result<GprModel, FitError> {
    kernel.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(FitError::BadData(format!(
            "need equal nonzero row counts, got {} features and {} responses",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    let k = gram(&kernel, xs);

    let attempt = |jitter: f64| -> Option<Vec<f64>> {
        let mut a = k.clone();
        for i in 0..n {
            a[i * n + i] += jitter;
        }
        match cholesky(&mut a, n) {
            Ok(()) => Some(a),
            Err(_) => None,
        }
    };

    // Smallest decade first; on failure, confirm the largest decade works at
    // all, then binary-search the monotone success boundary in between.
    let (jitter, factor) = if let Some(l) = attempt(JITTER_LADDER[0]) {
        (JITTER_LADDER[0], l)
    } else {
        let top = JITTER_LADDER.len() - 1;
        let Some(top_factor) = attempt(JITTER_LADDER[top]) else {
            return Err(FitError::IndefiniteKernel {
                kernel: kernel.clone(),
                max_jitter: JITTER_LADDER[top],
            });
        };
        let mut lo = 1;
        let mut hi = top;
        let mut best = (JITTER_LADDER[top], top_factor);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match attempt(JITTER_LADDER[mid]) {
                Some(l) => {
                    best = (JITTER_LADDER[mid], l);
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        best
    };

    let weights = cholesky_solve(&factor, n, ys);
    Ok(GprModel {
        kernel,
        train_x: xs.to_vec(),
        weights,
        jitter,
    })
}

impl GprModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.train_x
            .iter()
            .zip(&self.weights)
            .map(|(xi, w)| w * kernel_eval(&self.kernel, x, xi))
            .sum()
    }
}
