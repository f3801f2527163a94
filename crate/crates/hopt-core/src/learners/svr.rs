//! Epsilon-insensitive support vector regression.
//!
//! The dual is solved by pairwise coordinate ascent (SMO): each pass picks
//! the maximally violating pair among the 2n box variables (alpha, alpha*),
//! takes the analytic step along the equality constraint, and updates the
//! cached gradient. Termination is a KKT gap below `kkt_tol`; running out
//! of passes is a non-convergence error, which evaluation treats as a fit
//! failure.

use serde::{Deserialize, Serialize};

use super::kernel::{gram, kernel_eval, KernelSpec};
use super::FitError;

pub const DEFAULT_KKT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
    pub kkt_tol: f64,
    pub max_passes: usize,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, kernel: KernelSpec) -> Self {
        SvrParams {
            c,
            epsilon,
            kernel,
            kkt_tol: DEFAULT_KKT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }

    fn validate(&self) -> Result<(), FitError> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(FitError::BadConfig(format!(
                "regularization constant must be positive, got {}",
                self.c
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(FitError::BadConfig(format!(
                "tube width must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.kkt_tol <= 0.0 {
            return Err(FitError::BadConfig("KKT tolerance must be positive".into()));
        }
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: KernelSpec,
    pub train_x: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub epsilon: f64,
    /// Pairwise update passes consumed before the KKT gap closed.
    pub passes: usize,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for i in 0..self.train_x.len() {
            let beta = self.alpha[i] - self.alpha_star[i];
            if beta != 0.0 {
                acc += beta * kernel_eval(&self.kernel, x, &self.train_x[i]);
            }
        }
        acc
    }
}

/// Solver state over the 2n box variables. Index p < n addresses alpha_p
/// (constraint sign +1); p >= n addresses alpha*_{p-n} (sign -1).
struct Smo<'a> {
    n: usize,
    k: &'a [f64],
    theta: Vec<f64>,
    /// f[i] = (K beta)_i - y_i, kept incrementally.
    f: Vec<f64>,
    c: f64,
    epsilon: f64,
}

impl Smo<'_> {
    fn sign(&self, p: usize) -> f64 {
        if p < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn violation_value(&self, p: usize) -> f64 {
        let base = p % self.n;
        if p < self.n {
            -self.f[base] - self.epsilon
        } else {
            -self.f[base] + self.epsilon
        }
    }

    fn in_up(&self, p: usize) -> bool {
        if p < self.n {
            self.theta[p] < self.c
        } else {
            self.theta[p] > 0.0
        }
    }

    fn in_low(&self, p: usize) -> bool {
        if p < self.n {
            self.theta[p] > 0.0
        } else {
            self.theta[p] < self.c
        }
    }

    /// Maximal violating pair: (argmax up, argmin low, gap). Lowest index
    /// wins ties so runs are reproducible.
    fn select(&self) -> Option<(usize, usize, f64)> {
        let mut best_up: Option<(usize, f64)> = None;
        let mut best_low: Option<(usize, f64)> = None;
        for p in 0..2 * self.n {
            let v = self.violation_value(p);
            if self.in_up(p) && best_up.map(|(_, bv)| v > bv).unwrap_or(true) {
                best_up = Some((p, v));
            }
            if self.in_low(p) && best_low.map(|(_, bv)| v < bv).unwrap_or(true) {
                best_low = Some((p, v));
            }
        }
        match (best_up, best_low) {
            (Some((i, vi)), Some((j, vj))) => Some((i, j, vi - vj)),
            _ => None,
        }
    }

    /// One analytic pair step; updates theta and the cached gradient.
    fn step(&mut self, i: usize, j: usize, gap: f64) {
        let (bi, bj) = (i % self.n, j % self.n);
        let mut h =
            self.k[bi * self.n + bi] + self.k[bj * self.n + bj] - 2.0 * self.k[bi * self.n + bj];
        if h <= 1e-12 {
            // Indefinite or degenerate curvature: take the largest box step.
            h = 1e-12;
        }
        let cap_i = if self.sign(i) > 0.0 {
            self.c - self.theta[i]
        } else {
            self.theta[i]
        };
        let cap_j = if self.sign(j) > 0.0 {
            self.theta[j]
        } else {
            self.c - self.theta[j]
        };
        let t = (gap / h).min(cap_i).min(cap_j);

        if t == cap_i {
            self.theta[i] = if self.sign(i) > 0.0 { self.c } else { 0.0 };
        } else {
            self.theta[i] += self.sign(i) * t;
        }
        if t == cap_j {
            self.theta[j] = if self.sign(j) > 0.0 { 0.0 } else { self.c };
        } else {
            self.theta[j] -= self.sign(j) * t;
        }

        // beta_bi grows by t, beta_bj shrinks by t.
        for r in 0..self.n {
            self.f[r] += t * (self.k[r * self.n + bi] - self.k[r * self.n + bj]);
        }
    }
}

/// Fits the dual coefficients of an epsilon-tube regressor.
pub fn svr_fit(xs: &[Vec<f64>], ys: &[f64], params: SvrParams) -> Result<SvrModel, FitError> {
    params.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(FitError::BadData(format!(
            "need equal nonzero row counts, got {} features and {} responses",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    let k = gram(&params.kernel, xs);
    let mut smo = Smo {
        n,
        k: &k,
        theta: vec![0.0; 2 * n],
        f: ys.iter().map(|y| -y).collect(),
        c: params.c,
        epsilon: params.epsilon,
    };

    let mut passes = 0usize;
    let bias;
    loop {
        let Some((i, j, gap)) = smo.select() else {
            // Every variable pinned on the same side; any bias is feasible.
            bias = 0.0;
            break;
        };
        if gap <= params.kkt_tol {
            let m = smo.violation_value(i);
            let mm = smo.violation_value(j);
            bias = 0.5 * (m + mm);
            break;
        }
        if passes >= params.max_passes {
            return Err(FitError::NonConvergence {
                tol: params.kkt_tol,
                passes,
                gap,
            });
        }
        smo.step(i, j, gap);
        passes += 1;
    }

    let mut alpha = smo.theta[..n].to_vec();
    let mut alpha_star = smo.theta[n..].to_vec();
    // Canonical complementary form: only the net coefficient matters for
    // prediction, so shift each pair down by its overlap.
    for i in 0..n {
        let overlap = alpha[i].min(alpha_star[i]);
        if overlap > 0.0 {
            alpha[i] -= overlap;
            alpha_star[i] -= overlap;
        }
    }

    Ok(SvrModel {
        kernel: params.kernel,
        train_x: xs.to_vec(),
        alpha,
        alpha_star,
        bias,
        c: params.c,
        epsilon: params.epsilon,
        passes,
    })
}
