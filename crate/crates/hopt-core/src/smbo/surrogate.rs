//! The optimizer's internal response model: one bagged forest per
//! objective, fitted on surrogate-encoded configurations against mean
//! cross-validation losses. The spread of per-tree predictions doubles as
//! the uncertainty estimate that the lower confidence bound trades against
//! the mean.

use serde::{Deserialize, Serialize};

use crate::learners::rfr::{rfr_fit, RfrModel, RfrParams};
use crate::learners::FitError;
use crate::space::{DesignSpace, HpPoint};

/// Fixed internal settings for the surrogate forests. These are not tuned:
/// the surrogate has to be cheap and hands-off.
pub const SURROGATE_TREES: usize = 200;
pub const SURROGATE_MIN_TS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogatePrediction {
    /// Mean per-tree prediction, per objective: (RMSE, MXAE).
    pub mu: (f64, f64),
    /// Population spread of per-tree predictions, per objective.
    pub sigma: (f64, f64),
}

/// Lower confidence bound per objective: mu - phi * sigma.
pub fn lcb(pred: &SurrogatePrediction, phi: f64) -> (f64, f64) {
    (pred.mu.0 - phi * pred.sigma.0, pred.mu.1 - phi * pred.sigma.1)
}

/// Anything that can score a configuration with two means and spreads;
/// lets search code run against analytic stand-ins in tests.
pub trait LossModel: Sync {
    fn predict_point(&self, space: &DesignSpace, point: &HpPoint) -> SurrogatePrediction;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Surrogate {
    rmse_forest: RfrModel,
    mxae_forest: RfrModel,
}

impl Surrogate {
    /// Fits the two forests on `(points, losses)` pairs. `losses` are
    /// `(mean_rmse, mean_mxae)` per point. Feature count per split is
    /// ceil(D / 3) for a D-parameter space.
    pub fn fit(
        space: &DesignSpace,
        points: &[HpPoint],
        losses: &[(f64, f64)],
        seed: u64,
    ) -> Result<Self, FitError> {
        if points.len() < 2 || points.len() != losses.len() {
            return Err(FitError::BadData(format!(
                "surrogate needs at least 2 matching point/loss pairs, got {} and {}",
                points.len(),
                losses.len()
            )));
        }
        let xs: Vec<Vec<f64>> = points.iter().map(|p| space.encode_for_surrogate(p)).collect();
        let nf = space.len().div_ceil(3);
        let params = RfrParams::new(SURROGATE_TREES, nf, SURROGATE_MIN_TS, None);
        let ys_rmse: Vec<f64> = losses.iter().map(|l| l.0).collect();
        let ys_mxae: Vec<f64> = losses.iter().map(|l| l.1).collect();
        // Distant base seeds keep the two forests' per-tree streams apart.
        let rmse_forest = rfr_fit(&xs, &ys_rmse, &params, seed)?;
        let mxae_forest = rfr_fit(&xs, &ys_mxae, &params, seed.wrapping_add(1 << 32))?;
        Ok(Surrogate { rmse_forest, mxae_forest })
    }

    pub fn predict_encoded(&self, encoded: &[f64]) -> SurrogatePrediction {
        let (mu_r, sd_r) = self.rmse_forest.predict_with_spread(encoded);
        let (mu_m, sd_m) = self.mxae_forest.predict_with_spread(encoded);
        SurrogatePrediction { mu: (mu_r, mu_m), sigma: (sd_r, sd_m) }
    }

    /// Per-tree predictions for the RMSE forest; exposed so independent
    /// traversal checks can recompute the mean.
    pub fn rmse_tree_predictions(&self, encoded: &[f64]) -> Vec<f64> {
        self.rmse_forest.tree_predictions(encoded)
    }
}

impl LossModel for Surrogate {
    fn predict_point(&self, space: &DesignSpace, point: &HpPoint) -> SurrogatePrediction {
        self.predict_encoded(&space.encode_for_surrogate(point))
    }
}
