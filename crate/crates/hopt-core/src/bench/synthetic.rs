//! Synthetic regression benchmarks with known ground truth.
//!
//! Three families cover the axes real structural datasets differ on:
//! input dimensionality, variable-type mixture, and response continuity.
//! The generating function of each family is exposed so tests can compare
//! any model against the truth rather than against held-out samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::eval::Dataset;
use crate::space::Normalizer;
use crate::util::{mix_seed, seeded_rng};

const ROW_TAG: u64 = 0xB1;
const SYNTH_STREAM: u64 = 0x53_594e;

/// Complexity descriptors attached to a generated dataset so experiment
/// reports can group results by problem character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityTags {
    pub n_vars: usize,
    pub mixed_types: bool,
    pub continuous_domain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticFamily {
    /// Smooth trigonometric-polynomial response over three reals.
    Smooth,
    /// Two reals, one integer count, one categorical level; the response
    /// mixes all four.
    Mixed,
    /// Two reals with a step of at least 0.6 across the `x1 = 0.5` plane.
    Discontinuous,
}

impl SyntheticFamily {
    pub const ALL: [SyntheticFamily; 3] = [
        SyntheticFamily::Smooth,
        SyntheticFamily::Mixed,
        SyntheticFamily::Discontinuous,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticFamily::Smooth => "smooth",
            SyntheticFamily::Mixed => "mixed",
            SyntheticFamily::Discontinuous => "discontinuous",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SyntheticFamily::Smooth => 3,
            SyntheticFamily::Mixed => 4,
            SyntheticFamily::Discontinuous => 2,
        }
    }

    pub fn tags(&self) -> ComplexityTags {
        ComplexityTags {
            n_vars: self.dimension(),
            mixed_types: matches!(self, SyntheticFamily::Mixed),
            continuous_domain: !matches!(self, SyntheticFamily::Discontinuous),
        }
    }

    /// Raw input bounds per variable, before normalization.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SyntheticFamily::Smooth => (vec![0.0; 3], vec![1.0; 3]),
            // x0, x1 real in [0,1]; x2 integer count 1..=5; x3 level 0..=2.
            SyntheticFamily::Mixed => (vec![0.0, 0.0, 1.0, 0.0], vec![1.0, 1.0, 5.0, 2.0]),
            SyntheticFamily::Discontinuous => (vec![0.0; 2], vec![1.0; 2]),
        }
    }

    /// Noise-free generating function on raw (unnormalized) inputs.
    pub fn truth(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension(), "wrong input arity");
        match self {
            SyntheticFamily::Smooth => {
                (std::f64::consts::TAU * x[0]).sin() * (std::f64::consts::PI * x[1]).cos()
                    + x[2] * x[2]
            }
            SyntheticFamily::Mixed => {
                let level_shift = match x[3] as i64 {
                    0 => 0.0,
                    1 => 0.35,
                    _ => -0.2,
                };
                x[0] + 0.5 * (3.0 * x[1]).sin() + 0.15 * x[2] + level_shift
            }
            SyntheticFamily::Discontinuous => {
                if x[0] < 0.5 {
                    0.2 * x[1]
                } else {
                    0.8 + 0.2 * x[1]
                }
            }
        }
    }
}

impl std::str::FromStr for SyntheticFamily {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smooth" => Ok(SyntheticFamily::Smooth),
            "mixed" => Ok(SyntheticFamily::Mixed),
            "discontinuous" => Ok(SyntheticFamily::Discontinuous),
            other => Err(BenchError::UnknownFamily(other.to_string())),
        }
    }
}

fn draw_row(family: SyntheticFamily, rng: &mut impl rand::Rng) -> Vec<f64> {
    match family {
        SyntheticFamily::Smooth => (0..3).map(|_| rng.gen::<f64>()).collect(),
        SyntheticFamily::Mixed => vec![
            rng.gen::<f64>(),
            rng.gen::<f64>(),
            rng.gen_range(1..=5) as f64,
            rng.gen_range(0..=2) as f64,
        ],
        SyntheticFamily::Discontinuous => (0..2).map(|_| rng.gen::<f64>()).collect(),
    }
}

/// Generates `n` rows of the chosen family with Gaussian response noise of
/// standard deviation `noise_sd` (raw units). Inputs are normalized by the
/// family's domain bounds, the response by its sampled range. Rows draw
/// from per-row seeds, so the result is independent of evaluation order.
pub fn synthetic_dataset(
    family: SyntheticFamily,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset, BenchError> {
    if n < 2 {
        return Err(BenchError::Request(format!(
            "at least 2 rows are needed to normalize a dataset, got {n}"
        )));
    }
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(BenchError::Request(format!(
            "noise standard deviation must be finite and non-negative, got {noise_sd}"
        )));
    }
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(mix_seed(seed, ROW_TAG, i as u64), SYNTH_STREAM);
            let x = draw_row(family, &mut rng);
            let mut y = family.truth(&x);
            if noise_sd > 0.0 {
                use rand_distr::Distribution;
                let normal = rand_distr::Normal::new(0.0, noise_sd)
                    .expect("validated: noise_sd is finite and non-negative");
                y += normal.sample(&mut rng);
            }
            (x, y)
        })
        .collect();

    let (mins, maxs) = family.bounds();
    let x_scaler =
        Normalizer::from_bounds(mins, maxs).map_err(|e| BenchError::Request(e.to_string()))?;
    let y_rows: Vec<Vec<f64>> = rows.iter().map(|(_, y)| vec![*y]).collect();
    let y_scaler = Normalizer::fit(&y_rows).map_err(|e| {
        BenchError::Request(format!("response range collapsed, add rows or noise: {e}"))
    })?;

    Ok(Dataset {
        name: format!("synthetic-{}", family.name()),
        feature_names: (0..family.dimension()).map(|j| format!("x{j}")).collect(),
        response_name: "y".into(),
        xs: rows.iter().map(|(x, _)| x_scaler.transform_row(x)).collect(),
        ys: rows.iter().map(|(_, y)| y_scaler.normalize_col(0, *y)).collect(),
        x_scaler,
        y_scaler,
        feasible: vec![true; n],
        seed,
    })
}
