//! Latin hypercube sampling over (sub)spaces.
//!
//! Numeric dimensions are stratified: [0, 1] splits into `n` equal strata,
//! each receiving exactly one sample at an independently shuffled position.
//! Integer dimensions sample in continuous space and round to the nearest
//! in-range integer. Categorical dimensions draw one uniform category per
//! sample. Conditional parameters are dropped afterwards wherever their
//! condition fails, so every returned point is valid for the space.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{DesignSpace, HpPoint, ParamKind, ParamValue, SubDomain, Subspace};
use crate::util::seeded_rng;

const LHS_STREAM: u64 = 0x4c48_53;

/// Draws `n` Latin-hypercube samples from `sub` (a restriction of `space`).
/// Deterministic in `(space, sub, n, seed)`.
pub fn lhs_sample(space: &DesignSpace, sub: &Subspace, n: usize, seed: u64) -> Vec<HpPoint> {
    assert!(n >= 1, "sample count must be at least 1");
    assert_eq!(
        space.len(),
        sub.domains().len(),
        "subspace does not match space"
    );
    let mut rng = seeded_rng(seed, LHS_STREAM);

    // Column-major draw: each dimension consumes a deterministic slice of
    // the stream regardless of how rows are later assembled.
    let mut columns: Vec<Vec<ParamValue>> = Vec::with_capacity(space.len());
    for (spec, dom) in space.params().iter().zip(sub.domains()) {
        let column = match (&spec.kind, dom) {
            (ParamKind::Continuous { .. }, SubDomain::Continuous { lower, upper }) => {
                stratified_unit(n, &mut rng)
                    .into_iter()
                    .map(|u| ParamValue::Real(lower + u * (upper - lower)))
                    .collect()
            }
            (ParamKind::Integer { .. }, SubDomain::Integer { lower, upper }) => {
                stratified_unit(n, &mut rng)
                    .into_iter()
                    .map(|u| {
                        let raw = *lower as f64 + u * (*upper - *lower) as f64;
                        ParamValue::Int((raw.round() as i64).clamp(*lower, *upper))
                    })
                    .collect()
            }
            (ParamKind::Categorical { categories }, SubDomain::Categorical) => (0..n)
                .map(|_| {
                    let idx = rng.gen_range(0..categories.len());
                    ParamValue::Cat(categories[idx].clone())
                })
                .collect(),
            _ => unreachable!("subspace domain kind mismatch"),
        };
        columns.push(column);
    }

    (0..n)
        .map(|row| {
            let mut point = HpPoint::new();
            for (spec, col) in space.params().iter().zip(&columns) {
                point.set(&spec.name, col[row].clone());
            }
            drop_inactive(space, &mut point);
            point
        })
        .collect()
}

/// One uniform draw from `sub`; used to resolve duplicate candidates.
pub fn uniform_sample(
    space: &DesignSpace,
    sub: &Subspace,
    rng: &mut ChaCha8Rng,
) -> HpPoint {
    let mut point = HpPoint::new();
    for (spec, dom) in space.params().iter().zip(sub.domains()) {
        let value = match (&spec.kind, dom) {
            (ParamKind::Continuous { .. }, SubDomain::Continuous { lower, upper }) => {
                ParamValue::Real(lower + rng.gen::<f64>() * (upper - lower))
            }
            (ParamKind::Integer { .. }, SubDomain::Integer { lower, upper }) => {
                ParamValue::Int(rng.gen_range(*lower..=*upper))
            }
            (ParamKind::Categorical { categories }, SubDomain::Categorical) => {
                ParamValue::Cat(categories[rng.gen_range(0..categories.len())].clone())
            }
            _ => unreachable!("subspace domain kind mismatch"),
        };
        point.set(&spec.name, value);
    }
    drop_inactive(space, &mut point);
    point
}

/// Stratified unit samples: one point per stratum `[k/n, (k+1)/n)` in a
/// shuffled stratum order.
fn stratified_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut strata: Vec<usize> = (0..n).collect();
    strata.shuffle(rng);
    strata
        .into_iter()
        .map(|k| (k as f64 + rng.gen::<f64>()) / n as f64)
        .collect()
}

/// Removes conditional values whose condition fails, repeating until stable
/// so chained conditions collapse correctly.
fn drop_inactive(space: &DesignSpace, point: &mut HpPoint) {
    loop {
        let doomed: Vec<String> = space
            .params()
            .iter()
            .filter(|spec| point.get(&spec.name).is_some() && !space.is_active(point, spec))
            .map(|spec| spec.name.clone())
            .collect();
        if doomed.is_empty() {
            return;
        }
        for name in doomed {
            point.remove(&name);
        }
    }
}
