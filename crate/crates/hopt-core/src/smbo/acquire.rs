//! Optimum acquisition: where the next configuration to evaluate comes
//! from.
//!
//! Each acquisition runs several independent restarts. A restart scores a
//! Latin hypercube batch of candidates inside its current window by a
//! weighted scalarization of the two lower confidence bounds, then shrinks
//! the window around the batch winner and repeats. Restart weight pairs
//! differ, spreading the restarts across the loss trade-off. The restart
//! winners are reduced to their mutually non-dominated set and one is
//! returned, with archived duplicates resolved by fresh sampling.

use rayon::prelude::*;

use super::surrogate::{lcb, LossModel};
use super::SmboConfig;
use crate::smbo::pareto::pareto_front;
use crate::space::{lhs_sample, uniform_sample, DesignSpace, HpPoint, Subspace};
use crate::util::{mix_seed, seeded_rng};

const RESTART_TAG: u64 = 0xA1;
const DUP_TAG: u64 = 0xA2;
const ACQ_STREAM: u64 = 0x4143_5155;
/// Bound on the uniform fallback when every suggestion collides with the
/// archive (only reachable when a small discrete space is near-exhausted).
const UNIFORM_ATTEMPTS: usize = 10_000;

/// One restart's search path: its scalarization weights, the window after
/// every shrink (index 0 is the full space), and its final winner.
#[derive(Debug, Clone)]
pub struct RestartTrace {
    pub weights: (f64, f64),
    pub windows: Vec<Subspace>,
    pub winner: HpPoint,
    pub winner_lcb: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct AcquireOutcome {
    /// The configuration to evaluate next; valid in the full space and not
    /// yet archived (unless the space itself is exhausted).
    pub point: HpPoint,
    /// Index of the restart whose winner was chosen.
    pub winning_restart: usize,
    /// How many duplicate-resolution draws were needed; 0 normally.
    pub duplicate_resamples: usize,
    pub restarts: Vec<RestartTrace>,
}

/// Augmented Chebyshev scalarization of a weighted LCB pair: the max term
/// drives the search toward one trade-off, the small sum term breaks the
/// ties along weakly dominated plateaus.
fn scalarize(lcb_pair: (f64, f64), weights: (f64, f64)) -> f64 {
    let a = weights.0 * lcb_pair.0;
    let b = weights.1 * lcb_pair.1;
    a.max(b) + 0.05 * (a + b)
}

fn run_restart<M: LossModel>(
    model: &M,
    space: &DesignSpace,
    cfg: &SmboConfig,
    phi: f64,
    restart_seed: u64,
) -> RestartTrace {
    use rand::Rng;
    let mut rng = seeded_rng(restart_seed, ACQ_STREAM);
    let u: f64 = rng.gen();
    let weights = (u, 1.0 - u);

    let mut window = space.full_subspace();
    let mut windows = vec![window.clone()];
    let mut winner: Option<(HpPoint, (f64, f64))> = None;

    for _ in 0..cfg.n_ii {
        let batch_seed: u64 = rng.gen();
        let candidates = lhs_sample(space, &window, cfg.candidates_per_iter, batch_seed);
        let scored: Vec<(f64, (f64, f64))> = candidates
            .par_iter()
            .map(|c| {
                let pair = lcb(&model.predict_point(space, c), phi);
                (scalarize(pair, weights), pair)
            })
            .collect();
        let mut best = 0;
        for i in 1..scored.len() {
            if scored[i].0.total_cmp(&scored[best].0).is_lt() {
                best = i;
            }
        }
        winner = Some((candidates[best].clone(), scored[best].1));
        window = window.shrink(space, &candidates[best], cfg.r_p);
        windows.push(window.clone());
    }

    let (winner, winner_lcb) = winner.expect("n_ii >= 1 guarantees a winner");
    RestartTrace { weights, windows, winner, winner_lcb }
}

/// Index of the restart to adopt: non-dominated under the LCB pair, then
/// lexicographic (LCB_RMSE, LCB_MXAE, restart index).
pub(crate) fn pick_winner(winner_lcbs: &[(f64, f64)]) -> usize {
    let front = pareto_front(winner_lcbs);
    front
        .into_iter()
        .min_by(|&a, &b| {
            winner_lcbs[a]
                .0
                .total_cmp(&winner_lcbs[b].0)
                .then(winner_lcbs[a].1.total_cmp(&winner_lcbs[b].1))
                .then(a.cmp(&b))
        })
        .expect("front of a non-empty set is non-empty")
}

/// Proposes the next configuration to evaluate.
///
/// `is_archived` reports whether a configuration was already evaluated;
/// collisions are resolved by re-sampling in the winning restart's final
/// window (10 tries) and then uniformly in the full space.
pub fn acquire_optimum<M: LossModel>(
    model: &M,
    space: &DesignSpace,
    cfg: &SmboConfig,
    phi: f64,
    seed: u64,
    is_archived: impl Fn(&HpPoint) -> bool,
) -> AcquireOutcome {
    let restarts: Vec<RestartTrace> = (0..cfg.n_re)
        .into_par_iter()
        .map(|r| {
            run_restart(
                model,
                space,
                cfg,
                phi,
                mix_seed(seed, RESTART_TAG, r as u64),
            )
        })
        .collect();

    let lcbs: Vec<(f64, f64)> = restarts.iter().map(|r| r.winner_lcb).collect();
    let winning_restart = pick_winner(&lcbs);
    let chosen = &restarts[winning_restart];
    debug_assert!(space.validate_point(&chosen.winner).is_ok());

    let mut point = chosen.winner.clone();
    let mut duplicate_resamples = 0;
    if is_archived(&point) {
        let final_window = chosen.windows.last().expect("windows never empty");
        for attempt in 0..10 {
            duplicate_resamples += 1;
            let candidate =
                lhs_sample(space, final_window, 1, mix_seed(seed, DUP_TAG, attempt)).remove(0);
            if !is_archived(&candidate) {
                return AcquireOutcome { point: candidate, winning_restart, duplicate_resamples, restarts };
            }
        }
        let full = space.full_subspace();
        let mut rng = seeded_rng(mix_seed(seed, DUP_TAG, 10), ACQ_STREAM);
        for _ in 0..UNIFORM_ATTEMPTS {
            duplicate_resamples += 1;
            point = uniform_sample(space, &full, &mut rng);
            if !is_archived(&point) {
                break;
            }
        }
        // If the loop exhausted its budget the space is effectively
        // fully evaluated; returning a repeat is the least bad option.
    }
    AcquireOutcome { point, winning_restart, duplicate_resamples, restarts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smbo::surrogate::{Surrogate, SurrogatePrediction};
    use crate::space::{space_for, ParamSpec};
    use crate::LearnerKind;

    fn test_cfg() -> SmboConfig {
        SmboConfig { seed: 5, ..SmboConfig::default() }
    }

    /// Deterministic bowl with its minimum at x = 0.3, no uncertainty.
    struct Bowl;
    impl LossModel for Bowl {
        fn predict_point(&self, _space: &DesignSpace, point: &HpPoint) -> SurrogatePrediction {
            let x = point.real("x").unwrap();
            let v = (x - 0.3) * (x - 0.3);
            SurrogatePrediction { mu: (v, v), sigma: (0.0, 0.0) }
        }
    }

    fn line_space() -> DesignSpace {
        DesignSpace::new(vec![ParamSpec::continuous("x", 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn windows_contract_onto_an_analytic_minimum() {
        let space = line_space();
        let cfg = test_cfg();
        let out = acquire_optimum(&Bowl, &space, &cfg, 1.0, 42, |_| false);
        assert_eq!(out.restarts.len(), cfg.n_re);
        for restart in &out.restarts {
            assert_eq!(restart.windows.len(), cfg.n_ii + 1);
            // Full space first, every later window nested in its parent.
            assert_eq!(restart.windows[0], space.full_subspace());
            for pair in restart.windows.windows(2) {
                assert!(pair[0].contains(&pair[1]), "chain must nest");
            }
            // Ends within the geometrically contracted width of the start.
            let limit = (2.0 * cfg.r_p).powi(cfg.n_ii as i32);
            match restart.windows.last().unwrap().domains()[0] {
                crate::space::SubDomain::Continuous { lower, upper } => {
                    assert!(upper - lower <= limit + 1e-12);
                }
                _ => panic!("continuous space"),
            }
        }
        let x = out.point.real("x").unwrap();
        assert!((x - 0.3).abs() < 5e-3, "acquired {x}, expected near 0.3");
        assert!(space.validate_point(&out.point).is_ok());
        assert_eq!(out.duplicate_resamples, 0);
    }

    #[test]
    fn winner_choice_discards_dominated_restarts() {
        // Third winner is dominated by the first; lexicographic order
        // prefers the second (smaller first objective).
        let winners = [(0.05, 0.30), (0.04, 0.35), (0.06, 0.40)];
        assert_eq!(pick_winner(&winners), 1);
        // Tie on both objectives: lowest restart index.
        let tied = [(0.1, 0.2), (0.1, 0.2)];
        assert_eq!(pick_winner(&tied), 0);
        let single = [(0.5, 0.5)];
        assert_eq!(pick_winner(&single), 0);
    }

    #[test]
    fn acquisition_is_deterministic_per_seed() {
        let space = space_for(LearnerKind::Svr);
        let sub = space.full_subspace();
        let points = crate::space::lhs_sample(&space, &sub, 20, 1);
        let losses: Vec<(f64, f64)> = (0..20)
            .map(|i| (0.1 + 0.01 * i as f64, 0.2 + 0.02 * i as f64))
            .collect();
        let surrogate = Surrogate::fit(&space, &points, &losses, 3).unwrap();
        let cfg = test_cfg();
        let a = acquire_optimum(&surrogate, &space, &cfg, 2.0, 9, |_| false);
        let b = acquire_optimum(&surrogate, &space, &cfg, 2.0, 9, |_| false);
        let c = acquire_optimum(&surrogate, &space, &cfg, 2.0, 10, |_| false);
        assert_eq!(a.point, b.point, "same acquisition seed, same proposal");
        assert_ne!(a.point, c.point);
        assert!(space.validate_point(&a.point).is_ok());
    }

    #[test]
    fn mixed_space_windows_nest_and_categoricals_never_shrink() {
        let space = space_for(LearnerKind::Svr);
        let sub = space.full_subspace();
        let points = crate::space::lhs_sample(&space, &sub, 15, 2);
        let losses: Vec<(f64, f64)> = points
            .iter()
            .map(|p| {
                let c = p.real("c").unwrap() / 10.0;
                (c * 0.5, c * 0.5 + 0.1)
            })
            .collect();
        let surrogate = Surrogate::fit(&space, &points, &losses, 4).unwrap();
        let cfg = test_cfg();
        let out = acquire_optimum(&surrogate, &space, &cfg, 2.0, 77, |_| false);
        for restart in &out.restarts {
            let full = space.full_subspace();
            for w in &restart.windows {
                assert!(full.contains(w));
            }
            for (spec, dom) in space.params().iter().zip(restart.windows.last().unwrap().domains())
            {
                if matches!(spec.kind, crate::space::ParamKind::Categorical { .. }) {
                    assert_eq!(*dom, crate::space::SubDomain::Categorical);
                }
            }
        }
    }

    #[test]
    fn archived_duplicates_are_resolved_by_resampling() {
        let space = line_space();
        let cfg = test_cfg();
        let first = acquire_optimum(&Bowl, &space, &cfg, 1.0, 13, |_| false);
        // Archive exactly the point the acquisition wants to return.
        let taken = first.point.clone();
        let second = acquire_optimum(&Bowl, &space, &cfg, 1.0, 13, |p| *p == taken);
        assert_ne!(second.point, taken);
        assert!(second.duplicate_resamples >= 1);
        // The replacement comes from the winning restart's final window.
        let final_window = second.restarts[second.winning_restart]
            .windows
            .last()
            .unwrap();
        assert!(final_window.contains_point(&space, &second.point));
    }

    #[test]
    fn exhausted_spaces_fall_back_to_uniform_draws() {
        let space = line_space();
        let mut cfg = test_cfg();
        cfg.n_ii = 2;
        cfg.candidates_per_iter = 10;
        let out = acquire_optimum(&Bowl, &space, &cfg, 1.0, 21, |_| true);
        // 10 window resamples, then uniform draws until the cap.
        assert!(out.duplicate_resamples > 10);
        assert!(space.validate_point(&out.point).is_ok());
    }
}
