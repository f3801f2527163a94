//! Sequential model-based optimization of learner hyperparameters against
//! the two cross-validation losses (RMSE, MXAE).
//!
//! A run spends its evaluation budget in two phases: a space-filling batch
//! of initial configurations, then one-at-a-time acquisitions. Each
//! acquisition fits a twin random-forest surrogate to everything evaluated
//! so far, searches the surrogate's lower confidence bounds with restarted
//! window shrinking (see [`acquire`]), and cross-validates the proposed
//! configuration. Every evaluation lands in a [`ParetoArchive`]; nothing is
//! discarded, the non-dominated front is maintained over the full archive.
//!
//! All randomness descends from a single run seed, so a run is exactly
//! repeatable: same seed, same archive, byte for byte.

pub mod acquire;
pub mod pareto;
pub mod surrogate;

pub use acquire::{acquire_optimum, AcquireOutcome, RestartTrace};
pub use pareto::{
    dominates, hypervolume, pareto_front, pareto_front_brute_force, select_from_front,
    ParetoArchive, SelectStrategy,
};
pub use surrogate::{lcb, LossModel, Surrogate, SurrogatePrediction};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{cross_validate, eval_records_csv, Dataset, EvalError, EvalRecord};
use crate::learners::{FitError, LearnerKind};
use crate::space::{lhs_sample, DesignSpace, HpPoint};
use crate::util::{fmt_f64, mix_seed};

/// Seed-derivation tags; every random decision in a run draws from
/// `mix_seed(run_seed, TAG, counter)` so the streams never collide.
const INIT_TAG: u64 = 0x11;
const SURROGATE_TAG: u64 = 0x12;
const ACQUIRE_TAG: u64 = 0x13;

/// Hypervolume reference corner. Both losses are computed on responses
/// normalized to `[0, 1]` and clamped predictions, so `(1, 1)` is the worst
/// corner either loss can reach.
pub const HV_REFERENCE: (f64, f64) = (1.0, 1.0);

#[derive(Debug, Error)]
pub enum SmboError {
    #[error("bad optimizer configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("surrogate refit failed: {0}")]
    Surrogate(#[from] FitError),
}

/// Budget and search-shape knobs for one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmboConfig {
    /// Space-filling evaluations before the surrogate takes over.
    pub n_initial: usize,
    /// Total evaluation budget, including the initial batch.
    pub n_total: usize,
    /// Half-width of the shrunken window, as a fraction of the current
    /// domain width.
    pub r_p: f64,
    /// Shrink iterations per restart.
    pub n_ii: usize,
    /// Independent restarts per acquisition.
    pub n_re: usize,
    /// Candidates scored per shrink iteration.
    pub candidates_per_iter: usize,
    /// Cross-validation folds per evaluation.
    pub folds: usize,
    /// Run seed; every derived seed mixes this with a purpose tag.
    pub seed: u64,
    /// Exploration weight on the surrogate spread. `None` selects 1 for
    /// fully numeric spaces and 2 when any parameter is categorical.
    pub phi: Option<f64>,
}

impl Default for SmboConfig {
    fn default() -> Self {
        SmboConfig {
            n_initial: 30,
            n_total: 100,
            r_p: 0.25,
            n_ii: 10,
            n_re: 5,
            candidates_per_iter: 200,
            folds: 5,
            seed: 0,
            phi: None,
        }
    }
}

impl SmboConfig {
    pub fn validate(&self) -> Result<(), SmboError> {
        let bad = |msg: String| Err(SmboError::Config(msg));
        if self.n_initial < 2 {
            return bad(format!(
                "n_initial is {}; at least 2 evaluations are needed before a surrogate can be fitted",
                self.n_initial
            ));
        }
        if self.n_total < self.n_initial {
            return bad(format!(
                "n_total ({}) is smaller than n_initial ({})",
                self.n_total, self.n_initial
            ));
        }
        if !(self.r_p > 0.0 && self.r_p <= 0.5) {
            return bad(format!("r_p is {}; must be in (0, 0.5]", self.r_p));
        }
        if self.n_ii == 0 {
            return bad("n_ii is 0; each restart needs at least one iteration".into());
        }
        if self.n_re == 0 {
            return bad("n_re is 0; at least one restart is required".into());
        }
        if self.candidates_per_iter == 0 {
            return bad("candidates_per_iter is 0".into());
        }
        if self.folds < 2 {
            return bad(format!("folds is {}; cross-validation needs at least 2", self.folds));
        }
        Ok(())
    }

    /// Effective exploration weight for `space`: the explicit override if
    /// set, otherwise 1 for all-numeric spaces and 2 for mixed ones, where
    /// the one-hot distance structure makes the spread less trustworthy.
    pub fn phi_for(&self, space: &DesignSpace) -> f64 {
        self.phi
            .unwrap_or(if space.has_categorical() { 2.0 } else { 1.0 })
    }
}

/// One line of the convergence trace, written after every evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 1-based number of evaluations done, including this one.
    pub evaluation: usize,
    pub best_rmse: f64,
    pub best_mxae: f64,
    pub hypervolume: f64,
}

/// Completed (or in-progress, when seen through an observer) run state.
#[derive(Debug, Clone)]
pub struct HoptRun {
    pub config: SmboConfig,
    pub learner: LearnerKind,
    pub archive: ParetoArchive,
    pub trace: Vec<TraceRow>,
    /// Total duplicate-resolution draws across all acquisitions.
    pub duplicate_resamples: usize,
    /// Wall-clock seconds spent fitting surrogate forests, summed over all
    /// iterations. Lets callers separate loop overhead from model fitting.
    pub surrogate_fit_s: f64,
}

impl HoptRun {
    /// Archive CSV, in evaluation order. Wall-clock time is opt-in because
    /// it is the one nondeterministic column.
    pub fn archive_csv(&self, space: &DesignSpace, with_time: bool) -> String {
        eval_records_csv(space, self.archive.entries(), with_time)
    }

    /// Non-dominated front only, same column layout as the archive.
    pub fn front_csv(&self, space: &DesignSpace) -> String {
        let records: Vec<EvalRecord> =
            self.archive.front_records().into_iter().cloned().collect();
        eval_records_csv(space, &records, false)
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("evaluation,best_rmse,best_mxae,hypervolume\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.evaluation,
                fmt_f64(row.best_rmse),
                fmt_f64(row.best_mxae),
                fmt_f64(row.hypervolume)
            ));
        }
        out
    }

    /// One front member, chosen by `strategy` after the median filter.
    pub fn select_record(&self, strategy: SelectStrategy, seed: u64) -> &EvalRecord {
        let front = self.archive.front_records();
        let losses: Vec<(f64, f64)> = front.iter().map(|r| r.losses()).collect();
        front[select_from_front(&losses, strategy, seed)]
    }
}

/// Observer hook for long runs; called after every archive insertion so
/// callers can flush partial results.
pub trait RunObserver {
    fn on_evaluation(&mut self, run: &HoptRun, is_initial: bool);
}

/// Observer that does nothing.
pub struct NoopObserver;

impl RunObserver for NoopObserver {
    fn on_evaluation(&mut self, _run: &HoptRun, _is_initial: bool) {}
}

pub fn run_hopt(
    space: &DesignSpace,
    data: &Dataset,
    learner: LearnerKind,
    cfg: &SmboConfig,
) -> Result<HoptRun, SmboError> {
    run_hopt_with(space, data, learner, cfg, &mut NoopObserver)
}

/// Runs the full optimization loop, reporting each evaluation to
/// `observer` as it lands.
pub fn run_hopt_with<O: RunObserver>(
    space: &DesignSpace,
    data: &Dataset,
    learner: LearnerKind,
    cfg: &SmboConfig,
    observer: &mut O,
) -> Result<HoptRun, SmboError> {
    cfg.validate()?;
    data.validate().map_err(SmboError::Eval)?;
    let phi = cfg.phi_for(space);

    let mut run = HoptRun {
        config: cfg.clone(),
        learner,
        archive: ParetoArchive::new(),
        trace: Vec::with_capacity(cfg.n_total),
        duplicate_resamples: 0,
        surrogate_fit_s: 0.0,
    };

    let initial = lhs_sample(
        space,
        &space.full_subspace(),
        cfg.n_initial,
        mix_seed(cfg.seed, INIT_TAG, 0),
    );
    for point in initial {
        let record = cross_validate(data, learner, &point, cfg.folds)?;
        push_and_trace(&mut run, record);
        observer.on_evaluation(&run, true);
    }

    while run.archive.len() < cfg.n_total {
        let step = run.archive.len() as u64;
        let points: Vec<HpPoint> = run
            .archive
            .entries()
            .iter()
            .map(|e| e.point.clone())
            .collect();
        let fit_started = std::time::Instant::now();
        let surrogate = Surrogate::fit(
            space,
            &points,
            &run.archive.losses(),
            mix_seed(cfg.seed, SURROGATE_TAG, step),
        )?;
        run.surrogate_fit_s += fit_started.elapsed().as_secs_f64();
        let outcome = acquire_optimum(
            &surrogate,
            space,
            cfg,
            phi,
            mix_seed(cfg.seed, ACQUIRE_TAG, step),
            |p| run.archive.contains_point(p),
        );
        run.duplicate_resamples += outcome.duplicate_resamples;
        let record = cross_validate(data, learner, &outcome.point, cfg.folds)?;
        push_and_trace(&mut run, record);
        observer.on_evaluation(&run, false);
    }
    Ok(run)
}

fn push_and_trace(run: &mut HoptRun, record: EvalRecord) {
    run.archive.push(record);
    run.trace.push(TraceRow {
        evaluation: run.archive.len(),
        best_rmse: run.archive.best_rmse(),
        best_mxae: run.archive.best_mxae(),
        hypervolume: run.archive.hypervolume(HV_REFERENCE),
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::tests::dataset_from_fn;
    use crate::space::space_for;

    fn tiny_cfg(seed: u64) -> SmboConfig {
        SmboConfig {
            n_initial: 3,
            n_total: 7,
            n_ii: 2,
            n_re: 2,
            candidates_per_iter: 12,
            folds: 3,
            seed,
            ..SmboConfig::default()
        }
    }

    fn tiny_data(seed: u64) -> Dataset {
        dataset_from_fn(24, 2, seed, |x| (x[0] * 0.9).sin() + 0.2 * x[1])
    }

    #[test]
    fn default_config_values() {
        let cfg = SmboConfig::default();
        assert_eq!(cfg.n_initial, 30);
        assert_eq!(cfg.n_total, 100);
        assert_eq!(cfg.r_p, 0.25);
        assert_eq!(cfg.n_ii, 10);
        assert_eq!(cfg.n_re, 5);
        assert_eq!(cfg.candidates_per_iter, 200);
        assert_eq!(cfg.folds, 5);
        assert_eq!(cfg.phi, None);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validation_rejects_degenerate_configs() {
        let ok = SmboConfig::default();
        for broken in [
            SmboConfig { n_initial: 1, ..ok.clone() },
            SmboConfig { n_total: 5, n_initial: 6, ..ok.clone() },
            SmboConfig { r_p: 0.0, ..ok.clone() },
            SmboConfig { r_p: 0.75, ..ok.clone() },
            SmboConfig { n_ii: 0, ..ok.clone() },
            SmboConfig { n_re: 0, ..ok.clone() },
            SmboConfig { candidates_per_iter: 0, ..ok.clone() },
            SmboConfig { folds: 1, ..ok.clone() },
        ] {
            assert!(
                matches!(broken.validate(), Err(SmboError::Config(_))),
                "{broken:?} should be rejected"
            );
        }
    }

    #[test]
    fn phi_defaults_follow_space_mixture() {
        let cfg = SmboConfig::default();
        // All-integer space: trusting weight.
        assert_eq!(cfg.phi_for(&space_for(LearnerKind::Rfr)), 1.0);
        // Kernel choice is categorical: cautious weight.
        assert_eq!(cfg.phi_for(&space_for(LearnerKind::Gpr)), 2.0);
        let forced = SmboConfig { phi: Some(3.5), ..cfg };
        assert_eq!(forced.phi_for(&space_for(LearnerKind::Gpr)), 3.5);
    }

    #[test]
    fn tiny_run_fills_the_budget_with_valid_unique_points() {
        let space = space_for(LearnerKind::Gpr);
        let data = tiny_data(8);
        let cfg = tiny_cfg(31);
        let run = run_hopt(&space, &data, LearnerKind::Gpr, &cfg).unwrap();

        assert_eq!(run.archive.len(), cfg.n_total);
        assert_eq!(run.trace.len(), cfg.n_total);
        for (i, row) in run.trace.iter().enumerate() {
            assert_eq!(row.evaluation, i + 1);
        }
        // Monotone run-best curves and hypervolume.
        for pair in run.trace.windows(2) {
            assert!(pair[1].best_rmse <= pair[0].best_rmse);
            assert!(pair[1].best_mxae <= pair[0].best_mxae);
            assert!(pair[1].hypervolume >= pair[0].hypervolume - 1e-15);
        }
        // Every archived point is valid, and no configuration repeats.
        let entries = run.archive.entries();
        for e in entries {
            space.validate_point(&e.point).unwrap();
        }
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                assert_ne!(entries[i].point, entries[j].point, "repeat at {i},{j}");
            }
        }
        // The front is usable for selection.
        let rec = run.select_record(SelectStrategy::Knee, cfg.seed);
        assert!(run.archive.front_records().iter().any(|r| r.point == rec.point));
    }

    #[test]
    fn runs_are_bitwise_repeatable_per_seed() {
        let space = space_for(LearnerKind::Rfr);
        let data = tiny_data(3);
        let cfg = tiny_cfg(99);
        let a = run_hopt(&space, &data, LearnerKind::Rfr, &cfg).unwrap();
        let b = run_hopt(&space, &data, LearnerKind::Rfr, &cfg).unwrap();
        assert_eq!(a.archive_csv(&space, false), b.archive_csv(&space, false));
        assert_eq!(a.trace_csv(), b.trace_csv());
        assert_eq!(a.front_csv(&space), b.front_csv(&space));

        let other = SmboConfig { seed: 100, ..cfg };
        let c = run_hopt(&space, &data, LearnerKind::Rfr, &other).unwrap();
        assert_ne!(a.archive_csv(&space, false), c.archive_csv(&space, false));
    }

    #[test]
    fn observer_sees_every_evaluation_in_order() {
        struct Counter {
            seen: Vec<(usize, bool)>,
        }
        impl RunObserver for Counter {
            fn on_evaluation(&mut self, run: &HoptRun, is_initial: bool) {
                self.seen.push((run.archive.len(), is_initial));
            }
        }
        let space = space_for(LearnerKind::Rfr);
        let data = tiny_data(5);
        let cfg = tiny_cfg(7);
        let mut counter = Counter { seen: Vec::new() };
        run_hopt_with(&space, &data, LearnerKind::Rfr, &cfg, &mut counter).unwrap();
        assert_eq!(counter.seen.len(), cfg.n_total);
        for (i, (len, initial)) in counter.seen.iter().enumerate() {
            assert_eq!(*len, i + 1);
            assert_eq!(*initial, i < cfg.n_initial);
        }
    }

    #[test]
    fn trace_csv_round_trips_through_the_fixed_format() {
        let space = space_for(LearnerKind::Rfr);
        let data = tiny_data(11);
        let cfg = tiny_cfg(1);
        let run = run_hopt(&space, &data, LearnerKind::Rfr, &cfg).unwrap();
        let csv = run.trace_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "evaluation,best_rmse,best_mxae,hypervolume");
        let mut rows = 0;
        for (line, row) in lines.zip(&run.trace) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 4);
            assert_eq!(cells[0].parse::<usize>().unwrap(), row.evaluation);
            assert_eq!(crate::util::parse_f64(cells[1]).unwrap(), row.best_rmse);
            assert_eq!(crate::util::parse_f64(cells[3]).unwrap(), row.hypervolume);
            rows += 1;
        }
        assert_eq!(rows, run.trace.len());
    }
}
