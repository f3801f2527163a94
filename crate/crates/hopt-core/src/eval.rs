//! Cross-validated scoring of learner configurations.
//!
//! A [`Dataset`] holds min-max normalized features and responses together
//! with the scalers needed to invert them. [`cross_validate`] scores one
//! configuration with k-fold cross-validation on the two objectives (root
//! mean square error and maximum absolute error), producing an
//! [`EvalRecord`]. The fold partition depends only on the dataset and its
//! seed, never on who asks, so any two configurations scored on the same
//! dataset are compared on identical splits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

use crate::learners::{self, FitError, LearnerKind, TrainedModel};
use crate::space::{DesignSpace, HpPoint, Normalizer};
use crate::util::{fmt_f64, sample_sd, seeded_rng};

const FOLD_STREAM: u64 = 0x464f_4c44;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and target lengths differ: {predicted} vs {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("empty vectors have no error statistics")]
    Empty,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("dataset has {rows} rows, fewer than {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("invalid dataset: {0}")]
    BadDataset(String),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// A normalized regression dataset: `n` rows by `d` features plus one
/// response column, everything scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub response_name: String,
    /// Row-major normalized features.
    pub xs: Vec<Vec<f64>>,
    /// Normalized responses.
    pub ys: Vec<f64>,
    /// Per-feature raw bounds, kept so rows can be denormalized.
    pub x_scaler: Normalizer,
    /// Single-column raw bounds for the response.
    pub y_scaler: Normalizer,
    /// Per-row feasibility marker (for example a displacement cap); rows
    /// stay in the dataset either way.
    pub feasible: Vec<bool>,
    /// Generation seed; also drives the cross-validation fold shuffle.
    pub seed: u64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    /// Checks the structural invariants: consistent shapes, at least as
    /// many rows as features, and every value inside `[0, 1]`.
    pub fn validate(&self) -> Result<(), EvalError> {
        let n = self.n();
        let d = self.d();
        if n == 0 {
            return Err(EvalError::BadDataset("no rows".into()));
        }
        if n < d {
            return Err(EvalError::BadDataset(format!(
                "{n} rows cannot support {d} features; need at least one row per feature"
            )));
        }
        if self.ys.len() != n || self.feasible.len() != n {
            return Err(EvalError::BadDataset(format!(
                "column lengths disagree: {} feature rows, {} responses, {} flags",
                n,
                self.ys.len(),
                self.feasible.len()
            )));
        }
        if self.x_scaler.cols() != d || self.y_scaler.cols() != 1 {
            return Err(EvalError::BadDataset("scaler widths disagree with the data".into()));
        }
        for (i, row) in self.xs.iter().enumerate() {
            if row.len() != d {
                return Err(EvalError::BadDataset(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(v) {
                    return Err(EvalError::BadDataset(format!(
                        "feature `{}` row {i} is {v}, outside [0, 1]",
                        self.feature_names[j]
                    )));
                }
            }
        }
        for (i, y) in self.ys.iter().enumerate() {
            if !(0.0..=1.0).contains(y) {
                return Err(EvalError::BadDataset(format!(
                    "response row {i} is {y}, outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Root mean square error between two equally long vectors.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check_pair(predicted, actual)?;
    let n = predicted.len() as f64;
    let ss: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((ss / n).sqrt())
}

/// Maximum absolute error between two equally long vectors. Always at
/// least as large as [`rmse`] of the same pair.
pub fn mxae(predicted: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check_pair(predicted, actual)?;
    Ok(predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs())
        .fold(0.0, f64::max))
}

fn check_pair(predicted: &[f64], actual: &[f64]) -> Result<(), EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Assigns each row to a fold. The shuffle is seeded by the dataset seed
/// alone, so every configuration scored on one dataset sees the same
/// partition. Fold sizes differ by at most one.
pub fn fold_partition(n_rows: usize, folds: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = seeded_rng(seed, FOLD_STREAM);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; n_rows];
    let base = n_rows / folds;
    let extra = n_rows % folds;
    let mut cursor = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        for &row in &order[cursor..cursor + size] {
            assignment[row] = fold;
        }
        cursor += size;
    }
    assignment
}

/// One configuration's cross-validated score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub point: HpPoint,
    pub fold_rmse: Vec<f64>,
    pub fold_mxae: Vec<f64>,
    /// True where the fold's fit failed and its losses were pinned to 1.0.
    pub fold_failed: Vec<bool>,
    pub mean_rmse: f64,
    pub sd_rmse: f64,
    pub mean_mxae: f64,
    pub sd_mxae: f64,
    /// Sum of per-fold training wall times, seconds.
    pub train_time_s: f64,
}

impl EvalRecord {
    pub fn failures(&self) -> usize {
        self.fold_failed.iter().filter(|f| **f).count()
    }

    pub fn losses(&self) -> (f64, f64) {
        (self.mean_rmse, self.mean_mxae)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Scores `point` on `data` by k-fold cross-validation.
///
/// Each fold trains on the remaining rows and predicts the held-out rows;
/// predictions are clamped to `[0, 1]` before scoring so losses stay on the
/// normalized response scale. A fold whose fit fails contributes losses of
/// 1.0 and is flagged rather than aborting the evaluation.
pub fn cross_validate(
    data: &Dataset,
    kind: LearnerKind,
    point: &HpPoint,
    folds: usize,
) -> Result<EvalRecord, EvalError> {
    if folds < 2 {
        return Err(EvalError::TooFewFolds(folds));
    }
    let n = data.n();
    if n < folds {
        return Err(EvalError::TooFewRows { rows: n, folds });
    }
    let assignment = fold_partition(n, folds, data.seed);
    // Pre-derived so parallel fold order cannot affect results.
    let fold_seeds: Vec<u64> = (0..folds).map(|f| data.seed.wrapping_add(f as u64)).collect();

    let fold_results: Vec<(f64, f64, bool, f64)> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let mut train_x = Vec::new();
            let mut train_y = Vec::new();
            let mut test_x = Vec::new();
            let mut test_y = Vec::new();
            for i in 0..n {
                if assignment[i] == fold {
                    test_x.push(data.xs[i].clone());
                    test_y.push(data.ys[i]);
                } else {
                    train_x.push(data.xs[i].clone());
                    train_y.push(data.ys[i]);
                }
            }
            let started = Instant::now();
            let fitted = learners::fit(kind, &train_x, &train_y, point, fold_seeds[fold]);
            let elapsed = started.elapsed().as_secs_f64();
            match fitted {
                Ok(model) => {
                    let predicted: Vec<f64> = test_x
                        .iter()
                        .map(|x| model.predict(x).clamp(0.0, 1.0))
                        .collect();
                    let r = rmse(&predicted, &test_y).expect("fold is non-empty");
                    let m = mxae(&predicted, &test_y).expect("fold is non-empty");
                    (r, m, false, elapsed)
                }
                Err(_) => (1.0, 1.0, true, elapsed),
            }
        })
        .collect();

    let fold_rmse: Vec<f64> = fold_results.iter().map(|r| r.0).collect();
    let fold_mxae: Vec<f64> = fold_results.iter().map(|r| r.1).collect();
    let fold_failed: Vec<bool> = fold_results.iter().map(|r| r.2).collect();
    let train_time_s: f64 = fold_results.iter().map(|r| r.3).sum();

    Ok(EvalRecord {
        point: point.clone(),
        mean_rmse: mean(&fold_rmse),
        sd_rmse: sample_sd(&fold_rmse),
        mean_mxae: mean(&fold_mxae),
        sd_mxae: sample_sd(&fold_mxae),
        fold_rmse,
        fold_mxae,
        fold_failed,
        train_time_s,
    })
}

/// One fit on the full dataset, timed with a monotonic clock. Unlike
/// [`cross_validate`] this propagates fit failures, since there is no fold
/// aggregation to absorb them.
pub fn timed_single_fit(
    data: &Dataset,
    kind: LearnerKind,
    point: &HpPoint,
    seed: u64,
) -> Result<(TrainedModel, f64), EvalError> {
    let started = Instant::now();
    let model = learners::fit(kind, &data.xs, &data.ys, point, seed)?;
    Ok((model, started.elapsed().as_secs_f64()))
}

/// CSV header for [`eval_records_csv`]: the space's parameter columns, then
/// per-fold losses, summary statistics, and the failure count. `with_time`
/// appends the wall-time column, which is the one non-reproducible field.
pub fn eval_csv_header(space: &DesignSpace, folds: usize, with_time: bool) -> String {
    let mut cols = space.csv_headers();
    for i in 0..folds {
        cols.push(format!("fold{}_rmse", i + 1));
    }
    for i in 0..folds {
        cols.push(format!("fold{}_mxae", i + 1));
    }
    cols.extend(
        ["mean_rmse", "sd_rmse", "mean_mxae", "sd_mxae", "fit_failures"]
            .map(String::from),
    );
    if with_time {
        cols.push("train_time_s".into());
    }
    cols.join(",")
}

/// One CSV row per record, column order matching [`eval_csv_header`].
pub fn eval_records_csv(
    space: &DesignSpace,
    records: &[EvalRecord],
    with_time: bool,
) -> String {
    let folds = records.first().map_or(0, |r| r.fold_rmse.len());
    let mut out = eval_csv_header(space, folds, with_time);
    out.push('\n');
    for rec in records {
        let mut cells = space.csv_cells(&rec.point);
        cells.extend(rec.fold_rmse.iter().map(|v| fmt_f64(*v)));
        cells.extend(rec.fold_mxae.iter().map(|v| fmt_f64(*v)));
        cells.push(fmt_f64(rec.mean_rmse));
        cells.push(fmt_f64(rec.sd_rmse));
        cells.push(fmt_f64(rec.mean_mxae));
        cells.push(fmt_f64(rec.sd_mxae));
        cells.push(rec.failures().to_string());
        if with_time {
            cells.push(format!("{:.3}", rec.train_time_s));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::space::{baseline_initial, space_for, ParamValue};

    /// Builds a valid normalized dataset from raw rows of a known function.
    pub(crate) fn dataset_from_fn(
        n: usize,
        d: usize,
        seed: u64,
        f: impl Fn(&[f64]) -> f64,
    ) -> Dataset {
        use rand::Rng;
        let mut rng = seeded_rng(seed, 1);
        let raw_x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let raw_y: Vec<f64> = raw_x.iter().map(|r| f(r)).collect();
        let x_scaler = Normalizer::fit(&raw_x).unwrap();
        let y_rows: Vec<Vec<f64>> = raw_y.iter().map(|y| vec![*y]).collect();
        let y_scaler = Normalizer::fit(&y_rows).unwrap();
        Dataset {
            name: "test".into(),
            feature_names: (0..d).map(|j| format!("x{j}")).collect(),
            response_name: "y".into(),
            xs: raw_x.iter().map(|r| x_scaler.transform_row(r)).collect(),
            ys: raw_y.iter().map(|y| y_scaler.normalize_col(0, *y)).collect(),
            x_scaler,
            y_scaler,
            feasible: vec![true; n],
            seed,
        }
    }

    fn smooth(x: &[f64]) -> f64 {
        (x[0] * 1.1).sin() + 0.3 * x.get(1).copied().unwrap_or(0.0)
    }

    #[test]
    fn rmse_hand_values() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        // errors 3 and 4: sqrt((9 + 16) / 2) = sqrt(12.5)
        let r = rmse(&[3.0, 0.0], &[0.0, -4.0]).unwrap();
        assert!((r - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn mxae_hand_values() {
        assert_eq!(mxae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        // errors -3 and 4
        assert_eq!(mxae(&[0.0, 4.0], &[3.0, 0.0]).unwrap(), 4.0);
        assert!(mxae(&[1.0], &[]).is_err());
    }

    #[test]
    fn rmse_matches_two_pass_oracle_and_never_exceeds_mxae() {
        use rand::Rng;
        let mut rng = seeded_rng(42, 2);
        for _ in 0..20 {
            let a: Vec<f64> = (0..100).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..100).map(|_| rng.gen::<f64>()).collect();
            // Two-pass oracle: errors first, then mean of squares.
            let errs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let oracle = (errs.iter().map(|e| e * e).sum::<f64>() / 100.0).sqrt();
            let r = rmse(&a, &b).unwrap();
            let m = mxae(&a, &b).unwrap();
            assert!((r - oracle).abs() < 1e-12);
            assert!(m >= r);
        }
    }

    #[test]
    fn error_metrics_ignore_pair_order() {
        let a = vec![0.3, 0.9, 0.1, 0.5];
        let b = vec![0.2, 0.4, 0.15, 0.8];
        let (ra, ma) = (rmse(&a, &b).unwrap(), mxae(&a, &b).unwrap());
        let a2 = vec![0.5, 0.1, 0.9, 0.3];
        let b2 = vec![0.8, 0.15, 0.4, 0.2];
        assert_eq!(ra, rmse(&a2, &b2).unwrap());
        assert_eq!(ma, mxae(&a2, &b2).unwrap());
    }

    #[test]
    fn fold_partition_covers_all_rows_evenly() {
        for (n, folds) in [(1000, 5), (23, 5), (10, 3), (5, 5)] {
            let assignment = fold_partition(n, folds, 7);
            assert_eq!(assignment.len(), n);
            let mut sizes = vec![0usize; folds];
            for &f in &assignment {
                sizes[f] += 1;
            }
            assert_eq!(sizes.iter().sum::<usize>(), n);
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1, "n={n} folds={folds} sizes={sizes:?}");
            if n == 1000 {
                assert!(sizes.iter().all(|&s| s == 200));
            }
        }
    }

    #[test]
    fn fold_partition_depends_only_on_dataset_seed() {
        assert_eq!(fold_partition(50, 5, 3), fold_partition(50, 5, 3));
        assert_ne!(fold_partition(50, 5, 3), fold_partition(50, 5, 4));
    }

    #[test]
    fn cross_validate_scores_a_plain_forest() {
        let data = dataset_from_fn(60, 2, 11, smooth);
        data.validate().unwrap();
        let rec = cross_validate(&data, LearnerKind::Rfr, &baseline_initial(LearnerKind::Rfr), 5)
            .unwrap();
        assert_eq!(rec.fold_rmse.len(), 5);
        assert_eq!(rec.failures(), 0);
        assert!(rec.train_time_s >= 0.0);
        // Internal consistency, exactly as stored.
        assert!((rec.mean_rmse - mean(&rec.fold_rmse)).abs() < 1e-12);
        assert!((rec.sd_rmse - sample_sd(&rec.fold_rmse)).abs() < 1e-12);
        assert!((rec.mean_mxae - mean(&rec.fold_mxae)).abs() < 1e-12);
        for (r, m) in rec.fold_rmse.iter().zip(&rec.fold_mxae) {
            assert!(r <= m);
            assert!((0.0..=1.0).contains(r) && (0.0..=1.0).contains(m));
        }
    }

    #[test]
    fn paired_evaluations_share_the_fold_partition() {
        // Two different configs on one dataset must produce fold-aligned
        // records; with a deterministic learner the records are also
        // reproducible call-to-call.
        let data = dataset_from_fn(40, 2, 12, smooth);
        let a = cross_validate(&data, LearnerKind::Gpr, &baseline_initial(LearnerKind::Gpr), 5)
            .unwrap();
        let b = cross_validate(&data, LearnerKind::Gpr, &baseline_initial(LearnerKind::Gpr), 5)
            .unwrap();
        assert_eq!(a.fold_rmse, b.fold_rmse);
        assert_eq!(a.fold_mxae, b.fold_mxae);
    }

    #[test]
    fn failed_fits_pin_losses_to_one_and_are_flagged() {
        let data = dataset_from_fn(30, 2, 13, smooth);
        // tanh kernel shapes that produce an indefinite matrix: every fold
        // fails, losses pin to 1.
        let point = HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("tanhdot".into())),
            ("scale", ParamValue::Real(8.0)),
            ("offset", ParamValue::Real(-3.0)),
        ]);
        let rec = cross_validate(&data, LearnerKind::Gpr, &point, 5).unwrap();
        assert_eq!(rec.failures(), 5);
        assert!(rec.fold_rmse.iter().all(|&v| v == 1.0));
        assert!(rec.fold_mxae.iter().all(|&v| v == 1.0));
        assert_eq!(rec.mean_rmse, 1.0);
        assert_eq!(rec.sd_rmse, 0.0);
    }

    #[test]
    fn exact_predictor_scores_zero() {
        // A GPR interpolator on clean data drives training error to zero;
        // held-out error is small but nonzero. Dial folds up so each
        // training set nearly equals the full data, then check the losses
        // are tiny rather than exactly zero.
        let data = dataset_from_fn(30, 1, 14, |x| 0.2 * x[0] + 0.5);
        let point = HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("polydot".into())),
            ("degree", ParamValue::Int(1)),
            ("scale", ParamValue::Real(1.0)),
            ("offset", ParamValue::Real(1.0)),
        ]);
        let rec = cross_validate(&data, LearnerKind::Gpr, &point, 5).unwrap();
        assert_eq!(rec.failures(), 0);
        assert!(rec.mean_rmse < 1e-3, "linear kernel on linear data: {}", rec.mean_rmse);
    }

    #[test]
    fn timed_single_fit_is_deterministic_apart_from_time() {
        let data = dataset_from_fn(40, 2, 15, smooth);
        let point = baseline_initial(LearnerKind::Rfr);
        let (m1, t1) = timed_single_fit(&data, LearnerKind::Rfr, &point, 9).unwrap();
        let (m2, _) = timed_single_fit(&data, LearnerKind::Rfr, &point, 9).unwrap();
        assert!(t1 >= 0.0);
        for x in &data.xs {
            assert_eq!(m1.predict(x).to_bits(), m2.predict(x).to_bits());
        }
    }

    #[test]
    fn dataset_validation_catches_shape_and_range_errors() {
        let mut data = dataset_from_fn(10, 2, 16, smooth);
        data.validate().unwrap();
        data.ys[3] = 1.5;
        assert!(data.validate().is_err());
        let mut short = dataset_from_fn(10, 2, 16, smooth);
        short.feasible.pop();
        assert!(short.validate().is_err());
        let mut thin = dataset_from_fn(10, 2, 16, smooth);
        thin.xs.truncate(1);
        thin.ys.truncate(1);
        thin.feasible.truncate(1);
        assert!(thin.validate().is_err(), "1 row < 2 features must fail");
    }

    #[test]
    fn record_csv_is_stable_and_excludes_time_when_asked() {
        let data = dataset_from_fn(25, 2, 17, smooth);
        let space = space_for(LearnerKind::Rfr);
        let rec = cross_validate(&data, LearnerKind::Rfr, &baseline_initial(LearnerKind::Rfr), 5)
            .unwrap();
        let csv = eval_records_csv(&space, &[rec.clone()], false);
        let with_time = eval_records_csv(&space, &[rec], true);
        assert!(csv.starts_with("trees,nf,min_ts,max_tn,fold1_rmse"));
        assert!(!csv.contains("train_time_s"));
        assert!(with_time.trim_end().lines().next().unwrap().ends_with("train_time_s"));
        // Two serializations of the same record agree byte for byte.
        let again = eval_records_csv(
            &space,
            &[cross_validate(
                &data,
                LearnerKind::Rfr,
                &baseline_initial(LearnerKind::Rfr),
                5,
            )
            .unwrap()],
            false,
        );
        assert_eq!(csv, again);
    }
}
