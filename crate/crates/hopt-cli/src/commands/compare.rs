//! `hopt compare`: tuned-versus-untuned study. Each trial runs the full
//! tuning loop, then scores the untuned starting configuration and the
//! selected tuned one with paired cross-validation on the training data and
//! with a one-shot fit evaluated on a freshly generated test set.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use log::info;

use hopt_core::eval::{cross_validate, mxae, rmse, timed_single_fit, Dataset, EvalRecord};
use hopt_core::smbo::{run_hopt, SelectStrategy};
use hopt_core::space::{baseline_initial, space_for};
use hopt_core::util::fmt_f64;
use hopt_core::{DesignSpace, HpPoint, LearnerKind};

use crate::config::{Resolved, SmboFlags};
use crate::errors::{from_smbo, CliError};
use crate::manifest::{generate_named, CompareManifest, Manifest, MANIFEST_VERSION};
use crate::outdir::OutDir;

/// Seed offset separating the test-set draw from the training draw.
const TEST_SEED_OFFSET: u64 = 0x5445_5354;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Learner to compare: gpr, svr, rfr or ann
    #[arg(long)]
    pub learner: Option<LearnerKind>,
    /// Built-in generator (the study needs a generator to mint unseen
    /// test data): tbpt, smooth, mixed or discontinuous
    #[arg(long)]
    pub problem: Option<String>,
    /// Training rows to generate
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian response noise for the synthetic families
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Seed for the generated datasets (defaults to the run seed)
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Unseen test rows (default: 18% of the training size)
    #[arg(long)]
    pub test_n: Option<usize>,
    /// Independent tuning trials
    #[arg(long)]
    pub trials: Option<usize>,
    #[command(flatten)]
    pub smbo: SmboFlags,
    /// How to pick the tuned point off the front: knee or random
    #[arg(long)]
    pub select: Option<SelectStrategy>,
    /// Replay a stored manifest instead of flags
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

struct ArmResult {
    cv: EvalRecord,
    test_rmse: f64,
    test_mxae: f64,
    one_shot_failed: bool,
    fit_seconds: Option<f64>,
}

pub fn run(resolved: &Resolved, args: &Args) -> Result<(), CliError> {
    let manifest = resolve_manifest(resolved, args)?;
    let space = space_for(manifest.learner);
    let train = generate_named(
        &manifest.problem,
        manifest.n,
        manifest.noise_sd,
        manifest.data_seed,
    )?;
    let test = generate_named(
        &manifest.problem,
        manifest.test_n,
        manifest.noise_sd,
        manifest.data_seed.wrapping_add(TEST_SEED_OFFSET),
    )?;
    // The test rows carry their own fitted normalizers; map them back to
    // raw units and onto the training scale so one model serves both sets.
    let (test_x, test_y) = rescale_to(&train, &test);

    let before_point = baseline_initial(manifest.learner);
    let before_cv = cross_validate(&train, manifest.learner, &before_point, manifest.smbo.folds)
        .map_err(CliError::runtime)?;

    let dir = OutDir::create(&resolved.out)?;
    Manifest::Compare(manifest.clone()).save(dir.path())?;

    let mut trials_csv = trials_header(&space);
    let mut folds_csv = String::from("trial,arm,fold,rmse,mxae\n");
    let mut timing_csv = String::from("trial,arm,fit_seconds\n");
    let mut arm_means: [Vec<ArmResult>; 2] = [Vec::new(), Vec::new()];

    for trial in 0..manifest.trials {
        let mut cfg = manifest.smbo.clone();
        cfg.seed = manifest.smbo.seed.wrapping_add(trial as u64);
        let tuned = run_hopt(&space, &train, manifest.learner, &cfg).map_err(from_smbo)?;
        let after_point = tuned.select_record(manifest.select, cfg.seed).point.clone();
        info!("trial {trial}: tuned point selected from a front of {}",
            tuned.archive.front_indices().len());

        for (arm, point, cv) in [
            ("before", &before_point, Some(before_cv.clone())),
            ("after", &after_point, None),
        ] {
            let cv = match cv {
                Some(record) => record,
                None => cross_validate(&train, manifest.learner, point, manifest.smbo.folds)
                    .map_err(CliError::runtime)?,
            };
            let result = score_arm(&train, manifest.learner, point, cv, &test_x, &test_y, cfg.seed);
            append_trial_row(&mut trials_csv, &space, trial, arm, point, &result);
            for (fold, (r, m)) in
                result.cv.fold_rmse.iter().zip(&result.cv.fold_mxae).enumerate()
            {
                folds_csv.push_str(&format!(
                    "{trial},{arm},{},{},{}\n",
                    fold + 1,
                    fmt_f64(*r),
                    fmt_f64(*m)
                ));
            }
            timing_csv.push_str(&format!(
                "{trial},{arm},{}\n",
                result.fit_seconds.map_or(String::new(), |s| format!("{s:.3}"))
            ));
            arm_means[if arm == "before" { 0 } else { 1 }].push(result);
        }
    }

    dir.write("trials.csv", &trials_csv)?;
    dir.write("folds.csv", &folds_csv)?;
    dir.write("timing.csv", &timing_csv)?;
    let summary = summary_csv(&arm_means[0], &arm_means[1]);
    dir.write("summary.csv", &summary)?;

    println!(
        "{} on {}: {} trials, change relative to the untuned start \
         (negative is an improvement):",
        manifest.learner, manifest.problem, manifest.trials
    );
    for line in summary.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let pct: f64 = cells[3].parse().unwrap_or(f64::NAN);
        println!("  {:<9} {:+.1}%", cells[0], pct);
    }
    println!("outputs in {}", dir.path().display());
    Ok(())
}

fn resolve_manifest(resolved: &Resolved, args: &Args) -> Result<CompareManifest, CliError> {
    if let Some(path) = &args.manifest {
        resolved.reject_flags_with_manifest(
            args.learner.is_none()
                && args.problem.is_none()
                && args.n.is_none()
                && args.noise_sd.is_none()
                && args.data_seed.is_none()
                && args.test_n.is_none()
                && args.trials.is_none()
                && args.smbo.is_empty()
                && args.select.is_none(),
        )?;
        return match Manifest::load(path)? {
            Manifest::Compare(m) => Ok(m),
            other => Err(CliError::Config(format!(
                "{} is a {} manifest, not compare",
                path.display(),
                other.command_name()
            ))),
        };
    }
    let problem = args.problem.clone().ok_or_else(|| {
        CliError::Config(
            "compare needs --problem: the study generates unseen test data, \
             so a file dataset cannot be used"
                .into(),
        )
    })?;
    let n = args.n.ok_or_else(|| CliError::Config("--n is required".into()))?;
    let test_n = args.test_n.unwrap_or_else(|| scaled_test_size(n));
    if test_n < 2 {
        return Err(CliError::Config(format!(
            "test set of {test_n} rows is too small to score"
        )));
    }
    let trials = args.trials.unwrap_or(5);
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    Ok(CompareManifest {
        format_version: MANIFEST_VERSION,
        learner: resolved.learner(args.learner)?,
        problem,
        n,
        noise_sd: args.noise_sd.unwrap_or(0.0),
        data_seed: args.data_seed.unwrap_or(resolved.seed),
        test_n,
        trials,
        smbo: resolved.smbo_config(&args.smbo)?,
        select: resolved.select(args.select)?,
    })
}

/// Default unseen-set size: 18% of the training size, at least 2 rows.
fn scaled_test_size(n: usize) -> usize {
    ((n as f64 * 0.18).round() as usize).max(2)
}

/// Converts `test` rows from their own normalized scale to `train`'s.
fn rescale_to(train: &Dataset, test: &Dataset) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs = test
        .xs
        .iter()
        .map(|row| train.x_scaler.transform_row(&test.x_scaler.inverse_row(row)))
        .collect();
    let ys = test
        .ys
        .iter()
        .map(|&y| train.y_scaler.normalize_col(0, test.y_scaler.denormalize_col(0, y)))
        .collect();
    (xs, ys)
}

fn score_arm(
    train: &Dataset,
    learner: LearnerKind,
    point: &HpPoint,
    cv: EvalRecord,
    test_x: &[Vec<f64>],
    test_y: &[f64],
    seed: u64,
) -> ArmResult {
    match timed_single_fit(train, learner, point, seed) {
        Ok((model, seconds)) => {
            let predicted: Vec<f64> =
                test_x.iter().map(|x| model.predict(x).clamp(0.0, 1.0)).collect();
            ArmResult {
                cv,
                test_rmse: rmse(&predicted, test_y).expect("test set is non-empty"),
                test_mxae: mxae(&predicted, test_y).expect("test set is non-empty"),
                one_shot_failed: false,
                fit_seconds: Some(seconds),
            }
        }
        // A failed one-shot fit scores like a failed fold: worst-case
        // losses, flagged, not fatal.
        Err(_) => ArmResult {
            cv,
            test_rmse: 1.0,
            test_mxae: 1.0,
            one_shot_failed: true,
            fit_seconds: None,
        },
    }
}

fn trials_header(space: &DesignSpace) -> String {
    let mut cols = vec!["trial".to_string(), "arm".to_string()];
    cols.extend(space.csv_headers());
    cols.extend(
        [
            "mean_rmse",
            "sd_rmse",
            "mean_mxae",
            "sd_mxae",
            "fit_failures",
            "test_rmse",
            "test_mxae",
            "one_shot_failed",
        ]
        .map(String::from),
    );
    let mut out = cols.join(",");
    out.push('\n');
    out
}

fn append_trial_row(
    out: &mut String,
    space: &DesignSpace,
    trial: usize,
    arm: &str,
    point: &HpPoint,
    result: &ArmResult,
) {
    let mut cells = vec![trial.to_string(), arm.to_string()];
    cells.extend(space.csv_cells(point));
    cells.push(fmt_f64(result.cv.mean_rmse));
    cells.push(fmt_f64(result.cv.sd_rmse));
    cells.push(fmt_f64(result.cv.mean_mxae));
    cells.push(fmt_f64(result.cv.sd_mxae));
    cells.push(result.cv.failures().to_string());
    cells.push(fmt_f64(result.test_rmse));
    cells.push(fmt_f64(result.test_mxae));
    cells.push(result.one_shot_failed.to_string());
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Per-measure means over all trials plus the percentage change,
/// `100 * (after - before) / before`; negative means the tuned model
/// reduced the measure.
fn summary_csv(before: &[ArmResult], after: &[ArmResult]) -> String {
    let mean = |values: Vec<f64>| values.iter().sum::<f64>() / values.len() as f64;
    let mut out = String::from("measure,before_mean,after_mean,change_pct\n");
    let measures: [(&str, fn(&ArmResult) -> f64); 4] = [
        ("cv_rmse", |r| r.cv.mean_rmse),
        ("cv_mxae", |r| r.cv.mean_mxae),
        ("test_rmse", |r| r.test_rmse),
        ("test_mxae", |r| r.test_mxae),
    ];
    for (name, get) in measures {
        let b = mean(before.iter().map(get).collect());
        let a = mean(after.iter().map(get).collect());
        let pct = if b == 0.0 { 0.0 } else { 100.0 * (a - b) / b };
        out.push_str(&format!("{name},{},{},{}\n", fmt_f64(b), fmt_f64(a), fmt_f64(pct)));
    }
    out
}
