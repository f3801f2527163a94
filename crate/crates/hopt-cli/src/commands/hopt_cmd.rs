//! `hopt hopt`: run the full tuning loop on a dataset and write the
//! archive, front, trace, timing, and selected-point artifacts.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use log::info;

use hopt_core::smbo::{run_hopt_with, HoptRun, RunObserver, SelectStrategy};
use hopt_core::space::{space_for, space_from_toml};
use hopt_core::util::fmt_f64;
use hopt_core::{DesignSpace, LearnerKind};

use crate::config::{DataFlags, Resolved, SmboFlags};
use crate::errors::{from_smbo, CliError};
use crate::manifest::{HoptManifest, Manifest, MANIFEST_VERSION};
use crate::outdir::OutDir;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Learner to tune: gpr, svr, rfr or ann
    #[arg(long)]
    pub learner: Option<LearnerKind>,
    #[command(flatten)]
    pub data: DataFlags,
    /// Custom tuning space (TOML); default is the learner's preset space
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[command(flatten)]
    pub smbo: SmboFlags,
    /// How to pick the reported point off the front: knee or random
    #[arg(long)]
    pub select: Option<SelectStrategy>,
    /// Replay a stored manifest instead of flags
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Rewrites the archive and trace CSVs after every evaluation so an
/// interrupted run still leaves consistent partial artifacts on disk.
struct FlushObserver<'a> {
    dir: &'a OutDir,
    space: &'a DesignSpace,
    error: Option<CliError>,
}

impl RunObserver for FlushObserver<'_> {
    fn on_evaluation(&mut self, run: &HoptRun, _is_initial: bool) {
        if self.error.is_some() {
            return;
        }
        let flushed = self
            .dir
            .write("archive.csv", &run.archive_csv(self.space, false))
            .and_then(|()| self.dir.write("trace.csv", &run.trace_csv()));
        if let Err(e) = flushed {
            self.error = Some(e);
        }
    }
}

pub fn run(resolved: &Resolved, args: &Args) -> Result<(), CliError> {
    let manifest = match &args.manifest {
        Some(path) => {
            resolved.reject_flags_with_manifest(
                args.learner.is_none()
                    && args.data.is_empty()
                    && args.space.is_none()
                    && args.smbo.is_empty()
                    && args.select.is_none(),
            )?;
            match Manifest::load(path)? {
                Manifest::Hopt(m) => m,
                other => {
                    return Err(CliError::Config(format!(
                        "{} is a {} manifest, not hopt",
                        path.display(),
                        other.command_name()
                    )))
                }
            }
        }
        None => HoptManifest {
            format_version: MANIFEST_VERSION,
            learner: resolved.learner(args.learner)?,
            dataset: args.data.to_source(resolved.seed)?,
            space_toml: match &args.space {
                Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                    CliError::config(format!("{}: {e}", path.display()))
                })?),
                None => None,
            },
            smbo: resolved.smbo_config(&args.smbo)?,
            select: resolved.select(args.select)?,
        },
    };

    manifest.smbo.validate().map_err(CliError::config)?;
    let space = match &manifest.space_toml {
        Some(text) => space_from_toml(text).map_err(CliError::config)?,
        None => space_for(manifest.learner),
    };
    let data = manifest.dataset.resolve()?;
    info!(
        "tuning {} on {} ({} rows), budget {}+{}",
        manifest.learner,
        data.name,
        data.n(),
        manifest.smbo.n_initial,
        manifest.smbo.n_total - manifest.smbo.n_initial
    );

    let dir = OutDir::create(&resolved.out)?;
    Manifest::Hopt(manifest.clone()).save(dir.path())?;
    let mut observer = FlushObserver { dir: &dir, space: &space, error: None };
    let run = run_hopt_with(&space, &data, manifest.learner, &manifest.smbo, &mut observer)
        .map_err(from_smbo)?;
    if let Some(e) = observer.error {
        return Err(e);
    }

    write_outputs(&dir, &space, &run, manifest.select)
}

fn write_outputs(
    dir: &OutDir,
    space: &DesignSpace,
    run: &HoptRun,
    select: SelectStrategy,
) -> Result<(), CliError> {
    dir.write("archive.csv", &run.archive_csv(space, false))?;
    dir.write("front.csv", &run.front_csv(space))?;
    dir.write("trace.csv", &run.trace_csv())?;

    // Wall-clock times live apart from the reproducible artifacts.
    let mut timing = String::from("evaluation,train_time_s\n");
    for (i, rec) in run.archive.entries().iter().enumerate() {
        timing.push_str(&format!("{},{:.3}\n", i + 1, rec.train_time_s));
    }
    dir.write("timing.csv", &timing)?;

    let selected = run.select_record(select, run.config.seed);
    let summary = serde_json::json!({
        "learner": run.learner,
        "strategy": select,
        "point": selected.point,
        "mean_rmse": selected.mean_rmse,
        "mean_mxae": selected.mean_mxae,
        "front_size": run.archive.front_indices().len(),
        "evaluations": run.archive.len(),
        "duplicate_resamples": run.duplicate_resamples,
    });
    let mut text =
        serde_json::to_string_pretty(&summary).expect("summary always serializes");
    text.push('\n');
    dir.write("selected.json", &text)?;

    let cells: Vec<String> = space
        .csv_headers()
        .iter()
        .zip(space.csv_cells(&selected.point))
        .filter(|(_, cell)| cell != "NA")
        .map(|(name, cell)| format!("{name}={cell}"))
        .collect();
    println!(
        "selected ({}): {} with rmse={} mxae={}",
        selected_strategy_name(select),
        cells.join(" "),
        fmt_f64(selected.mean_rmse),
        fmt_f64(selected.mean_mxae)
    );
    println!(
        "archive: {} evaluations, front size {}, outputs in {}",
        run.archive.len(),
        run.archive.front_indices().len(),
        dir.path().display()
    );
    Ok(())
}

fn selected_strategy_name(select: SelectStrategy) -> &'static str {
    match select {
        SelectStrategy::Knee => "knee",
        SelectStrategy::Random => "random",
    }
}
