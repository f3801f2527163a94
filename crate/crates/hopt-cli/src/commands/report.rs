//! `hopt report`: turn stored run directories into plot files and
//! consolidated CSVs. Everything is read back from the artifacts on disk;
//! nothing is recomputed, so a report over unchanged runs is byte-stable.

use std::path::{Path, PathBuf};

use clap::Args as ClapArgs;

use crate::errors::CliError;
use crate::manifest::{Manifest, ReportManifest, MANIFEST_NAME, MANIFEST_VERSION};
use crate::outdir::{read_file, OutDir};
use crate::svg::{plot, Series};

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Run directories produced by `hopt hopt`
    pub runs: Vec<PathBuf>,
    /// Replay a stored manifest instead of flags
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// One run's stored artifacts, parsed just enough to plot.
struct RunArtifacts {
    name: String,
    /// Rows of (evaluation, best_rmse, best_mxae, hypervolume), kept as
    /// text cells so consolidated CSVs copy bytes verbatim.
    trace: Vec<[String; 4]>,
    front: Vec<(f64, f64)>,
    archive: Vec<(f64, f64)>,
}

pub fn run(resolved: &crate::config::Resolved, args: &Args) -> Result<(), CliError> {
    let manifest = match &args.manifest {
        Some(path) => {
            resolved.reject_flags_with_manifest(args.runs.is_empty())?;
            match Manifest::load(path)? {
                Manifest::Report(m) => m,
                other => {
                    return Err(CliError::Config(format!(
                        "{} is a {} manifest, not report",
                        path.display(),
                        other.command_name()
                    )))
                }
            }
        }
        None => {
            if args.runs.is_empty() {
                return Err(CliError::Config(
                    "no run directories given; pass one or more".into(),
                ));
            }
            ReportManifest { format_version: MANIFEST_VERSION, runs: args.runs.clone() }
        }
    };

    let dir = OutDir::create(&resolved.out)?;
    Manifest::Report(manifest.clone()).save(dir.path())?;

    let mut traces_csv = String::from("run,evaluation,best_rmse,best_mxae,hypervolume\n");
    let mut fronts_csv = String::from("run,mean_rmse,mean_mxae\n");
    let mut succeeded = 0usize;
    for run_dir in &manifest.runs {
        let arts = match load_run(run_dir) {
            Ok(arts) => arts,
            Err(e) => {
                eprintln!("skipping {}: {e}", run_dir.display());
                continue;
            }
        };
        emit_run(&dir, &arts)?;
        for row in &arts.trace {
            traces_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                arts.name, row[0], row[1], row[2], row[3]
            ));
        }
        for &(r, m) in &arts.front {
            fronts_csv.push_str(&format!(
                "{},{},{}\n",
                arts.name,
                hopt_core::util::fmt_f64(r),
                hopt_core::util::fmt_f64(m)
            ));
        }
        succeeded += 1;
    }
    if succeeded == 0 {
        return Err(CliError::Data("no run directory could be reported".into()));
    }
    dir.write("traces.csv", &traces_csv)?;
    dir.write("fronts.csv", &fronts_csv)?;
    println!(
        "reported {succeeded} of {} runs into {}",
        manifest.runs.len(),
        dir.path().display()
    );
    Ok(())
}

fn load_run(run_dir: &Path) -> Result<RunArtifacts, CliError> {
    let manifest = Manifest::load(&run_dir.join(MANIFEST_NAME))?;
    if !matches!(manifest, Manifest::Hopt(_)) {
        return Err(CliError::Data(format!(
            "{} holds a {} manifest; only hopt runs can be reported",
            run_dir.display(),
            manifest.command_name()
        )));
    }
    let name = run_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());

    let trace_text = read_file(&run_dir.join("trace.csv"))?;
    let trace = parse_trace(&trace_text, run_dir)?;
    let front = parse_losses(&read_file(&run_dir.join("front.csv"))?, run_dir)?;
    let archive = parse_losses(&read_file(&run_dir.join("archive.csv"))?, run_dir)?;
    Ok(RunArtifacts { name, trace, front, archive })
}

fn parse_trace(text: &str, run_dir: &Path) -> Result<Vec<[String; 4]>, CliError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != "evaluation,best_rmse,best_mxae,hypervolume" {
        return Err(CliError::Data(format!(
            "{}: trace.csv has an unexpected header",
            run_dir.display()
        )));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 4 {
                return Err(CliError::Data(format!(
                    "{}: trace.csv line {}: expected 4 cells",
                    run_dir.display(),
                    i + 2
                )));
            }
            Ok([
                cells[0].to_string(),
                cells[1].to_string(),
                cells[2].to_string(),
                cells[3].to_string(),
            ])
        })
        .collect()
}

/// Pulls the two mean-loss columns out of an archive-layout CSV.
fn parse_losses(text: &str, run_dir: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| {
            CliError::Data(format!("{}: no `{name}` column", run_dir.display()))
        })
    };
    let (rmse_col, mxae_col) = (col("mean_rmse")?, col("mean_mxae")?);
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            let cell = |c: usize| -> Result<f64, CliError> {
                cells.get(c).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: line {}: bad loss cell",
                        run_dir.display(),
                        i + 2
                    ))
                })
            };
            Ok((cell(rmse_col)?, cell(mxae_col)?))
        })
        .collect()
}

fn emit_run(dir: &OutDir, arts: &RunArtifacts) -> Result<(), CliError> {
    let parse = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
    let rmse_curve: Vec<(f64, f64)> =
        arts.trace.iter().map(|r| (parse(&r[0]), parse(&r[1]))).collect();
    let mxae_curve: Vec<(f64, f64)> =
        arts.trace.iter().map(|r| (parse(&r[0]), parse(&r[2]))).collect();
    let trace_svg = plot(
        &format!("{} convergence", arts.name),
        "evaluation",
        "best loss",
        &[
            Series { label: "best rmse", color: "#c0392b", points: &rmse_curve, line: true, markers: false },
            Series { label: "best mxae", color: "#2c5aa0", points: &mxae_curve, line: true, markers: false },
        ],
    );
    dir.write(&format!("{}-trace.svg", arts.name), &trace_svg)?;

    let front_svg = plot(
        &format!("{} archive and front", arts.name),
        "mean rmse",
        "mean mxae",
        &[
            Series { label: "archive", color: "#b0b0b0", points: &arts.archive, line: false, markers: true },
            Series { label: "front", color: "#c0392b", points: &arts.front, line: false, markers: true },
        ],
    );
    dir.write(&format!("{}-front.svg", arts.name), &front_svg)
}
