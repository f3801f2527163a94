//! `hopt gen-data`: generate a benchmark dataset and write it, with its
//! normalizer sidecar and a replayable manifest, into the output directory.

use std::path::PathBuf;

use clap::Args as ClapArgs;

use hopt_core::bench::write_dataset;

use crate::config::Resolved;
use crate::errors::{from_bench, CliError};
use crate::manifest::{generate_named, GenDataManifest, Manifest, MANIFEST_VERSION};
use crate::outdir::OutDir;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Problem to generate: tbpt, smooth, mixed or discontinuous
    #[arg(long)]
    pub problem: Option<String>,
    /// Rows to generate
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian response noise for the synthetic families
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    /// Replay a stored manifest instead of flags
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn run(resolved: &Resolved, args: &Args) -> Result<(), CliError> {
    let manifest = match &args.manifest {
        Some(path) => {
            resolved.reject_flags_with_manifest(
                args.problem.is_none() && args.n.is_none() && args.noise_sd == 0.0,
            )?;
            match Manifest::load(path)? {
                Manifest::GenData(m) => m,
                other => {
                    return Err(CliError::Config(format!(
                        "{} is a {} manifest, not gen-data",
                        path.display(),
                        other.command_name()
                    )))
                }
            }
        }
        None => {
            let problem = args
                .problem
                .clone()
                .ok_or_else(|| CliError::Config("--problem is required".into()))?;
            let n = args
                .n
                .ok_or_else(|| CliError::Config("--n is required".into()))?;
            GenDataManifest {
                format_version: MANIFEST_VERSION,
                problem: problem.clone(),
                n,
                noise_sd: args.noise_sd,
                seed: resolved.seed,
                output: format!("{problem}.csv"),
            }
        }
    };

    let data = generate_named(&manifest.problem, manifest.n, manifest.noise_sd, manifest.seed)?;
    let dir = OutDir::create(&resolved.out)?;
    let csv_path = dir.join(&manifest.output);
    write_dataset(&csv_path, &data).map_err(from_bench)?;
    Manifest::GenData(manifest.clone()).save(dir.path())?;
    println!(
        "wrote {} ({} rows, {} features, seed {})",
        csv_path.display(),
        data.n(),
        data.d(),
        manifest.seed
    );
    Ok(())
}
