//! `hopt sweep`: cross-validated losses over a full-factorial grid of one
//! or two hyperparameters, everything else pinned, for parameter-influence
//! plots.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use rayon::prelude::*;

use hopt_core::eval::{cross_validate, eval_records_csv, EvalRecord};
use hopt_core::space::{baseline_initial, space_for};
use hopt_core::{DesignSpace, HpPoint, LearnerKind, ParamKind, ParamValue};

use crate::config::{DataFlags, Resolved};
use crate::errors::CliError;
use crate::manifest::{Manifest, SweepAxis, SweepManifest, MANIFEST_VERSION};
use crate::outdir::OutDir;

const DEFAULT_GRID: usize = 20;
const DEFAULT_MAX_GRID: usize = 10_000;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Learner whose space is swept: gpr, svr, rfr or ann
    #[arg(long)]
    pub learner: Option<LearnerKind>,
    #[command(flatten)]
    pub data: DataFlags,
    /// Swept parameter as `name[:points][:log]`; give once or twice
    #[arg(long = "sweep", value_parser = parse_axis)]
    pub sweeps: Vec<SweepAxis>,
    /// Pin a parameter as `name=value`; repeatable
    #[arg(long = "fix")]
    pub fixes: Vec<String>,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Refuse grids larger than this
    #[arg(long)]
    pub max_grid: Option<usize>,
    /// Replay a stored manifest instead of flags
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    let mut parts = s.split(':');
    let param = parts.next().unwrap_or("").to_string();
    if param.is_empty() {
        return Err("expected `name[:points][:log]`".into());
    }
    let mut axis = SweepAxis { param, grid: DEFAULT_GRID, log_scale: false };
    for part in parts {
        if part == "log" {
            axis.log_scale = true;
        } else {
            axis.grid = part
                .parse()
                .map_err(|_| format!("`{part}` is neither a point count nor `log`"))?;
            if axis.grid == 0 {
                return Err("a sweep needs at least one grid point".into());
            }
        }
    }
    Ok(axis)
}

pub fn run(resolved: &Resolved, args: &Args) -> Result<(), CliError> {
    let manifest = match &args.manifest {
        Some(path) => {
            resolved.reject_flags_with_manifest(
                args.learner.is_none()
                    && args.data.is_empty()
                    && args.sweeps.is_empty()
                    && args.fixes.is_empty()
                    && args.folds.is_none()
                    && args.max_grid.is_none(),
            )?;
            match Manifest::load(path)? {
                Manifest::Sweep(m) => m,
                other => {
                    return Err(CliError::Config(format!(
                        "{} is a {} manifest, not sweep",
                        path.display(),
                        other.command_name()
                    )))
                }
            }
        }
        None => {
            if args.sweeps.is_empty() || args.sweeps.len() > 2 {
                return Err(CliError::Config(
                    "pass --sweep once or twice (one or two swept parameters)".into(),
                ));
            }
            SweepManifest {
                format_version: MANIFEST_VERSION,
                learner: resolved.learner(args.learner)?,
                dataset: args.data.to_source(resolved.seed)?,
                sweeps: args.sweeps.clone(),
                fixes: args.fixes.clone(),
                folds: args.folds.or(resolved.file.smbo.folds).unwrap_or(5),
                max_grid: args.max_grid.unwrap_or(DEFAULT_MAX_GRID),
            }
        }
    };

    let space = space_for(manifest.learner);
    let mut base = baseline_initial(manifest.learner);
    for fix in &manifest.fixes {
        let (name, value) = parse_fix(&space, fix)?;
        base.set(&name, value);
    }

    let axes: Vec<(String, Vec<ParamValue>)> = manifest
        .sweeps
        .iter()
        .map(|axis| Ok((axis.param.clone(), axis_values(&space, axis)?)))
        .collect::<Result<_, CliError>>()?;
    let rows: usize = axes.iter().map(|(_, v)| v.len()).product();
    if rows > manifest.max_grid {
        return Err(CliError::Config(format!(
            "grid of {rows} points exceeds the cap of {} (raise --max-grid to override)",
            manifest.max_grid
        )));
    }

    let points: Vec<HpPoint> = grid_points(&base, &axes);
    let data = manifest.dataset.resolve()?;
    let records: Vec<EvalRecord> = points
        .par_iter()
        .map(|point| cross_validate(&data, manifest.learner, point, manifest.folds))
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?;

    let dir = OutDir::create(&resolved.out)?;
    Manifest::Sweep(manifest.clone()).save(dir.path())?;
    dir.write("sweep.csv", &eval_records_csv(&space, &records, false))?;
    println!(
        "swept {} over {rows} grid points ({} folds each); outputs in {}",
        axes.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" x "),
        manifest.folds,
        dir.path().display()
    );
    Ok(())
}

/// `name=value`, with the value read in the parameter's own type.
fn parse_fix(space: &DesignSpace, fix: &str) -> Result<(String, ParamValue), CliError> {
    let Some((name, value)) = fix.split_once('=') else {
        return Err(CliError::Config(format!("--fix `{fix}`: expected name=value")));
    };
    let spec = space
        .get(name)
        .ok_or_else(|| CliError::Config(format!("--fix `{fix}`: no parameter `{name}`")))?;
    let value = match &spec.kind {
        ParamKind::Continuous { .. } => ParamValue::Real(
            value
                .parse()
                .map_err(|_| CliError::Config(format!("--fix `{fix}`: `{value}` is not a number")))?,
        ),
        ParamKind::Integer { .. } => ParamValue::Int(value.parse().map_err(|_| {
            CliError::Config(format!("--fix `{fix}`: `{value}` is not an integer"))
        })?),
        ParamKind::Categorical { categories } => {
            if !categories.iter().any(|c| c == value) {
                return Err(CliError::Config(format!(
                    "--fix `{fix}`: `{value}` is not one of {}",
                    categories.join(", ")
                )));
            }
            ParamValue::Cat(value.to_string())
        }
    };
    Ok((name.to_string(), value))
}

/// Grid values along one axis: evenly spaced over the parameter's range
/// (log-spaced on request), or every category.
fn axis_values(space: &DesignSpace, axis: &SweepAxis) -> Result<Vec<ParamValue>, CliError> {
    let spec = space.get(&axis.param).ok_or_else(|| {
        CliError::Config(format!("swept parameter `{}` is not in the space", axis.param))
    })?;
    let spaced = |lo: f64, hi: f64, k: usize, log: bool| -> Result<Vec<f64>, CliError> {
        if log && lo <= 0.0 {
            return Err(CliError::Config(format!(
                "`{}`: a log-scaled sweep needs a positive lower bound, got {lo}",
                axis.param
            )));
        }
        Ok((0..k)
            .map(|i| {
                let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                if log {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect())
    };
    Ok(match &spec.kind {
        ParamKind::Continuous { lower, upper } => spaced(*lower, *upper, axis.grid, axis.log_scale)?
            .into_iter()
            .map(ParamValue::Real)
            .collect(),
        ParamKind::Integer { lower, upper } => {
            let mut values: Vec<i64> = spaced(*lower as f64, *upper as f64, axis.grid, axis.log_scale)?
                .into_iter()
                .map(|v| (v.round() as i64).clamp(*lower, *upper))
                .collect();
            values.dedup();
            values.into_iter().map(ParamValue::Int).collect()
        }
        ParamKind::Categorical { categories } => {
            if axis.log_scale {
                return Err(CliError::Config(format!(
                    "`{}` is categorical; log scaling does not apply",
                    axis.param
                )));
            }
            categories.iter().map(|c| ParamValue::Cat(c.clone())).collect()
        }
    })
}

/// Cartesian product in axis-major order: the first axis varies slowest.
fn grid_points(base: &HpPoint, axes: &[(String, Vec<ParamValue>)]) -> Vec<HpPoint> {
    let mut points = vec![base.clone()];
    for (name, values) in axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for point in &points {
            for value in values {
                let mut p = point.clone();
                p.set(name, value.clone());
                next.push(p);
            }
        }
        points = next;
    }
    points
}
