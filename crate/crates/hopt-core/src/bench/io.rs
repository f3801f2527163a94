//! Dataset files: a CSV of normalized values plus a JSON sidecar carrying
//! everything the matrix alone cannot (scalers, feasibility flags, seed).
//!
//! The CSV holds the named feature columns followed by one response
//! column, all min-max normalized and printed with 17 significant digits,
//! so write-read-write is byte-identical. The sidecar lives next to the
//! CSV as `<stem>.meta.json`. A CSV without a sidecar is accepted when its
//! values are already in `[0, 1]`; it gets identity scalers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::eval::Dataset;
use crate::space::Normalizer;
use crate::util::{fmt_f64, parse_f64};

/// Sidecar payload: dataset fields that are not part of the value matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DatasetMeta {
    name: String,
    seed: u64,
    response_name: String,
    x_scaler: Normalizer,
    y_scaler: Normalizer,
    feasible: Vec<bool>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(&data.feature_names.join(","));
    out.push(',');
    out.push_str(&data.response_name);
    out.push('\n');
    for (row, y) in data.xs.iter().zip(&data.ys) {
        for v in row {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(*y));
        out.push('\n');
    }
    out
}

/// Writes `<path>` (CSV) and `<stem>.meta.json` (sidecar).
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), BenchError> {
    data.validate()
        .map_err(|e| BenchError::Request(format!("refusing to write an invalid dataset: {e}")))?;
    fs::write(path, dataset_to_csv(data)).map_err(io_err(path))?;
    let meta = DatasetMeta {
        name: data.name.clone(),
        seed: data.seed,
        response_name: data.response_name.clone(),
        x_scaler: data.x_scaler.clone(),
        y_scaler: data.y_scaler.clone(),
        feasible: data.feasible.clone(),
    };
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    text.push('\n');
    fs::write(&side, text).map_err(io_err(&side))?;
    Ok(())
}

/// Reads a dataset CSV, honoring its sidecar when present.
pub fn read_dataset(path: &Path) -> Result<Dataset, BenchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let meta = {
        let side = sidecar_path(path);
        if side.exists() {
            let raw = fs::read_to_string(&side).map_err(io_err(&side))?;
            Some(serde_json::from_str::<DatasetMeta>(&raw).map_err(|e| BenchError::Parse {
                path: side.clone(),
                line: e.line(),
                message: e.to_string(),
            })?)
        } else {
            None
        }
    };
    parse_dataset_csv(path, &text, meta)
}

fn parse_dataset_csv(
    path: &Path,
    text: &str,
    meta: Option<DatasetMeta>,
) -> Result<Dataset, BenchError> {
    let parse_err = |line: usize, message: String| BenchError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected a header row".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 {
        return Err(parse_err(
            1,
            format!("need at least one feature and one response column, found {}", columns.len()),
        ));
    }
    if let Some(meta) = &meta {
        if columns.last() != Some(&meta.response_name.as_str()) {
            return Err(parse_err(
                1,
                format!(
                    "missing response column `{}` (the sidecar names it; the last column is `{}`)",
                    meta.response_name,
                    columns.last().unwrap()
                ),
            ));
        }
    }
    let d = columns.len() - 1;

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(parse_err(
                idx + 1,
                format!("expected {} columns, found {}", columns.len(), cells.len()),
            ));
        }
        let mut row = Vec::with_capacity(d + 1);
        for (cell, col) in cells.iter().zip(&columns) {
            let v = parse_f64(cell).map_err(|e| {
                parse_err(idx + 1, format!("column `{col}`: bad number `{cell}`: {e}"))
            })?;
            if meta.is_none() && !(0.0..=1.0).contains(&v) {
                return Err(parse_err(
                    idx + 1,
                    format!(
                        "column `{col}`: value {v} is outside [0, 1] and no normalizer \
                         sidecar is present"
                    ),
                ));
            }
            row.push(v);
        }
        ys.push(row.pop().expect("row has d+1 cells"));
        xs.push(row);
    }
    if xs.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }

    let n = xs.len();
    let data = match meta {
        Some(meta) => {
            if meta.feasible.len() != n {
                return Err(parse_err(
                    1,
                    format!(
                        "sidecar carries {} feasibility flags for {} rows",
                        meta.feasible.len(),
                        n
                    ),
                ));
            }
            Dataset {
                name: meta.name,
                feature_names: columns[..d].iter().map(|s| s.to_string()).collect(),
                response_name: meta.response_name,
                xs,
                ys,
                x_scaler: meta.x_scaler,
                y_scaler: meta.y_scaler,
                feasible: meta.feasible,
                seed: meta.seed,
            }
        }
        None => Dataset {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
            feature_names: columns[..d].iter().map(|s| s.to_string()).collect(),
            response_name: columns[d].to_string(),
            xs,
            ys,
            x_scaler: Normalizer::from_bounds(vec![0.0; d], vec![1.0; d])
                .expect("unit bounds are valid"),
            y_scaler: Normalizer::from_bounds(vec![0.0], vec![1.0])
                .expect("unit bounds are valid"),
            feasible: vec![true; n],
            seed: 0,
        },
    };
    data.validate()
        .map_err(|e| BenchError::Request(format!("{}: {e}", path.display())))?;
    Ok(data)
}
