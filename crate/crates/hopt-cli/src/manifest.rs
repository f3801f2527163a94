//! Run manifests: every command writes a `manifest.json` capturing its
//! resolved settings, and every command can be re-run from one with
//! `--manifest`, reproducing all deterministic outputs byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hopt_core::bench::{generate_tbpt_dataset, synthetic_dataset, SyntheticFamily};
use hopt_core::eval::Dataset;
use hopt_core::smbo::{SelectStrategy, SmboConfig};
use hopt_core::LearnerKind;

use crate::errors::{from_bench, CliError};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

/// Where a dataset comes from. Files are pinned by content hash so a
/// replay on changed data fails loudly instead of "reproducing" quietly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    File { path: PathBuf, sha256: String },
    Generated { problem: String, n: usize, noise_sd: f64, seed: u64 },
}

impl DatasetSource {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let path = path
            .canonicalize()
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        Ok(DatasetSource::File { path, sha256: sha256_hex(&bytes) })
    }

    pub fn generated(problem: &str, n: usize, noise_sd: f64, seed: u64) -> Result<Self, CliError> {
        if problem != "tbpt" {
            // Fail now, with the list of names, rather than mid-run.
            problem
                .parse::<SyntheticFamily>()
                .map_err(from_bench)?;
        }
        Ok(DatasetSource::Generated { problem: problem.to_string(), n, noise_sd, seed })
    }

    /// Loads or regenerates the dataset this source describes.
    pub fn resolve(&self) -> Result<Dataset, CliError> {
        match self {
            DatasetSource::File { path, sha256 } => {
                let bytes = fs::read(path)
                    .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
                let found = sha256_hex(&bytes);
                if &found != sha256 {
                    return Err(CliError::data(format!(
                        "{}: content hash {found} does not match the manifest's {sha256}; \
                         the file changed since the manifest was written",
                        path.display()
                    )));
                }
                hopt_core::bench::read_dataset(path).map_err(from_bench)
            }
            DatasetSource::Generated { problem, n, noise_sd, seed } => {
                generate_named(problem, *n, *noise_sd, *seed)
            }
        }
    }
}

pub fn generate_named(
    problem: &str,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset, CliError> {
    if problem == "tbpt" {
        if noise_sd != 0.0 {
            return Err(CliError::Config(
                "the tbpt problem is deterministic; --noise-sd only applies to \
                 synthetic families"
                    .into(),
            ));
        }
        return generate_tbpt_dataset(n, seed).map_err(from_bench);
    }
    let family: SyntheticFamily = problem.parse().map_err(from_bench)?;
    synthetic_dataset(family, n, noise_sd, seed).map_err(from_bench)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Manifest {
    GenData(GenDataManifest),
    Hopt(HoptManifest),
    Compare(CompareManifest),
    Sweep(SweepManifest),
    Report(ReportManifest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenDataManifest {
    pub format_version: u32,
    pub problem: String,
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// CSV file name inside the output directory.
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoptManifest {
    pub format_version: u32,
    pub learner: LearnerKind,
    pub dataset: DatasetSource,
    /// Custom design space as inline TOML; `None` means the learner's
    /// preset space.
    pub space_toml: Option<String>,
    pub smbo: SmboConfig,
    pub select: SelectStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareManifest {
    pub format_version: u32,
    pub learner: LearnerKind,
    pub problem: String,
    pub n: usize,
    pub noise_sd: f64,
    pub data_seed: u64,
    pub test_n: usize,
    pub trials: usize,
    pub smbo: SmboConfig,
    pub select: SelectStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub format_version: u32,
    pub learner: LearnerKind,
    pub dataset: DatasetSource,
    pub sweeps: Vec<SweepAxis>,
    /// `name=value` overrides applied to the baseline point.
    pub fixes: Vec<String>,
    pub folds: usize,
    pub max_grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: String,
    pub grid: usize,
    pub log_scale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportManifest {
    pub format_version: u32,
    pub runs: Vec<PathBuf>,
}

impl Manifest {
    pub fn command_name(&self) -> &'static str {
        match self {
            Manifest::GenData(_) => "gen-data",
            Manifest::Hopt(_) => "hopt",
            Manifest::Compare(_) => "compare",
            Manifest::Sweep(_) => "sweep",
            Manifest::Report(_) => "report",
        }
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)
            .expect("manifests always serialize");
        text.push('\n');
        fs::write(&path, text)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let version = match &manifest {
            Manifest::GenData(m) => m.format_version,
            Manifest::Hopt(m) => m.format_version,
            Manifest::Compare(m) => m.format_version,
            Manifest::Sweep(m) => m.format_version,
            Manifest::Report(m) => m.format_version,
        };
        if version != MANIFEST_VERSION {
            return Err(CliError::data(format!(
                "{}: manifest format {version} is not supported (expected {MANIFEST_VERSION})",
                path.display()
            )));
        }
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
