//! Flag groups shared between subcommands and the layered config file.
//!
//! Every effective setting is resolved in the same order: built-in default,
//! then the `--config` TOML file, then the explicit command-line flag.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use hopt_core::smbo::{SelectStrategy, SmboConfig};
use hopt_core::LearnerKind;

use crate::errors::CliError;
use crate::manifest::DatasetSource;

/// Optimizer-loop settings; omitted fields fall through to the config file
/// and then to the built-in defaults.
#[derive(Debug, Default, Clone, Args)]
pub struct SmboFlags {
    /// Initial space-filling evaluations
    #[arg(long)]
    pub n_initial: Option<usize>,
    /// Total evaluation budget (initial + guided)
    #[arg(long)]
    pub n_total: Option<usize>,
    /// Window shrink ratio per inner iteration, in (0, 0.5]
    #[arg(long)]
    pub r_p: Option<f64>,
    /// Inner shrinking iterations per restart
    #[arg(long)]
    pub n_ii: Option<usize>,
    /// Independent acquisition restarts
    #[arg(long)]
    pub n_re: Option<usize>,
    /// Candidate samples per inner iteration
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Exploration weight for the confidence bound (default: 1 for numeric
    /// spaces, 2 for mixed ones)
    #[arg(long)]
    pub phi: Option<f64>,
}

impl SmboFlags {
    pub fn is_empty(&self) -> bool {
        self.n_initial.is_none()
            && self.n_total.is_none()
            && self.r_p.is_none()
            && self.n_ii.is_none()
            && self.n_re.is_none()
            && self.candidates.is_none()
            && self.folds.is_none()
            && self.phi.is_none()
    }

    fn apply(&self, cfg: &mut SmboConfig) {
        if let Some(v) = self.n_initial {
            cfg.n_initial = v;
        }
        if let Some(v) = self.n_total {
            cfg.n_total = v;
        }
        if let Some(v) = self.r_p {
            cfg.r_p = v;
        }
        if let Some(v) = self.n_ii {
            cfg.n_ii = v;
        }
        if let Some(v) = self.n_re {
            cfg.n_re = v;
        }
        if let Some(v) = self.candidates {
            cfg.candidates_per_iter = v;
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.phi {
            cfg.phi = Some(v);
        }
    }
}

/// Where the training data comes from: an existing CSV or a built-in
/// generator.
#[derive(Debug, Default, Clone, Args)]
pub struct DataFlags {
    /// Dataset CSV (reads `<stem>.meta.json` alongside it when present)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Built-in generator: tbpt, smooth, mixed or discontinuous
    #[arg(long)]
    pub problem: Option<String>,
    /// Rows to generate
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian response noise for the synthetic families
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Seed for the generated dataset (defaults to the run seed)
    #[arg(long)]
    pub data_seed: Option<u64>,
}

impl DataFlags {
    pub fn is_empty(&self) -> bool {
        self.data.is_none()
            && self.problem.is_none()
            && self.n.is_none()
            && self.noise_sd.is_none()
            && self.data_seed.is_none()
    }

    pub fn to_source(&self, default_seed: u64) -> Result<DatasetSource, CliError> {
        match (&self.data, &self.problem) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "--data and --problem both given; pick one dataset source".into(),
            )),
            (Some(path), None) => {
                if self.n.is_some() || self.noise_sd.is_some() || self.data_seed.is_some() {
                    return Err(CliError::Config(
                        "--n/--noise-sd/--data-seed only apply to --problem generators".into(),
                    ));
                }
                DatasetSource::from_file(path)
            }
            (None, Some(problem)) => {
                let n = self.n.ok_or_else(|| {
                    CliError::Config("--problem needs --n (rows to generate)".into())
                })?;
                DatasetSource::generated(
                    problem,
                    n,
                    self.noise_sd.unwrap_or(0.0),
                    self.data_seed.unwrap_or(default_seed),
                )
            }
            (None, None) => Err(CliError::Config(
                "no dataset: pass --data <csv> or --problem <name> --n <rows>".into(),
            )),
        }
    }
}

/// The `--config` file. Sections override built-in defaults and are in turn
/// overridden by explicit flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub smbo: SmboSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmboSection {
    pub n_initial: Option<usize>,
    pub n_total: Option<usize>,
    pub r_p: Option<f64>,
    pub n_ii: Option<usize>,
    pub n_re: Option<usize>,
    pub candidates: Option<usize>,
    pub folds: Option<usize>,
    pub phi: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub learner: Option<String>,
    pub select: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    fn apply_smbo(&self, cfg: &mut SmboConfig) {
        let s = &self.smbo;
        if let Some(v) = s.n_initial {
            cfg.n_initial = v;
        }
        if let Some(v) = s.n_total {
            cfg.n_total = v;
        }
        if let Some(v) = s.r_p {
            cfg.r_p = v;
        }
        if let Some(v) = s.n_ii {
            cfg.n_ii = v;
        }
        if let Some(v) = s.n_re {
            cfg.n_re = v;
        }
        if let Some(v) = s.candidates {
            cfg.candidates_per_iter = v;
        }
        if let Some(v) = s.folds {
            cfg.folds = v;
        }
        if let Some(v) = s.phi {
            cfg.phi = Some(v);
        }
    }
}

/// Global settings after the default/file/flag layering.
pub struct Resolved {
    pub seed: u64,
    pub out: PathBuf,
    pub file: FileConfig,
    /// True when `--seed` or `--config` appeared on the command line; both
    /// conflict with `--manifest` replay, which carries its own settings.
    pub settings_given: bool,
}

impl Resolved {
    pub fn smbo_config(&self, flags: &SmboFlags) -> Result<SmboConfig, CliError> {
        let mut cfg = SmboConfig::default();
        self.file.apply_smbo(&mut cfg);
        flags.apply(&mut cfg);
        cfg.seed = self.seed;
        cfg.validate().map_err(CliError::config)?;
        Ok(cfg)
    }

    pub fn learner(&self, flag: Option<LearnerKind>) -> Result<LearnerKind, CliError> {
        if let Some(kind) = flag {
            return Ok(kind);
        }
        match &self.file.run.learner {
            Some(name) => name.parse().map_err(CliError::config),
            None => Err(CliError::Config(
                "no learner: pass --learner (gpr, svr, rfr or ann)".into(),
            )),
        }
    }

    pub fn select(&self, flag: Option<SelectStrategy>) -> Result<SelectStrategy, CliError> {
        if let Some(strategy) = flag {
            return Ok(strategy);
        }
        match &self.file.run.select {
            Some(name) => name.parse().map_err(CliError::config),
            None => Ok(SelectStrategy::Knee),
        }
    }

    /// Guards replay: a manifest fixes every setting, so flag-style
    /// configuration alongside it is a contradiction.
    pub fn reject_flags_with_manifest(&self, others_empty: bool) -> Result<(), CliError> {
        if self.settings_given || !others_empty {
            return Err(CliError::Config(
                "--manifest replays a stored run; it cannot be combined with other \
                 configuration flags"
                    .into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(file: FileConfig) -> Resolved {
        Resolved { seed: 5, out: PathBuf::from("o"), file, settings_given: false }
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let file: FileConfig =
            toml::from_str("[smbo]\nn_initial = 4\nn_total = 9\n[run]\nlearner = \"svr\"\n")
                .unwrap();
        let r = resolved(file);
        let flags = SmboFlags { n_total: Some(11), folds: Some(3), ..Default::default() };
        let cfg = r.smbo_config(&flags).unwrap();
        assert_eq!(cfg.n_initial, 4);
        assert_eq!(cfg.n_total, 11);
        assert_eq!(cfg.folds, 3);
        assert_eq!(cfg.r_p, 0.25);
        assert_eq!(cfg.seed, 5);
        assert_eq!(r.learner(None).unwrap(), LearnerKind::Svr);
        assert_eq!(r.learner(Some(LearnerKind::Ann)).unwrap(), LearnerKind::Ann);
    }

    #[test]
    fn bad_layered_values_are_config_errors() {
        let r = resolved(FileConfig::default());
        let flags = SmboFlags { n_total: Some(1), ..Default::default() };
        let err = r.smbo_config(&flags).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(r.learner(None).is_err());
        let file: FileConfig = toml::from_str("[run]\nselect = \"nope\"\n").unwrap();
        assert!(resolved(file).select(None).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("[smbo]\nn_totall = 3\n");
        assert!(err.is_err());
    }

    #[test]
    fn dataset_flags_resolve_to_one_source() {
        let gen = DataFlags {
            problem: Some("smooth".into()),
            n: Some(40),
            ..Default::default()
        };
        match gen.to_source(9).unwrap() {
            DatasetSource::Generated { problem, n, noise_sd, seed } => {
                assert_eq!(problem, "smooth");
                assert_eq!(n, 40);
                assert_eq!(noise_sd, 0.0);
                assert_eq!(seed, 9);
            }
            other => panic!("unexpected source {other:?}"),
        }
        assert!(DataFlags::default().to_source(0).is_err());
        let both = DataFlags {
            data: Some(PathBuf::from("x.csv")),
            problem: Some("tbpt".into()),
            ..Default::default()
        };
        assert_eq!(both.to_source(0).unwrap_err().exit_code(), 2);
    }
}
