//! Run configuration: command-line flags over an optional TOML file over
//! the environment over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::UsageError;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "SURFMAPS_SEED";
/// Seed used when neither a flag, the config file nor the environment sets one.
pub const DEFAULT_SEED: u64 = 20261016;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Keys of the config file; same names as the long flags.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub max_g: Option<usize>,
    pub order: Option<usize>,
    pub edges: Option<usize>,
    pub genus: Option<u32>,
    pub max_edges: Option<usize>,
    pub genus_target: Option<u32>,
    pub faces: Option<usize>,
    pub trials: Option<usize>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv_per_trial: Option<PathBuf>,
    pub dump_terms: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// Options shared by every subcommand after merging.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    /// `None` leaves the choice to the subcommand.
    pub format: Option<Format>,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(
        flag_seed: Option<u64>,
        flag_threads: Option<usize>,
        flag_format: Option<Format>,
        file: FileConfig,
        env_seed: Option<String>,
    ) -> Result<Self, UsageError> {
        let env_seed = match env_seed {
            Some(s) => Some(
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| UsageError(format!("{SEED_ENV}={s} is not a 64-bit unsigned integer")))?,
            ),
            None => None,
        };
        let threads = flag_threads
            .or(file.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if threads == 0 {
            return Err(UsageError("threads must be positive".into()));
        }
        Ok(RunConfig {
            seed: flag_seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED),
            threads,
            format: flag_format.or(file.format),
            file,
        })
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Flag value, else config value, else a usage error naming the flag.
pub fn required<T: Clone>(flag: Option<T>, file: &Option<T>, name: &str) -> Result<T, UsageError> {
    flag.or_else(|| file.clone())
        .ok_or_else(|| UsageError(format!("missing --{name} (flag or config key `{name}`)")))
}
