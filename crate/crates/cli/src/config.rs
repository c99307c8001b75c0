//! Workspace configuration.
//!
//! Resolution order, later wins: built-in defaults, the optional TOML
//! config file, `ADVTAX_DATA_DIR`, the `--data-dir` flag. File paths that
//! are relative resolve against the data directory.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DATA_DIR_ENV: &str = "ADVTAX_DATA_DIR";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:7878";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkspaceConfig {
    pub data_dir: PathBuf,
    pub taxonomy_file: PathBuf,
    pub annotation_log: PathBuf,
    pub lexicon_file: PathBuf,
    pub reports_file: PathBuf,
    pub listen_address: SocketAddr,
    pub gold_annotator: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data_dir: Option<PathBuf>,
    taxonomy_file: Option<PathBuf>,
    annotation_log: Option<PathBuf>,
    lexicon_file: Option<PathBuf>,
    reports_file: Option<PathBuf>,
    listen_address: Option<String>,
    gold_annotator: Option<String>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("listen address `{0}` is not host:port with a numeric host")]
    BadListenAddress(String),
    #[error("data directory {0} does not exist")]
    MissingDataDir(String),
    #[error("gold annotator must not be empty")]
    EmptyGoldAnnotator,
}

impl WorkspaceConfig {
    /// Default file names inside `data_dir`.
    pub fn for_data_dir(data_dir: impl Into<PathBuf>) -> Self {
        let data_dir = data_dir.into();
        Self {
            taxonomy_file: data_dir.join("taxonomy.json"),
            annotation_log: data_dir.join("annotations.ndjson"),
            lexicon_file: data_dir.join("lexicon.toml"),
            reports_file: data_dir.join("reports.csv"),
            listen_address: DEFAULT_LISTEN.parse().expect("default address parses"),
            gold_annotator: advtax_core::fixtures::GOLD_ANNOTATOR.to_string(),
            data_dir,
        }
    }

    pub fn resolve(
        config_file: Option<&Path>,
        env_data_dir: Option<PathBuf>,
        flag_data_dir: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let file = match config_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
                    path: path.display().to_string(),
                    source,
                })?;
                toml::from_str::<ConfigFile>(&text).map_err(|e| ConfigError::Parse {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?
            }
            None => ConfigFile::default(),
        };
        let data_dir = flag_data_dir
            .or(env_data_dir.filter(|p| !p.as_os_str().is_empty()))
            .or(file.data_dir)
            .unwrap_or_else(|| PathBuf::from("."));
        let mut config = Self::for_data_dir(&data_dir);
        let place = |p: PathBuf| if p.is_absolute() { p } else { data_dir.join(p) };
        if let Some(p) = file.taxonomy_file {
            config.taxonomy_file = place(p);
        }
        if let Some(p) = file.annotation_log {
            config.annotation_log = place(p);
        }
        if let Some(p) = file.lexicon_file {
            config.lexicon_file = place(p);
        }
        if let Some(p) = file.reports_file {
            config.reports_file = place(p);
        }
        if let Some(a) = file.listen_address {
            config.listen_address = parse_listen(&a)?;
        }
        if let Some(g) = file.gold_annotator {
            config.gold_annotator = g;
        }
        Ok(config)
    }

    /// Startup checks: the data directory exists and the gold annotator is set.
    pub fn check(&self) -> Result<(), ConfigError> {
        if !self.data_dir.is_dir() {
            return Err(ConfigError::MissingDataDir(self.data_dir.display().to_string()));
        }
        if self.gold_annotator.trim().is_empty() {
            return Err(ConfigError::EmptyGoldAnnotator);
        }
        Ok(())
    }
}

pub fn parse_listen(s: &str) -> Result<SocketAddr, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| ConfigError::BadListenAddress(s.to_string()))
}
