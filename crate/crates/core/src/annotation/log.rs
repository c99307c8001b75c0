//! Newline-delimited JSON annotation log.
//!
//! One record per line with the fields `report_id`, `taxonomy_version`,
//! `tags`, `primary`, `difficulty`, `annotator`, `notes`, `event_kind` and
//! `timestamp`. Blank lines are ignored.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Annotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    #[default]
    Annotate,
    Reclassify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    #[serde(flatten)]
    pub annotation: Annotation,
    #[serde(default)]
    pub event_kind: EventKind,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("annotation log {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn read_log(text: &str) -> Result<Vec<LogRecord>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LogError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Read a log file; a missing file is an empty log.
pub fn read_log_file(path: impl AsRef<Path>) -> Result<Vec<LogRecord>, LogError> {
    let path = path.as_ref();
    match std::fs::read_to_string(path) {
        Ok(text) => read_log(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(source) => Err(LogError::Io {
            path: path.display().to_string(),
            source,
        }),
    }
}

pub fn write_log(records: &[LogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("log record serializes"));
        out.push('\n');
    }
    out
}

/// Append records to a log file in a single write.
pub fn append_log_file(path: impl AsRef<Path>, records: &[LogRecord]) -> Result<(), LogError> {
    let path = path.as_ref();
    let io = |source| LogError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    file.write_all(write_log(records).as_bytes()).map_err(io)?;
    file.sync_data().map_err(io)
}
