use advtax_core::annotation::{AnnotationError, LogError};
use advtax_core::corpus::CorpusError;
use advtax_core::generator::{GeneratorError, ImportError};
use advtax_core::tagger::LexiconError;
use advtax_core::taxonomy::TaxonomyError;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::ConfigError;

/// Every failure of a workspace operation. CLI and HTTP render the same
/// value: a stable `code` plus a human message.
#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("taxonomy file {path}: {source}")]
    TaxonomyFile {
        path: String,
        #[source]
        source: TaxonomyError,
    },
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    FileUnwritable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} already exists")]
    AlreadyExists { path: String },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("scenario document: {0}")]
    Scenario(#[from] ImportError),
    #[error("report `{0}` is not in the corpus")]
    UnknownReport(String),
    #[error("taxonomy is at version {current}, request expected {expected}")]
    VersionConflict { expected: u32, current: u32 },
    #[error("{field}: {message}")]
    BadRequest { field: String, message: String },
}

/// How a failure maps onto HTTP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Invalid,
    NotFound,
    Conflict,
    Internal,
}

pub fn taxonomy_code(e: &TaxonomyError) -> &'static str {
    match e {
        TaxonomyError::NotFound(_) => "NotFound",
        TaxonomyError::EmptyDefinition => "EmptyDefinition",
        TaxonomyError::EmptyName => "EmptyName",
        TaxonomyError::EmptyRationale => "EmptyRationale",
        TaxonomyError::DuplicateLeafId(_) => "DuplicateLeafId",
        TaxonomyError::DuplicateLeafName(_) => "DuplicateLeafName",
        TaxonomyError::InvalidId(_) => "InvalidId",
        TaxonomyError::VersionOrder { .. } => "VersionOrder",
        TaxonomyError::UnsupportedChange(_) => "UnsupportedChange",
        TaxonomyError::InvalidRevision { .. } => "InvalidRevision",
        TaxonomyError::Parse { .. } => "TaxonomyParse",
        TaxonomyError::Validation(_) => "ValidationFailed",
    }
}

impl WorkspaceError {
    pub fn code(&self) -> &'static str {
        match self {
            WorkspaceError::Config(e) => match e {
                ConfigError::Unreadable { .. } => "FileUnreadable",
                ConfigError::Parse { .. } => "ConfigParse",
                ConfigError::BadListenAddress(_) => "BadListenAddress",
                ConfigError::MissingDataDir(_) => "MissingDataDir",
                ConfigError::EmptyGoldAnnotator => "EmptyGoldAnnotator",
            },
            WorkspaceError::TaxonomyFile { source, .. } => taxonomy_code(source),
            WorkspaceError::FileUnreadable { .. } => "FileUnreadable",
            WorkspaceError::FileUnwritable { .. } => "FileUnwritable",
            WorkspaceError::AlreadyExists { .. } => "AlreadyExists",
            WorkspaceError::Log(LogError::Parse { .. }) => "LogParse",
            WorkspaceError::Log(LogError::Io { .. }) => "LogIo",
            WorkspaceError::Corpus(e) => match e {
                CorpusError::FileUnreadable { .. } => "FileUnreadable",
                CorpusError::HeaderMismatch { .. } => "HeaderMismatch",
                CorpusError::InvalidRange { .. } => "InvalidRange",
            },
            WorkspaceError::Lexicon(e) => match e {
                LexiconError::Parse(_) => "LexiconParse",
                LexiconError::Io { .. } => "FileUnreadable",
                LexiconError::UnknownLeaf(_) => "UnknownLeaf",
                LexiconError::EmptyPattern { .. } => "EmptyPattern",
                LexiconError::ZeroWeight { .. } => "ZeroWeight",
                LexiconError::DuplicatePattern { .. } => "DuplicatePattern",
            },
            WorkspaceError::Annotation(e) => e.code(),
            WorkspaceError::Taxonomy(e) => taxonomy_code(e),
            WorkspaceError::Generator(e) => e.code(),
            WorkspaceError::Scenario(ImportError::Parse { .. }) => "ScenarioParse",
            WorkspaceError::Scenario(ImportError::Validation(e)) => e.code(),
            WorkspaceError::UnknownReport(_) => "UnknownReport",
            WorkspaceError::VersionConflict { .. } => "VersionConflict",
            WorkspaceError::BadRequest { .. } => "BadRequest",
        }
    }

    pub fn class(&self) -> Class {
        match self {
            WorkspaceError::UnknownReport(_)
            | WorkspaceError::Annotation(AnnotationError::UnknownReport { .. })
            | WorkspaceError::Taxonomy(TaxonomyError::NotFound(_)) => Class::NotFound,
            WorkspaceError::VersionConflict { .. } => Class::Conflict,
            WorkspaceError::Annotation(_)
            | WorkspaceError::Taxonomy(_)
            | WorkspaceError::Generator(_)
            | WorkspaceError::Scenario(_)
            | WorkspaceError::BadRequest { .. }
            | WorkspaceError::Corpus(CorpusError::HeaderMismatch { .. } | CorpusError::InvalidRange { .. }) => {
                Class::Invalid
            }
            _ => Class::Internal,
        }
    }

    /// Structured form: `code`, `message` and any typed details.
    pub fn body(&self) -> Value {
        let mut body = match self {
            WorkspaceError::Annotation(e) => serde_json::to_value(e).unwrap_or_else(|_| json!({})),
            WorkspaceError::Generator(e) | WorkspaceError::Scenario(ImportError::Validation(e)) => {
                serde_json::to_value(e).unwrap_or_else(|_| json!({}))
            }
            WorkspaceError::Taxonomy(TaxonomyError::Validation(v))
            | WorkspaceError::TaxonomyFile {
                source: TaxonomyError::Validation(v),
                ..
            } => json!({ "violations": v }),
            WorkspaceError::UnknownReport(id) => json!({ "report_id": id }),
            WorkspaceError::VersionConflict { expected, current } => {
                json!({ "expected_version": expected, "current_version": current })
            }
            WorkspaceError::BadRequest { field, .. } => json!({ "field": field }),
            _ => json!({}),
        };
        if !body.is_object() {
            body = json!({});
        }
        body["code"] = json!(self.code());
        body["message"] = json!(self.to_string());
        body
    }
}

pub type Result<T, E = WorkspaceError> = std::result::Result<T, E>;
