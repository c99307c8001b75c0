//! Human classifications of collision reports and the analytics computed
//! over them.
//!
//! An [`AnnotationStore`] keeps the latest annotation per (report,
//! annotator) together with the append-only [`LogRecord`] trail that
//! produced it. Replaying the trail reconstructs the store exactly. When a
//! report has several annotators, analytics use the designated gold
//! annotator if present, else the lexicographically first annotator.

mod coverage;
mod log;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::taxonomy::{TaxonomyRegistry, UNCLASSIFIED};

pub use coverage::{CoverageReport, SuccessRate};
pub use log::{append_log_file, read_log, read_log_file, write_log, EventKind, LogError, LogRecord};

/// The single most significant contributing element of a report.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primary {
    Leaf(String),
    Unclassified,
}

impl Primary {
    pub fn leaf_id(&self) -> Option<&str> {
        match self {
            Primary::Leaf(id) => Some(id),
            Primary::Unclassified => None,
        }
    }

    pub fn is_unclassified(&self) -> bool {
        matches!(self, Primary::Unclassified)
    }
}

impl fmt::Display for Primary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.leaf_id().unwrap_or(UNCLASSIFIED))
    }
}

impl From<&str> for Primary {
    fn from(s: &str) -> Self {
        if s.eq_ignore_ascii_case(UNCLASSIFIED) {
            Primary::Unclassified
        } else {
            Primary::Leaf(s.to_string())
        }
    }
}

impl Serialize for Primary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Primary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Primary::from(s.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Difficulty {
    Easy = 1,
    Moderate = 2,
    Difficult = 3,
    Indecisive = 4,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [
        Difficulty::Easy,
        Difficulty::Moderate,
        Difficulty::Difficult,
        Difficulty::Indecisive,
    ];

    pub fn from_grade(grade: u8) -> Option<Difficulty> {
        Self::ALL.get(usize::from(grade).checked_sub(1)?).copied()
    }

    pub fn grade(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Moderate => "Moderate",
            Difficulty::Difficult => "Difficult",
            Difficulty::Indecisive => "Indecisive",
        }
    }
}

/// One classification of one report against one taxonomy version.
///
/// `difficulty` is kept as the raw grade so that out-of-range values reach
/// validation and are reported as [`AnnotationError::BadDifficulty`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub report_id: String,
    pub taxonomy_version: u32,
    pub tags: BTreeSet<String>,
    pub primary: Primary,
    pub difficulty: u8,
    pub annotator: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum AnnotationError {
    #[error("unknown leaf `{leaf_id}` in taxonomy version {version}")]
    UnknownLeaf { leaf_id: String, version: u32 },
    #[error("taxonomy version {version} is not registered")]
    UnknownTaxonomyVersion { version: u32 },
    #[error("difficulty {grade} is outside 1-4")]
    BadDifficulty { grade: u8 },
    #[error("primary `{primary}` is not among the tags")]
    PrimaryNotInTags { primary: String },
    #[error("no annotation recorded for report `{report_id}`")]
    UnknownReport { report_id: String },
    #[error("field `{field}` must not be empty")]
    EmptyField { field: &'static str },
}

impl AnnotationError {
    pub fn code(&self) -> &'static str {
        match self {
            AnnotationError::UnknownLeaf { .. } => "UnknownLeaf",
            AnnotationError::UnknownTaxonomyVersion { .. } => "UnknownTaxonomyVersion",
            AnnotationError::BadDifficulty { .. } => "BadDifficulty",
            AnnotationError::PrimaryNotInTags { .. } => "PrimaryNotInTags",
            AnnotationError::UnknownReport { .. } => "UnknownReport",
            AnnotationError::EmptyField { .. } => "EmptyField",
        }
    }
}

/// Accepted but worth a second look.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code")]
pub enum AnnotationWarning {
    /// Grade 4 normally means no leaf fitted, yet a primary was chosen.
    IndecisiveWithPrimary { report_id: String, primary: String },
}

impl fmt::Display for AnnotationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationWarning::IndecisiveWithPrimary { report_id, primary } => write!(
                f,
                "report {report_id}: difficulty 4 (Indecisive) but primary is {primary}, not {UNCLASSIFIED}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReclassificationMove {
    pub report_id: String,
    pub new_primary: Primary,
    pub new_tags: BTreeSet<String>,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReclassificationPlan {
    pub target_version: u32,
    pub moves: Vec<ReclassificationMove>,
}

#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    registry: TaxonomyRegistry,
    gold_annotator: Option<String>,
    current: BTreeMap<String, BTreeMap<String, Annotation>>,
    log: Vec<LogRecord>,
}

impl AnnotationStore {
    pub fn new(registry: TaxonomyRegistry) -> Self {
        Self {
            registry,
            ..Self::default()
        }
    }

    pub fn with_gold_annotator(mut self, annotator: impl Into<String>) -> Self {
        self.gold_annotator = Some(annotator.into());
        self
    }

    /// Rebuild a store from its log. Every record is validated again.
    pub fn replay(
        registry: TaxonomyRegistry,
        gold_annotator: Option<String>,
        records: impl IntoIterator<Item = LogRecord>,
    ) -> Result<Self, AnnotationError> {
        let mut store = Self::new(registry);
        store.gold_annotator = gold_annotator;
        for record in records {
            store.validate(&record.annotation)?;
            store.apply(record);
        }
        Ok(store)
    }

    pub fn registry(&self) -> &TaxonomyRegistry {
        &self.registry
    }

    pub fn register_taxonomy(&mut self, t: crate::taxonomy::Taxonomy) {
        self.registry.insert(t);
    }

    pub fn gold_annotator(&self) -> Option<&str> {
        self.gold_annotator.as_deref()
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    /// Number of distinct annotated reports.
    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    /// Check an annotation against its invariants and the registry.
    pub fn validate(&self, a: &Annotation) -> Result<Vec<AnnotationWarning>, AnnotationError> {
        if a.report_id.trim().is_empty() {
            return Err(AnnotationError::EmptyField { field: "report_id" });
        }
        if a.annotator.trim().is_empty() {
            return Err(AnnotationError::EmptyField { field: "annotator" });
        }
        let taxonomy = self
            .registry
            .get(a.taxonomy_version)
            .ok_or(AnnotationError::UnknownTaxonomyVersion {
                version: a.taxonomy_version,
            })?;
        let difficulty =
            Difficulty::from_grade(a.difficulty).ok_or(AnnotationError::BadDifficulty { grade: a.difficulty })?;
        let unknown = |id: &str| AnnotationError::UnknownLeaf {
            leaf_id: id.to_string(),
            version: a.taxonomy_version,
        };
        if let Some(tag) = a.tags.iter().find(|t| taxonomy.leaf(t).is_none()) {
            return Err(unknown(tag));
        }
        let mut warnings = Vec::new();
        if let Primary::Leaf(id) = &a.primary {
            if taxonomy.leaf(id).is_none() {
                return Err(unknown(id));
            }
            if !a.tags.contains(id) {
                return Err(AnnotationError::PrimaryNotInTags { primary: id.clone() });
            }
            if difficulty == Difficulty::Indecisive {
                warnings.push(AnnotationWarning::IndecisiveWithPrimary {
                    report_id: a.report_id.clone(),
                    primary: id.clone(),
                });
            }
        }
        Ok(warnings)
    }

    fn apply(&mut self, record: LogRecord) {
        let a = record.annotation.clone();
        self.current
            .entry(a.report_id.clone())
            .or_default()
            .insert(a.annotator.clone(), a);
        self.log.push(record);
    }

    pub fn record_annotation(&mut self, a: Annotation) -> Result<Vec<AnnotationWarning>, AnnotationError> {
        self.record_annotation_at(a, Utc::now())
    }

    /// Record `a`, replacing any earlier annotation of the same report by the
    /// same annotator. Nothing changes when validation fails.
    pub fn record_annotation_at(
        &mut self,
        a: Annotation,
        at: DateTime<Utc>,
    ) -> Result<Vec<AnnotationWarning>, AnnotationError> {
        let warnings = self.validate(&a)?;
        self.apply(LogRecord {
            annotation: a,
            event_kind: EventKind::Annotate,
            timestamp: at,
        });
        Ok(warnings)
    }

    /// The annotation analytics use for a report.
    pub fn effective(&self, report_id: &str) -> Option<&Annotation> {
        let by_annotator = self.current.get(report_id)?;
        self.gold_annotator
            .as_ref()
            .and_then(|g| by_annotator.get(g))
            .or_else(|| by_annotator.values().next())
    }

    /// Effective annotations ordered by report id.
    pub fn effective_annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.current.keys().filter_map(|id| self.effective(id))
    }

    /// All current annotations of one report, ordered by annotator.
    pub fn annotations_for(&self, report_id: &str) -> impl Iterator<Item = &Annotation> {
        self.current.get(report_id).into_iter().flat_map(|m| m.values())
    }

    pub fn reclassify(&mut self, plan: &ReclassificationPlan) -> Result<(), AnnotationError> {
        self.reclassify_at(plan, Utc::now())
    }

    /// Apply every move of `plan` to the effective annotation of its report,
    /// or none of them.
    pub fn reclassify_at(&mut self, plan: &ReclassificationPlan, at: DateTime<Utc>) -> Result<(), AnnotationError> {
        if self.registry.get(plan.target_version).is_none() {
            return Err(AnnotationError::UnknownTaxonomyVersion {
                version: plan.target_version,
            });
        }
        let mut staged = self.clone();
        for mv in &plan.moves {
            let base = staged
                .effective(&mv.report_id)
                .ok_or_else(|| AnnotationError::UnknownReport {
                    report_id: mv.report_id.clone(),
                })?
                .clone();
            let updated = Annotation {
                taxonomy_version: plan.target_version,
                tags: mv.new_tags.clone(),
                primary: mv.new_primary.clone(),
                notes: mv.rationale.clone(),
                ..base
            };
            staged.validate(&updated)?;
            staged.apply(LogRecord {
                annotation: updated,
                event_kind: EventKind::Reclassify,
                timestamp: at,
            });
        }
        *self = staged;
        Ok(())
    }

    /// The store as it stood for analyses against `version`: only records
    /// made against that version or earlier are replayed.
    pub fn as_of_version(&self, version: u32) -> AnnotationStore {
        let mut store = AnnotationStore {
            registry: self.registry.clone(),
            gold_annotator: self.gold_annotator.clone(),
            ..Self::default()
        };
        for record in self.log.iter().filter(|r| r.annotation.taxonomy_version <= version) {
            store.apply(record.clone());
        }
        store
    }

    /// A shorter log with the same replay result: only the last record per
    /// (report, annotator, taxonomy version) survives, in original order.
    /// Per-version history, and with it [`as_of_version`](Self::as_of_version),
    /// is preserved.
    pub fn compacted_log(&self) -> Vec<LogRecord> {
        let mut last: BTreeMap<(&str, &str, u32), usize> = BTreeMap::new();
        for (i, r) in self.log.iter().enumerate() {
            let a = &r.annotation;
            last.insert((&a.report_id, &a.annotator, a.taxonomy_version), i);
        }
        let mut keep: Vec<usize> = last.into_values().collect();
        keep.sort_unstable();
        keep.into_iter().map(|i| self.log[i].clone()).collect()
    }
}
