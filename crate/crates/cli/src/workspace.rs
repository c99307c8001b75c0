//! A loaded workspace and the operations shared by the CLI and the server.
//!
//! Mutations are all-or-nothing: the change is computed on a copy, written
//! to disk, and only then swapped in.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use advtax_core::annotation::{
    append_log_file, read_log, read_log_file, Annotation, AnnotationStore, AnnotationWarning, CoverageReport,
    LogRecord, ReclassificationPlan,
};
use advtax_core::corpus::{
    filter_corpus, parse_reports, read_reports_file, write_reports, CollisionReport, CorpusFilter, Exclusion,
};
use advtax_core::fixtures;
use advtax_core::generator::{decompose_to_spec, sample_for_coverage, ScenarioSpec};
use advtax_core::tagger::{evaluate_tagger, suggest, Lexicon, Suggestion, TaggerEvaluation};
use advtax_core::taxonomy::{self, canonical_taxonomy, NewLeaf, Taxonomy, TaxonomyRegistry};
use chrono::Utc;
use serde::Serialize;

use crate::config::WorkspaceConfig;
use crate::error::{Result, WorkspaceError};

#[derive(Debug, Clone)]
pub struct Workspace {
    pub config: WorkspaceConfig,
    pub taxonomy: Taxonomy,
    pub store: AnnotationStore,
    pub reports: Vec<CollisionReport>,
    pub lexicon: Lexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportView {
    pub report: CollisionReport,
    pub annotation: Option<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuggestionsView {
    pub report_id: String,
    pub lexicon_version: String,
    pub suggestions: Vec<Suggestion>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recorded {
    pub annotation: Annotation,
    pub warnings: Vec<AnnotationWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub rows: usize,
    pub accepted: usize,
    pub excluded: Vec<Exclusion>,
    /// Where the accepted reports were written; `None` on a dry run.
    pub written: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendSummary {
    pub records: usize,
    pub reports: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FixtureSet {
    /// The 117-row evaluation corpus and its gold annotations.
    Evaluation,
    /// The two appendix reports and their gold annotations.
    Appendix,
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(WorkspaceError::FileUnreadable {
            path: path.display().to_string(),
            source,
        }),
    }
}

/// Replace `path` by writing a sibling file and renaming it over.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let err = |source| WorkspaceError::FileUnwritable {
        path: path.display().to_string(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

pub fn read_taxonomy_file(path: &Path) -> Result<Taxonomy> {
    let text = std::fs::read_to_string(path).map_err(|source| WorkspaceError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    taxonomy::deserialize(&text).map_err(|source| WorkspaceError::TaxonomyFile {
        path: path.display().to_string(),
        source,
    })
}

/// Create the data directory and write a fresh workspace into it. Refuses
/// to overwrite any existing file.
pub fn init(config: &WorkspaceConfig, fixtures: Option<FixtureSet>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&config.data_dir).map_err(|source| WorkspaceError::FileUnwritable {
        path: config.data_dir.display().to_string(),
        source,
    })?;
    let mut files = vec![
        (config.taxonomy_file.clone(), taxonomy::serialize(&canonical_taxonomy())),
        (config.lexicon_file.clone(), fixtures::LEXICON_TOML.to_string()),
    ];
    let data = match fixtures {
        Some(FixtureSet::Evaluation) => Some((fixtures::EVALUATION_CSV, fixtures::GOLD_NDJSON)),
        Some(FixtureSet::Appendix) => Some((fixtures::APPENDIX_CSV, fixtures::APPENDIX_GOLD_NDJSON)),
        None => None,
    };
    if let Some((csv, log)) = data {
        let accepted = parse_reports(csv)?.accepted;
        files.push((config.reports_file.clone(), write_reports(&accepted)));
        files.push((config.annotation_log.clone(), log.to_string()));
    }
    if let Some((path, _)) = files.iter().find(|(p, _)| p.exists()) {
        return Err(WorkspaceError::AlreadyExists {
            path: path.display().to_string(),
        });
    }
    for (path, text) in &files {
        write_atomic(path, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

impl Workspace {
    /// Load every file of the workspace. A missing taxonomy file means the
    /// canonical taxonomy, a missing lexicon the bundled one, and missing
    /// corpus or log files mean empty ones.
    pub fn load(config: WorkspaceConfig) -> Result<Self> {
        config.check()?;
        let taxonomy = match read_optional(&config.taxonomy_file)? {
            Some(_) => read_taxonomy_file(&config.taxonomy_file)?,
            None => canonical_taxonomy(),
        };
        let registry = TaxonomyRegistry::from_latest(&taxonomy).map_err(|source| WorkspaceError::TaxonomyFile {
            path: config.taxonomy_file.display().to_string(),
            source,
        })?;
        let log = read_log_file(&config.annotation_log)?;
        let store = AnnotationStore::replay(registry, Some(config.gold_annotator.clone()), log)?;
        let reports = if config.reports_file.exists() {
            read_reports_file(&config.reports_file)?.accepted
        } else {
            Vec::new()
        };
        let lexicon = match read_optional(&config.lexicon_file)? {
            Some(text) => Lexicon::from_toml(&text)?,
            None => fixtures::bundled_lexicon(),
        };
        lexicon.validate(&taxonomy)?;
        Ok(Self {
            config,
            taxonomy,
            store,
            reports,
            lexicon,
        })
    }

    pub fn report(&self, report_id: &str) -> Result<&CollisionReport> {
        self.reports
            .iter()
            .find(|r| r.report_id == report_id)
            .ok_or_else(|| WorkspaceError::UnknownReport(report_id.to_string()))
    }

    pub fn report_view(&self, report_id: &str) -> Result<ReportView> {
        Ok(ReportView {
            report: self.report(report_id)?.clone(),
            annotation: self.store.effective(report_id).cloned(),
        })
    }

    pub fn filter_reports(&self, filter: &CorpusFilter) -> Result<Vec<CollisionReport>> {
        Ok(filter_corpus(&self.reports, filter)?)
    }

    /// Coverage against the current taxonomy, or against version `as_of`
    /// counting only annotations recorded for that version or earlier.
    pub fn coverage(&self, as_of: Option<u32>) -> Result<CoverageReport> {
        match as_of {
            None => Ok(self.store.coverage(&self.taxonomy)),
            Some(v) => {
                let t = self.taxonomy.at_version(v)?;
                Ok(self.store.as_of_version(v).coverage(&t))
            }
        }
    }

    pub fn suggestions(&self, report_id: &str) -> Result<SuggestionsView> {
        let report = self.report(report_id)?;
        Ok(SuggestionsView {
            report_id: report.report_id.clone(),
            lexicon_version: self.lexicon.lexicon_version.clone(),
            suggestions: suggest(&report.narrative, &self.lexicon, &self.taxonomy),
        })
    }

    pub fn tagger_evaluation(&self) -> TaggerEvaluation {
        evaluate_tagger(&self.store, &self.reports, &self.lexicon, &self.taxonomy)
    }

    pub fn sample(&self, k: usize, seed: u64) -> Result<Vec<ScenarioSpec>> {
        Ok(sample_for_coverage(&self.coverage(None)?, &self.taxonomy, k, seed)?)
    }

    /// Decompose against the taxonomy version the annotation was made under.
    pub fn decompose(&self, report_id: &str) -> Result<ScenarioSpec> {
        let report = self.report(report_id)?;
        let annotation = self.store.effective(report_id).ok_or_else(|| {
            WorkspaceError::Annotation(advtax_core::annotation::AnnotationError::UnknownReport {
                report_id: report_id.to_string(),
            })
        })?;
        let version = self
            .store
            .registry()
            .get(annotation.taxonomy_version)
            .unwrap_or(&self.taxonomy);
        Ok(decompose_to_spec(report, annotation, version)?)
    }

    fn check_reports<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for id in ids {
            self.report(id)?;
        }
        Ok(())
    }

    /// Append the records `next` has beyond the current log, then adopt it.
    fn commit_store(&mut self, next: AnnotationStore) -> Result<usize> {
        let fresh = &next.log()[self.store.log().len()..];
        if !fresh.is_empty() {
            append_log_file(&self.config.annotation_log, fresh)?;
        }
        let n = fresh.len();
        self.store = next;
        Ok(n)
    }

    pub fn record_annotation(&mut self, annotation: Annotation) -> Result<Recorded> {
        self.check_reports([annotation.report_id.as_str()])?;
        let mut next = self.store.clone();
        let warnings = next.record_annotation(annotation.clone())?;
        self.commit_store(next)?;
        Ok(Recorded { annotation, warnings })
    }

    /// Validate and append log records from NDJSON. Lines may omit
    /// `timestamp` (now) and `event_kind` (annotate).
    pub fn import_log(&mut self, text: &str) -> Result<AppendSummary> {
        let now = serde_json::to_value(Utc::now()).expect("timestamp serializes");
        let mut lines = String::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| advtax_core::annotation::LogError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if let Some(obj) = v.as_object_mut() {
                obj.entry("timestamp").or_insert_with(|| now.clone());
            }
            lines.push_str(&v.to_string());
            lines.push('\n');
        }
        let records: Vec<LogRecord> = read_log(&lines)?;
        self.check_reports(records.iter().map(|r| r.annotation.report_id.as_str()))?;
        let reports: BTreeSet<&str> = records.iter().map(|r| r.annotation.report_id.as_str()).collect();
        let reports = reports.len();
        let all = self.store.log().iter().cloned().chain(records).collect::<Vec<_>>();
        let next = AnnotationStore::replay(
            self.store.registry().clone(),
            self.store.gold_annotator().map(str::to_string),
            all,
        )?;
        let records = self.commit_store(next)?;
        Ok(AppendSummary { records, reports })
    }

    pub fn reclassify(&mut self, plan: &ReclassificationPlan) -> Result<AppendSummary> {
        self.check_reports(plan.moves.iter().map(|m| m.report_id.as_str()))?;
        let mut next = self.store.clone();
        next.reclassify(plan)?;
        let records = self.commit_store(next)?;
        Ok(AppendSummary {
            records,
            reports: plan.moves.len(),
        })
    }

    fn check_version(&self, expected: Option<u32>) -> Result<()> {
        match expected {
            Some(expected) if expected != self.taxonomy.version => Err(WorkspaceError::VersionConflict {
                expected,
                current: self.taxonomy.version,
            }),
            _ => Ok(()),
        }
    }

    fn commit_taxonomy(&mut self, next: Taxonomy) -> Result<&Taxonomy> {
        write_atomic(&self.config.taxonomy_file, &taxonomy::serialize(&next))?;
        self.store.register_taxonomy(next.clone());
        self.taxonomy = next;
        Ok(&self.taxonomy)
    }

    pub fn amend(
        &mut self,
        leaf_id: &str,
        definition: &str,
        rationale: &str,
        expected_version: Option<u32>,
    ) -> Result<&Taxonomy> {
        self.check_version(expected_version)?;
        let next = self.taxonomy.amend_definition(leaf_id, definition, rationale)?;
        self.commit_taxonomy(next)
    }

    pub fn add_leaf(
        &mut self,
        parent_path: &str,
        leaf: NewLeaf,
        rationale: &str,
        expected_version: Option<u32>,
    ) -> Result<&Taxonomy> {
        self.check_version(expected_version)?;
        let next = self.taxonomy.add_leaf(parent_path, leaf, rationale)?;
        self.commit_taxonomy(next)
    }

    /// Parse a CSV corpus and, unless `dry_run`, make its accepted reports
    /// the workspace corpus.
    pub fn ingest(&mut self, csv: &Path, dry_run: bool) -> Result<IngestSummary> {
        let result = read_reports_file(csv)?;
        let written = if dry_run {
            None
        } else {
            write_atomic(&self.config.reports_file, &write_reports(&result.accepted))?;
            Some(self.config.reports_file.clone())
        };
        let summary = IngestSummary {
            rows: result.rows(),
            accepted: result.accepted.len(),
            excluded: result.excluded,
            written,
        };
        if !dry_run {
            self.reports = result.accepted;
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evaluation_workspace() -> (tempfile::TempDir, Workspace) {
        let dir = tempfile::tempdir().unwrap();
        let config = WorkspaceConfig::for_data_dir(dir.path());
        init(&config, Some(FixtureSet::Evaluation)).unwrap();
        let ws = Workspace::load(config).unwrap();
        (dir, ws)
    }

    #[test]
    fn init_refuses_to_overwrite() {
        let (dir, _) = evaluation_workspace();
        let config = WorkspaceConfig::for_data_dir(dir.path());
        assert!(matches!(init(&config, None), Err(WorkspaceError::AlreadyExists { .. })));
    }

    #[test]
    fn failed_annotation_leaves_log_untouched() {
        let (_dir, mut ws) = evaluation_workspace();
        let before = std::fs::read_to_string(&ws.config.annotation_log).unwrap();
        let mut a = ws.store.effective("CA-2023-001").unwrap().clone();
        a.primary = advtax_core::annotation::Primary::Leaf("O".into());
        a.tags = ["A".to_string()].into();
        let err = ws.record_annotation(a).unwrap_err();
        assert_eq!(err.code(), "PrimaryNotInTags");
        assert_eq!(std::fs::read_to_string(&ws.config.annotation_log).unwrap(), before);
        assert_eq!(ws.store.log().len(), 116);
    }

    #[test]
    fn amend_persists_and_reloads() {
        let (_dir, mut ws) = evaluation_workspace();
        assert!(matches!(
            ws.amend("M", "x", "y", Some(3)),
            Err(WorkspaceError::VersionConflict {
                expected: 3,
                current: 1
            })
        ));
        ws.amend("M", "Other road vehicles.", "tighten", Some(1)).unwrap();
        let reloaded = Workspace::load(ws.config.clone()).unwrap();
        assert_eq!(reloaded.taxonomy, ws.taxonomy);
        assert_eq!(reloaded.taxonomy.version, 2);
        assert_eq!(reloaded.coverage(None).unwrap(), ws.coverage(None).unwrap());
    }
}
