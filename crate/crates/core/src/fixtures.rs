//! Bundled data: the 117-row evaluation corpus with its gold annotations,
//! the two appendix reports with theirs, and the tagger lexicon.

use chrono::{DateTime, TimeZone, Utc};

use crate::annotation::{read_log, AnnotationStore, LogRecord, ReclassificationMove, ReclassificationPlan};
use crate::corpus::{parse_reports, CollisionReport, CorpusValidationResult};
use crate::tagger::Lexicon;
use crate::taxonomy::{canonical_taxonomy, Taxonomy, TaxonomyRegistry, TRAFFIC_AGENTS_EXPANSION};

pub const EVALUATION_CSV: &str = include_str!("../fixtures/evaluation_117.csv");
pub const GOLD_NDJSON: &str = include_str!("../fixtures/gold_annotations.ndjson");
pub const APPENDIX_CSV: &str = include_str!("../fixtures/appendix.csv");
pub const APPENDIX_GOLD_NDJSON: &str = include_str!("../fixtures/appendix_gold.ndjson");
pub const LEXICON_TOML: &str = include_str!("../fixtures/lexicon.toml");

pub const GOLD_ANNOTATOR: &str = "gold";
pub const CRUISE_REPORT: &str = "CRUISE-2023-10-02";
pub const TESLA_REPORT: &str = "TESLA-2019-03-01";
/// Reports left unclassified in version 1 because a parked vehicle's
/// opened door was struck.
pub const DOOR_CASES: [&str; 2] = ["CA-2023-032", "CA-2023-051"];

pub fn fixture_timestamp() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 10, 15, 0, 0, 0).unwrap()
}

pub fn evaluation_corpus() -> CorpusValidationResult {
    parse_reports(EVALUATION_CSV).expect("bundled corpus has the required header")
}

pub fn gold_log() -> Vec<LogRecord> {
    read_log(GOLD_NDJSON).expect("bundled gold log parses")
}

/// Canonical taxonomy registry with the gold annotations replayed.
pub fn gold_store() -> AnnotationStore {
    AnnotationStore::replay(canonical_taxonomy().into(), Some(GOLD_ANNOTATOR.into()), gold_log())
        .expect("bundled gold log is valid")
}

pub fn appendix_reports() -> Vec<CollisionReport> {
    parse_reports(APPENDIX_CSV)
        .expect("bundled appendix has the required header")
        .accepted
}

pub fn appendix_report(report_id: &str) -> Option<CollisionReport> {
    appendix_reports().into_iter().find(|r| r.report_id == report_id)
}

pub fn appendix_store() -> AnnotationStore {
    let log = read_log(APPENDIX_GOLD_NDJSON).expect("bundled appendix log parses");
    AnnotationStore::replay(canonical_taxonomy().into(), Some(GOLD_ANNOTATOR.into()), log)
        .expect("bundled appendix log is valid")
}

pub fn bundled_lexicon() -> Lexicon {
    Lexicon::from_toml(LEXICON_TOML).expect("bundled lexicon parses")
}

/// Version 2: the canonical taxonomy with the Traffic Agents definition
/// widened to cover parked agents and their attachments.
pub fn revised_taxonomy() -> Taxonomy {
    let v1 = canonical_taxonomy();
    let m = v1.leaf("M").expect("canonical taxonomy has M");
    let definition = format!("{} {}", m.definition, TRAFFIC_AGENTS_EXPANSION);
    v1.amend_definition_at(
        "M",
        &definition,
        "door-opening collisions fit no version-1 leaf",
        fixture_timestamp(),
    )
    .expect("amendment of a canonical leaf succeeds")
}

pub fn revised_registry() -> TaxonomyRegistry {
    TaxonomyRegistry::from_latest(&revised_taxonomy()).expect("revision chain undoes cleanly")
}

/// Moves both door cases to Traffic Agents under the revised taxonomy.
pub fn door_reclassification_plan() -> ReclassificationPlan {
    ReclassificationPlan {
        target_version: 2,
        moves: DOOR_CASES
            .iter()
            .map(|id| ReclassificationMove {
                report_id: id.to_string(),
                new_primary: "M".into(),
                new_tags: ["B", "I", "M"].iter().map(|s| s.to_string()).collect(),
                rationale: "opened door of a parked vehicle counts as a traffic agent".into(),
            })
            .collect(),
    }
}
