//! Taxonomy document format.
//!
//! A UTF-8 JSON document:
//!
//! ```text
//! {
//!   "schema": "advtax.taxonomy/1",
//!   "version": 1,
//!   "categories": [{"id", "name", "description", "parent"}],
//!   "leaves": [{"id", "name", "parent", "definition", "example_refs", "mitigation_refs"}],
//!   "revisions": [{"sequence", "kind", "target_id", "before", "after", "rationale", "timestamp"}]
//! }
//! ```
//!
//! Line endings are normalized to `\n` before parsing and the serialized
//! form always ends with a newline.

use serde::{Deserialize, Serialize};

use super::{validate_taxonomy, CategoryNode, ElementClass, Result, RevisionEntry, Taxonomy, TaxonomyError};

pub const TAXONOMY_SCHEMA: &str = "advtax.taxonomy/1";

#[derive(Serialize)]
struct DocumentRef<'a> {
    schema: &'a str,
    version: u32,
    categories: &'a [CategoryNode],
    leaves: &'a [ElementClass],
    revisions: &'a [RevisionEntry],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema: String,
    version: u32,
    categories: Vec<CategoryNode>,
    leaves: Vec<ElementClass>,
    #[serde(default)]
    revisions: Vec<RevisionEntry>,
}

pub fn serialize(t: &Taxonomy) -> String {
    let doc = DocumentRef {
        schema: TAXONOMY_SCHEMA,
        version: t.version,
        categories: &t.categories,
        leaves: &t.leaves,
        revisions: &t.revisions,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("taxonomy serializes");
    out.push('\n');
    out
}

/// Parse and validate a taxonomy document.
pub fn deserialize(document: &str) -> Result<Taxonomy> {
    let normalized = document.replace("\r\n", "\n");
    let doc: Document = serde_json::from_str(&normalized).map_err(|e| TaxonomyError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.schema != TAXONOMY_SCHEMA {
        return Err(TaxonomyError::Parse {
            line: 1,
            column: 1,
            message: format!("field `schema`: expected `{TAXONOMY_SCHEMA}`, found `{}`", doc.schema),
        });
    }
    if doc.version == 0 || doc.revisions.len() as u64 + 1 != u64::from(doc.version) {
        return Err(TaxonomyError::Parse {
            line: 1,
            column: 1,
            message: format!(
                "field `version`: {} does not match {} revision entries",
                doc.version,
                doc.revisions.len()
            ),
        });
    }
    if let Some(w) = doc.revisions.windows(2).find(|w| w[1].sequence <= w[0].sequence) {
        return Err(TaxonomyError::InvalidRevision {
            sequence: w[1].sequence,
            message: "sequence numbers must strictly increase".into(),
        });
    }
    if let Some(r) = doc
        .revisions
        .iter()
        .find(|r| r.sequence == 0 || r.rationale.trim().is_empty())
    {
        return Err(TaxonomyError::InvalidRevision {
            sequence: r.sequence,
            message: "sequence must be at least 1 and rationale non-empty".into(),
        });
    }
    let t = Taxonomy {
        version: doc.version,
        categories: doc.categories,
        leaves: doc.leaves,
        revisions: doc.revisions,
    };
    let violations = validate_taxonomy(&t);
    if violations.is_empty() {
        Ok(t)
    } else {
        Err(TaxonomyError::Validation(violations))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{canonical_taxonomy, ViolationCode};

    #[test]
    fn canonical_round_trip() {
        let t = canonical_taxonomy();
        let doc = serialize(&t);
        assert_eq!(deserialize(&doc).unwrap(), t);
        assert!(doc.ends_with('\n'));
    }

    #[test]
    fn crlf_is_accepted() {
        let doc = serialize(&canonical_taxonomy()).replace('\n', "\r\n");
        assert_eq!(deserialize(&doc).unwrap(), canonical_taxonomy());
    }

    #[test]
    fn truncated_document_has_locus() {
        let doc = serialize(&canonical_taxonomy());
        let cut = &doc[..doc.len() / 2];
        match deserialize(cut) {
            Err(TaxonomyError::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_named() {
        let doc = serialize(&canonical_taxonomy()).replacen("\"definition\"", "\"definitio\"", 1);
        match deserialize(&doc) {
            Err(TaxonomyError::Parse { message, .. }) => assert!(message.contains("definition"), "{message}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_fail_validation() {
        let mut t = canonical_taxonomy();
        let mut dup = t.leaves[0].clone();
        dup.name = "Another".into();
        t.leaves.push(dup);
        match deserialize(&serialize(&t)) {
            Err(TaxonomyError::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].code, ViolationCode::DuplicateLeafId);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn revision_log_survives() {
        let t = canonical_taxonomy()
            .amend_definition("M", "Vehicles, parked ones included.", "doors")
            .unwrap();
        assert_eq!(deserialize(&serialize(&t)).unwrap(), t);
    }
}
