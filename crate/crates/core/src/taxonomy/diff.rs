use chrono::{DateTime, Utc};

use super::{Result, RevisionEntry, RevisionKind, Taxonomy, TaxonomyError};

const DERIVED_RATIONALE: &str = "derived from structural comparison";

/// Ordered revision entries that turn `from`'s tree into `to`'s tree.
///
/// Renames and amendments come first in pre-order, followed by moves and
/// additions in leaf-table order.
///
/// Where `to` carries a matching revision newer than `from`, its rationale
/// and timestamp are reused.
pub fn diff(from: &Taxonomy, to: &Taxonomy) -> Result<Vec<RevisionEntry>> {
    if from.version > to.version {
        return Err(TaxonomyError::VersionOrder {
            from: from.version,
            to: to.version,
        });
    }
    let same_shape = from.categories.len() == to.categories.len()
        && from
            .categories
            .iter()
            .zip(&to.categories)
            .all(|(a, b)| a.id == b.id && a.parent == b.parent);
    if !same_shape {
        return Err(TaxonomyError::UnsupportedChange("category structure differs".into()));
    }
    for leaf in &from.leaves {
        match to.leaf(&leaf.id) {
            None => {
                return Err(TaxonomyError::UnsupportedChange(format!(
                    "leaf `{}` was removed",
                    leaf.id
                )))
            }
            Some(other) if other.example_refs != leaf.example_refs || other.mitigation_refs != leaf.mitigation_refs => {
                return Err(TaxonomyError::UnsupportedChange(format!(
                    "references of leaf `{}` changed",
                    leaf.id
                )))
            }
            Some(_) => {}
        }
    }

    let newer = &to.revisions[from.revisions.len().min(to.revisions.len())..];
    let fallback_time = to
        .revisions
        .last()
        .map(|r| r.timestamp)
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH);
    let mut out: Vec<RevisionEntry> = Vec::new();
    let mut push = |kind: RevisionKind, target: &str, before: String, after: String| {
        let source = newer.iter().rev().find(|r| r.kind == kind && r.target_id == target);
        out.push(RevisionEntry {
            sequence: from.revisions.len() as u32 + out.len() as u32 + 1,
            kind,
            target_id: target.to_string(),
            before,
            after,
            rationale: source.map_or_else(|| DERIVED_RATIONALE.to_string(), |r| r.rationale.clone()),
            timestamp: source.map_or(fallback_time, |r| r.timestamp),
        });
    };

    for (a, b) in from.categories.iter().zip(&to.categories) {
        if a.name != b.name {
            push(RevisionKind::Rename, &a.id, a.name.clone(), b.name.clone());
        }
        if a.description != b.description {
            push(
                RevisionKind::AmendDefinition,
                &a.id,
                a.description.clone(),
                b.description.clone(),
            );
        }
    }
    for b in to.leaves_preorder() {
        if let Some(a) = from.leaf(&b.id) {
            if a.name != b.name {
                push(RevisionKind::Rename, &a.id, a.name.clone(), b.name.clone());
            }
            if a.definition != b.definition {
                push(
                    RevisionKind::AmendDefinition,
                    &a.id,
                    a.definition.clone(),
                    b.definition.clone(),
                );
            }
        }
    }

    // Moves keep table positions and additions append, so the leaves of
    // `from` must appear in `to` in the same relative order.
    let shared: Vec<&str> = to
        .leaves
        .iter()
        .filter(|l| from.leaf(&l.id).is_some())
        .map(|l| l.id.as_str())
        .collect();
    if !shared.iter().copied().eq(from.leaves.iter().map(|l| l.id.as_str())) {
        return Err(TaxonomyError::UnsupportedChange("leaf table order differs".into()));
    }
    for leaf in &to.leaves {
        match from.leaf(&leaf.id) {
            Some(old) if old.parent != leaf.parent => {
                push(RevisionKind::Move, &leaf.id, old.parent.clone(), leaf.parent.clone())
            }
            Some(_) => {}
            None => push(
                RevisionKind::AddLeaf,
                &leaf.id,
                String::new(),
                serde_json::to_string(leaf).expect("leaf serializes"),
            ),
        }
    }
    Ok(out)
}
