//! Append-only revision operations. Each successful operation returns a new
//! taxonomy whose version is one higher and whose revision log gained one
//! entry; the receiver is never modified.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    is_valid_leaf_id, validate_taxonomy, ElementClass, Result, RevisionEntry, RevisionKind, Taxonomy, TaxonomyError,
};

/// Content of a leaf to be added; the parent is given separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewLeaf {
    pub id: String,
    pub name: String,
    pub definition: String,
    #[serde(default)]
    pub example_refs: Vec<String>,
    #[serde(default)]
    pub mitigation_refs: Vec<String>,
}

fn require_rationale(rationale: &str) -> Result<()> {
    if rationale.trim().is_empty() {
        Err(TaxonomyError::EmptyRationale)
    } else {
        Ok(())
    }
}

impl Taxonomy {
    fn push_revision(
        mut self,
        kind: RevisionKind,
        target_id: &str,
        before: String,
        after: String,
        rationale: &str,
        at: DateTime<Utc>,
    ) -> Taxonomy {
        self.version += 1;
        let sequence = self.revisions.last().map_or(1, |r| r.sequence + 1);
        self.revisions.push(RevisionEntry {
            sequence,
            kind,
            target_id: target_id.to_string(),
            before,
            after,
            rationale: rationale.to_string(),
            timestamp: at,
        });
        self
    }

    pub fn amend_definition(&self, leaf_id: &str, definition: &str, rationale: &str) -> Result<Taxonomy> {
        self.amend_definition_at(leaf_id, definition, rationale, Utc::now())
    }

    pub fn amend_definition_at(
        &self,
        leaf_id: &str,
        definition: &str,
        rationale: &str,
        at: DateTime<Utc>,
    ) -> Result<Taxonomy> {
        let idx = self
            .leaves
            .iter()
            .position(|l| l.id == leaf_id)
            .ok_or_else(|| TaxonomyError::NotFound(leaf_id.to_string()))?;
        if definition.trim().is_empty() {
            return Err(TaxonomyError::EmptyDefinition);
        }
        require_rationale(rationale)?;
        let mut next = self.clone();
        let before = std::mem::replace(&mut next.leaves[idx].definition, definition.to_string());
        Ok(next.push_revision(
            RevisionKind::AmendDefinition,
            leaf_id,
            before,
            definition.to_string(),
            rationale,
            at,
        ))
    }

    pub fn add_leaf(&self, parent_path: &str, leaf: NewLeaf, rationale: &str) -> Result<Taxonomy> {
        self.add_leaf_at(parent_path, leaf, rationale, Utc::now())
    }

    pub fn add_leaf_at(
        &self,
        parent_path: &str,
        leaf: NewLeaf,
        rationale: &str,
        at: DateTime<Utc>,
    ) -> Result<Taxonomy> {
        let parent = self
            .resolve_category_path(parent_path)
            .or_else(|| self.category(parent_path))
            .ok_or_else(|| TaxonomyError::NotFound(parent_path.to_string()))?
            .id
            .clone();
        if !is_valid_leaf_id(&leaf.id) {
            return Err(TaxonomyError::InvalidId(leaf.id));
        }
        if self.leaf(&leaf.id).is_some() || self.category(&leaf.id).is_some() {
            return Err(TaxonomyError::DuplicateLeafId(leaf.id));
        }
        let lowered = leaf.name.to_lowercase();
        if leaf.name.trim().is_empty() || self.leaves.iter().any(|l| l.name.to_lowercase() == lowered) {
            return Err(TaxonomyError::DuplicateLeafName(leaf.name));
        }
        if leaf.definition.trim().is_empty() {
            return Err(TaxonomyError::EmptyDefinition);
        }
        require_rationale(rationale)?;
        let element = ElementClass {
            id: leaf.id,
            name: leaf.name,
            parent,
            definition: leaf.definition,
            example_refs: leaf.example_refs,
            mitigation_refs: leaf.mitigation_refs,
        };
        let mut next = self.clone();
        next.leaves.push(element.clone());
        // Depth is the one invariant a valid parent cannot guarantee.
        if !validate_taxonomy(&next).is_empty() {
            return Err(TaxonomyError::Validation(validate_taxonomy(&next)));
        }
        let after = serde_json::to_string(&element).expect("leaf serializes");
        Ok(next.push_revision(RevisionKind::AddLeaf, &element.id, String::new(), after, rationale, at))
    }

    /// Rename a leaf or a category.
    pub fn rename(&self, target_id: &str, new_name: &str, rationale: &str) -> Result<Taxonomy> {
        self.rename_at(target_id, new_name, rationale, Utc::now())
    }

    pub fn rename_at(&self, target_id: &str, new_name: &str, rationale: &str, at: DateTime<Utc>) -> Result<Taxonomy> {
        require_rationale(rationale)?;
        let mut next = self.clone();
        let before = if let Some(leaf) = next.leaves.iter_mut().find(|l| l.id == target_id) {
            std::mem::replace(&mut leaf.name, new_name.to_string())
        } else if let Some(cat) = next.categories.iter_mut().find(|c| c.id == target_id) {
            std::mem::replace(&mut cat.name, new_name.to_string())
        } else {
            return Err(TaxonomyError::NotFound(target_id.to_string()));
        };
        if new_name.trim().is_empty() {
            return Err(TaxonomyError::EmptyName);
        }
        let lowered = new_name.to_lowercase();
        if self.leaf(target_id).is_some()
            && self
                .leaves
                .iter()
                .any(|l| l.id != target_id && l.name.to_lowercase() == lowered)
        {
            return Err(TaxonomyError::DuplicateLeafName(new_name.to_string()));
        }
        Ok(next.push_revision(
            RevisionKind::Rename,
            target_id,
            before,
            new_name.to_string(),
            rationale,
            at,
        ))
    }

    /// Move a leaf under another category. The leaf keeps its place in the
    /// leaf table, so its position among its new siblings follows table
    /// order and moving it back restores the original tree exactly.
    pub fn move_leaf(&self, leaf_id: &str, new_parent_path: &str, rationale: &str) -> Result<Taxonomy> {
        self.move_leaf_at(leaf_id, new_parent_path, rationale, Utc::now())
    }

    pub fn move_leaf_at(
        &self,
        leaf_id: &str,
        new_parent_path: &str,
        rationale: &str,
        at: DateTime<Utc>,
    ) -> Result<Taxonomy> {
        let parent = self
            .resolve_category_path(new_parent_path)
            .or_else(|| self.category(new_parent_path))
            .ok_or_else(|| TaxonomyError::NotFound(new_parent_path.to_string()))?
            .id
            .clone();
        require_rationale(rationale)?;
        let mut next = self.clone();
        let idx = next
            .leaves
            .iter()
            .position(|l| l.id == leaf_id)
            .ok_or_else(|| TaxonomyError::NotFound(leaf_id.to_string()))?;
        if next.leaves[idx].parent == parent {
            return Err(TaxonomyError::UnsupportedChange(format!(
                "leaf `{leaf_id}` is already under `{parent}`"
            )));
        }
        let before = std::mem::replace(&mut next.leaves[idx].parent, parent.clone());
        if !validate_taxonomy(&next).is_empty() {
            return Err(TaxonomyError::Validation(validate_taxonomy(&next)));
        }
        Ok(next.push_revision(RevisionKind::Move, leaf_id, before, parent, rationale, at))
    }

    /// Replay one revision entry (for example one produced by
    /// [`diff`](super::diff)) on this taxonomy.
    pub fn apply_revision(&self, entry: &RevisionEntry) -> Result<Taxonomy> {
        let invalid = |message: String| TaxonomyError::InvalidRevision {
            sequence: entry.sequence,
            message,
        };
        match entry.kind {
            RevisionKind::AmendDefinition => {
                if self.leaf(&entry.target_id).is_some() {
                    self.amend_definition_at(&entry.target_id, &entry.after, &entry.rationale, entry.timestamp)
                } else if let Some(idx) = self.categories.iter().position(|c| c.id == entry.target_id) {
                    require_rationale(&entry.rationale)?;
                    let mut next = self.clone();
                    let before = std::mem::replace(&mut next.categories[idx].description, entry.after.clone());
                    Ok(next.push_revision(
                        RevisionKind::AmendDefinition,
                        &entry.target_id,
                        before,
                        entry.after.clone(),
                        &entry.rationale,
                        entry.timestamp,
                    ))
                } else {
                    Err(TaxonomyError::NotFound(entry.target_id.clone()))
                }
            }
            RevisionKind::Rename => self.rename_at(&entry.target_id, &entry.after, &entry.rationale, entry.timestamp),
            RevisionKind::Move => self.move_leaf_at(&entry.target_id, &entry.after, &entry.rationale, entry.timestamp),
            RevisionKind::AddLeaf => {
                let leaf: ElementClass =
                    serde_json::from_str(&entry.after).map_err(|e| invalid(format!("add-leaf payload: {e}")))?;
                if leaf.id != entry.target_id {
                    return Err(invalid("add-leaf payload id does not match target".into()));
                }
                let parent = self
                    .category(&leaf.parent)
                    .ok_or_else(|| TaxonomyError::NotFound(leaf.parent.clone()))?;
                let path = self
                    .ancestors(&parent.id)
                    .ok_or_else(|| TaxonomyError::NotFound(leaf.parent.clone()))?
                    .join("/");
                self.add_leaf_at(
                    &path,
                    NewLeaf {
                        id: leaf.id,
                        name: leaf.name,
                        definition: leaf.definition,
                        example_refs: leaf.example_refs,
                        mitigation_refs: leaf.mitigation_refs,
                    },
                    &entry.rationale,
                    entry.timestamp,
                )
            }
        }
    }

    pub fn apply_revisions<'a>(&self, entries: impl IntoIterator<Item = &'a RevisionEntry>) -> Result<Taxonomy> {
        entries.into_iter().try_fold(self.clone(), |t, e| t.apply_revision(e))
    }

    /// Reconstruct an earlier version exactly by undoing revisions newest
    /// first.
    pub fn at_version(&self, version: u32) -> Result<Taxonomy> {
        if version == 0 || version > self.version {
            return Err(TaxonomyError::NotFound(format!("version {version}")));
        }
        let undo = (self.version - version) as usize;
        if undo > self.revisions.len() {
            return Err(TaxonomyError::NotFound(format!("version {version}")));
        }
        let mut t = self.clone();
        for _ in 0..undo {
            let entry = t.revisions.pop().expect("checked length");
            let invalid = |message: &str| TaxonomyError::InvalidRevision {
                sequence: entry.sequence,
                message: message.to_string(),
            };
            match entry.kind {
                RevisionKind::AmendDefinition => {
                    if let Some(l) = t.leaves.iter_mut().find(|l| l.id == entry.target_id) {
                        l.definition = entry.before.clone();
                    } else if let Some(c) = t.categories.iter_mut().find(|c| c.id == entry.target_id) {
                        c.description = entry.before.clone();
                    } else {
                        return Err(invalid("amended node is missing"));
                    }
                }
                RevisionKind::Rename => {
                    if let Some(l) = t.leaves.iter_mut().find(|l| l.id == entry.target_id) {
                        l.name = entry.before.clone();
                    } else if let Some(c) = t.categories.iter_mut().find(|c| c.id == entry.target_id) {
                        c.name = entry.before.clone();
                    } else {
                        return Err(invalid("renamed node is missing"));
                    }
                }
                RevisionKind::Move => {
                    let l = t
                        .leaves
                        .iter_mut()
                        .find(|l| l.id == entry.target_id)
                        .ok_or_else(|| invalid("moved leaf is missing"))?;
                    l.parent = entry.before.clone();
                }
                RevisionKind::AddLeaf => {
                    let idx = t
                        .leaves
                        .iter()
                        .position(|l| l.id == entry.target_id)
                        .ok_or_else(|| invalid("added leaf is missing"))?;
                    t.leaves.remove(idx);
                }
            }
            t.version -= 1;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{canonical_taxonomy, TRAFFIC_AGENTS_EXPANSION};

    fn digital() -> NewLeaf {
        NewLeaf {
            id: "P".into(),
            name: "Digital Infrastructure".into(),
            definition: "Connected roadside units and V2X messaging.".into(),
            example_refs: vec![],
            mitigation_refs: vec![],
        }
    }

    #[test]
    fn amend_traffic_agents() {
        let t = canonical_taxonomy();
        let m = t.leaf("M").unwrap().definition.clone();
        let amended = t
            .amend_definition("M", &format!("{m} {TRAFFIC_AGENTS_EXPANSION}"), "door-opening cases")
            .unwrap();
        assert_eq!(amended.version, 2);
        assert_eq!(amended.revisions.len(), 1);
        let rev = &amended.revisions[0];
        assert_eq!(rev.kind, RevisionKind::AmendDefinition);
        assert_eq!(rev.before, m);
        assert!(rev.after.contains("opened door"));
        // Input untouched.
        assert_eq!(t, canonical_taxonomy());
    }

    #[test]
    fn amend_errors() {
        let t = canonical_taxonomy();
        assert!(matches!(
            t.amend_definition("M", "", "r"),
            Err(TaxonomyError::EmptyDefinition)
        ));
        assert!(matches!(
            t.amend_definition("Z", "x", "r"),
            Err(TaxonomyError::NotFound(_))
        ));
        assert!(matches!(
            t.amend_definition("M", "x", " "),
            Err(TaxonomyError::EmptyRationale)
        ));
    }

    #[test]
    fn add_leaf_under_built() {
        let t = canonical_taxonomy();
        let next = t.add_leaf("Built Environment", digital(), "new element").unwrap();
        assert_eq!(next.leaves.len(), 16);
        assert_eq!(next.version, 2);
        assert!(validate_taxonomy(&next).is_empty());
        assert_eq!(next.category_path("P").unwrap(), vec!["Built Environment"]);
    }

    #[test]
    fn add_leaf_errors() {
        let t = canonical_taxonomy();
        let mut dup = digital();
        dup.id = "A".into();
        assert!(matches!(t.add_leaf("built", dup, "r"), Err(TaxonomyError::DuplicateLeafId(id)) if id == "A"));
        let mut dup = digital();
        dup.name = "WEATHER".into();
        assert!(matches!(
            t.add_leaf("built", dup, "r"),
            Err(TaxonomyError::DuplicateLeafName(_))
        ));
        assert!(matches!(t.add_leaf("Subsea", digital(), "r"), Err(TaxonomyError::NotFound(p)) if p == "Subsea"));
        let mut bad = digital();
        bad.id = "Unclassified".into();
        assert!(matches!(
            t.add_leaf("built", bad, "r"),
            Err(TaxonomyError::InvalidId(_))
        ));
    }

    #[test]
    fn version_tracks_log_length() {
        let t = canonical_taxonomy()
            .add_leaf("built", digital(), "a")
            .unwrap()
            .rename("P", "Digital Roadside", "b")
            .unwrap()
            .move_leaf("P", "Built Environment/Road", "c")
            .unwrap();
        assert_eq!(t.version, 4);
        assert_eq!(t.revisions.len() as u32, t.version - 1);
        let seqs: Vec<u32> = t.revisions.iter().map(|r| r.sequence).collect();
        assert_eq!(seqs, vec![1, 2, 3]);
    }

    #[test]
    fn at_version_undoes_chain() {
        let base = canonical_taxonomy();
        let t = base
            .amend_definition("M", "Any vehicle.", "a")
            .unwrap()
            .add_leaf("aerial", digital(), "b")
            .unwrap()
            .rename("E", "Lighting", "c")
            .unwrap();
        assert_eq!(t.at_version(1).unwrap(), base);
        let v2 = t.at_version(2).unwrap();
        assert_eq!(v2.leaf("M").unwrap().definition, "Any vehicle.");
        assert!(v2.leaf("P").is_none());
        assert!(t.at_version(5).is_err());
    }

    #[test]
    fn replay_reproduces_revisions() {
        let base = canonical_taxonomy();
        let t = base
            .add_leaf("natural", digital(), "new")
            .unwrap()
            .move_leaf("P", "Built Environment/Aerial", "better fit")
            .unwrap();
        let replayed = base.apply_revisions(&t.revisions).unwrap();
        assert_eq!(replayed, t);
    }
}
