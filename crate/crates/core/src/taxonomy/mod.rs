//! Taxonomy tree data model.
//!
//! A [`Taxonomy`] is stored as two flat node tables (categories and leaves)
//! linked by parent ids. The children of a category are its leaves, in leaf
//! table order, followed by its subcategories, in category table order. A
//! flat representation can express malformed trees (cycles, dangling parent
//! references), which is what [`validate_taxonomy`] exists to catch; every
//! revision operation returns a new value and rejects inputs that would
//! break the structural invariants.

mod canonical;
mod diff;
mod document;
mod revision;
mod validate;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{canonical_taxonomy, TRAFFIC_AGENTS_EXPANSION};
pub use diff::diff;
pub use document::{deserialize, serialize, TAXONOMY_SCHEMA};
pub use revision::NewLeaf;
pub use validate::{validate_taxonomy, Violation, ViolationCode, MAX_DEPTH};

/// Sentinel used by annotations when no leaf fits. Reserved; never a leaf id.
pub const UNCLASSIFIED: &str = "Unclassified";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// `None` for top-level categories.
    #[serde(default)]
    pub parent: Option<String>,
}

/// A terminal element class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementClass {
    pub id: String,
    pub name: String,
    pub parent: String,
    pub definition: String,
    #[serde(default)]
    pub example_refs: Vec<String>,
    #[serde(default)]
    pub mitigation_refs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RevisionKind {
    AddLeaf,
    AmendDefinition,
    Rename,
    Move,
}

impl RevisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RevisionKind::AddLeaf => "add-leaf",
            RevisionKind::AmendDefinition => "amend-definition",
            RevisionKind::Rename => "rename",
            RevisionKind::Move => "move",
        }
    }
}

/// One append-only amendment.
///
/// `before`/`after` carry the changed text: definitions for amendments,
/// names for renames, parent ids for moves. For `add-leaf`, `after` holds
/// the new leaf encoded as a JSON object and `before` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionEntry {
    pub sequence: u32,
    pub kind: RevisionKind,
    pub target_id: String,
    #[serde(default)]
    pub before: String,
    pub after: String,
    pub rationale: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub version: u32,
    pub categories: Vec<CategoryNode>,
    pub leaves: Vec<ElementClass>,
    #[serde(default)]
    pub revisions: Vec<RevisionEntry>,
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("definition must not be empty")]
    EmptyDefinition,
    #[error("name must not be empty")]
    EmptyName,
    #[error("rationale must not be empty")]
    EmptyRationale,
    #[error("duplicate leaf id `{0}`")]
    DuplicateLeafId(String),
    #[error("duplicate leaf name `{0}`")]
    DuplicateLeafName(String),
    #[error("invalid leaf id `{0}`: expected an alphanumeric token")]
    InvalidId(String),
    #[error("version order: {from} is newer than {to}")]
    VersionOrder { from: u32, to: u32 },
    #[error("cannot express change as a revision: {0}")]
    UnsupportedChange(String),
    #[error("invalid revision entry {sequence}: {message}")]
    InvalidRevision { sequence: u32, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("taxonomy failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("{} at {}", v.code, v.path))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = TaxonomyError> = std::result::Result<T, E>;

impl Taxonomy {
    pub fn leaf(&self, id: &str) -> Option<&ElementClass> {
        self.leaves.iter().find(|l| l.id == id)
    }

    pub fn category(&self, id: &str) -> Option<&CategoryNode> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn top_level(&self) -> impl Iterator<Item = &CategoryNode> {
        self.categories.iter().filter(|c| c.parent.is_none())
    }

    pub fn child_leaves<'a>(&'a self, parent: &'a str) -> impl Iterator<Item = &'a ElementClass> {
        self.leaves.iter().filter(move |l| l.parent == parent)
    }

    pub fn child_categories<'a>(&'a self, parent: &'a str) -> impl Iterator<Item = &'a CategoryNode> {
        self.categories
            .iter()
            .filter(move |c| c.parent.as_deref() == Some(parent))
    }

    /// Leaves in tree pre-order. Unreachable leaves of a malformed tree are
    /// omitted.
    pub fn leaves_preorder(&self) -> Vec<&ElementClass> {
        let mut out = Vec::with_capacity(self.leaves.len());
        for top in self.top_level() {
            self.collect_leaves(&top.id, &mut out, 0);
        }
        out
    }

    fn collect_leaves<'a>(&'a self, id: &'a str, out: &mut Vec<&'a ElementClass>, depth: usize) {
        // Bounded so that a malformed table cannot recurse forever.
        if depth > self.categories.len() {
            return;
        }
        out.extend(self.child_leaves(id));
        for sub in self.child_categories(id) {
            self.collect_leaves(&sub.id, out, depth + 1);
        }
    }

    /// Ancestor category names of a leaf, outermost first.
    pub fn category_path(&self, leaf_id: &str) -> Option<Vec<String>> {
        let leaf = self.leaf(leaf_id)?;
        self.ancestors(&leaf.parent)
    }

    fn ancestors(&self, category_id: &str) -> Option<Vec<String>> {
        let mut path = Vec::new();
        let mut cursor = Some(category_id.to_string());
        while let Some(id) = cursor {
            let cat = self.category(&id)?;
            path.push(cat.name.clone());
            if path.len() > self.categories.len() {
                return None;
            }
            cursor = cat.parent.clone();
        }
        path.reverse();
        Some(path)
    }

    /// Resolve a `/`-separated category path. Each segment matches a category
    /// id exactly or a category name case-insensitively. Revision operations
    /// also accept a bare category id.
    pub fn resolve_category_path(&self, path: &str) -> Option<&CategoryNode> {
        let mut current: Option<&CategoryNode> = None;
        for segment in path.split('/').map(str::trim).filter(|s| !s.is_empty()) {
            let parent = current.map(|c| c.id.as_str());
            current = Some(self.categories.iter().find(|c| {
                c.parent.as_deref() == parent && (c.id == segment || c.name.eq_ignore_ascii_case(segment))
            })?);
        }
        current
    }

    /// Leaf names keyed by id, for every leaf in the table.
    pub fn leaf_names(&self) -> BTreeMap<&str, &str> {
        self.leaves.iter().map(|l| (l.id.as_str(), l.name.as_str())).collect()
    }

    /// Structural equality of the trees: same categories and, per parent,
    /// the same ordered leaves with the same content. Versions and revision
    /// logs are ignored.
    pub fn tree_eq(&self, other: &Taxonomy) -> bool {
        if self.categories != other.categories || self.leaves.len() != other.leaves.len() {
            return false;
        }
        self.categories
            .iter()
            .all(|c| self.child_leaves(&c.id).eq(other.child_leaves(&c.id)))
            && self.leaves.iter().all(|l| other.leaf(&l.id) == Some(l))
    }
}

/// Find a leaf by exact id, falling back to a case-insensitive name match.
pub fn lookup_leaf<'a>(t: &'a Taxonomy, key: &str) -> Result<&'a ElementClass> {
    let key = key.trim();
    t.leaf(key)
        .or_else(|| {
            let lowered = key.to_lowercase();
            t.leaves.iter().find(|l| l.name.to_lowercase() == lowered)
        })
        .ok_or_else(|| TaxonomyError::NotFound(key.to_string()))
}

/// `true` for a well-formed leaf id: one uppercase letter for canonical
/// leaves, or an ASCII alphanumeric token (underscores allowed) for
/// extensions. The annotation sentinel is reserved.
pub fn is_valid_leaf_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 32
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && id.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && !id.eq_ignore_ascii_case(UNCLASSIFIED)
}

/// Every known version of a taxonomy, reconstructed from the latest value
/// by inverting its revision log.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TaxonomyRegistry {
    versions: BTreeMap<u32, Taxonomy>,
}

impl TaxonomyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_latest(latest: &Taxonomy) -> Result<Self> {
        let mut registry = Self::new();
        for v in 1..=latest.version {
            registry.insert(latest.at_version(v)?);
        }
        Ok(registry)
    }

    pub fn insert(&mut self, t: Taxonomy) {
        self.versions.insert(t.version, t);
    }

    pub fn get(&self, version: u32) -> Option<&Taxonomy> {
        self.versions.get(&version)
    }

    pub fn latest(&self) -> Option<&Taxonomy> {
        self.versions.values().next_back()
    }

    pub fn versions(&self) -> impl Iterator<Item = u32> + '_ {
        self.versions.keys().copied()
    }
}

impl From<Taxonomy> for TaxonomyRegistry {
    fn from(t: Taxonomy) -> Self {
        let mut r = Self::new();
        r.insert(t);
        r
    }
}
