//! Structural validation of a taxonomy tree.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Taxonomy;

/// Maximum node depth counting the implicit root as depth 1:
/// root, category, subcategory, leaf.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    DuplicateLeafId,
    DuplicateLeafName,
    Cycle,
    OrphanNode,
    EmptyDefinition,
    DepthExceeded,
    EmptyTree,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, path: String, subject: &str) -> Self {
        let message = match code {
            ViolationCode::DuplicateLeafId => format!("node id `{subject}` is already used"),
            ViolationCode::DuplicateLeafName => {
                format!("leaf name `{subject}` is already used (case-insensitive)")
            }
            ViolationCode::Cycle => format!("category `{subject}` is its own ancestor"),
            ViolationCode::OrphanNode => {
                format!("node `{subject}` has no parent category reachable from the root")
            }
            ViolationCode::EmptyDefinition => format!("leaf `{subject}` has an empty definition"),
            ViolationCode::DepthExceeded => {
                format!("node `{subject}` is deeper than {MAX_DEPTH} levels")
            }
            ViolationCode::EmptyTree => "taxonomy has no leaves".to_string(),
        };
        Self { code, path, message }
    }
}

#[derive(Clone, Copy)]
enum NodeRef {
    Category(usize),
    Leaf(usize),
}

/// Check every structural invariant. Returns an empty list iff the taxonomy
/// is well formed. Violations are ordered by tree pre-order position, then
/// by code; nodes unreachable from the root sort after all reachable nodes,
/// in table order.
pub fn validate_taxonomy(t: &Taxonomy) -> Vec<Violation> {
    let mut found: Vec<(usize, Violation)> = Vec::new();

    if t.leaves.is_empty() {
        found.push((0, Violation::new(ViolationCode::EmptyTree, String::new(), "")));
    }

    // Pre-order walk from the top-level categories.
    let mut order: Vec<(NodeRef, usize, String)> = Vec::new();
    let mut visited_cats = vec![false; t.categories.len()];
    let mut visited_leaves = vec![false; t.leaves.len()];
    let mut stack: Vec<(NodeRef, usize, String)> = t
        .categories
        .iter()
        .enumerate()
        .filter(|(_, c)| c.parent.is_none())
        .rev()
        .map(|(i, c)| (NodeRef::Category(i), 2, c.name.clone()))
        .collect();
    while let Some((node, depth, path)) = stack.pop() {
        if let NodeRef::Category(ci) = node {
            if visited_cats[ci] {
                continue;
            }
            visited_cats[ci] = true;
            let id = &t.categories[ci].id;
            let mut children: Vec<(NodeRef, usize, String)> = Vec::new();
            for (li, l) in t.leaves.iter().enumerate() {
                if &l.parent == id && !visited_leaves[li] {
                    children.push((NodeRef::Leaf(li), depth + 1, format!("{path}/{}", l.name)));
                }
            }
            for (cj, c) in t.categories.iter().enumerate() {
                if c.parent.as_deref() == Some(id.as_str()) && !visited_cats[cj] {
                    children.push((NodeRef::Category(cj), depth + 1, format!("{path}/{}", c.name)));
                }
            }
            order.push((node, depth, path));
            stack.extend(children.into_iter().rev());
        } else if let NodeRef::Leaf(li) = node {
            if visited_leaves[li] {
                continue;
            }
            visited_leaves[li] = true;
            order.push((node, depth, path));
        }
    }
    let reachable = order.len();

    let mut seen_ids: HashSet<&str> = HashSet::new();
    let mut seen_names: HashSet<String> = HashSet::new();
    let mut check_fields = |pos: usize, node: NodeRef, path: &str, found: &mut Vec<(usize, Violation)>| {
        let (id, leaf) = match node {
            NodeRef::Category(i) => (t.categories[i].id.as_str(), None),
            NodeRef::Leaf(i) => (t.leaves[i].id.as_str(), Some(&t.leaves[i])),
        };
        if !seen_ids.insert(id) {
            found.push((pos, Violation::new(ViolationCode::DuplicateLeafId, path.into(), id)));
        }
        if let Some(leaf) = leaf {
            if !seen_names.insert(leaf.name.to_lowercase()) {
                found.push((
                    pos,
                    Violation::new(ViolationCode::DuplicateLeafName, path.into(), &leaf.name),
                ));
            }
            if leaf.definition.trim().is_empty() {
                found.push((
                    pos,
                    Violation::new(ViolationCode::EmptyDefinition, path.into(), &leaf.id),
                ));
            }
        }
    };

    for (pos, (node, depth, path)) in order.iter().enumerate() {
        check_fields(pos, *node, path, &mut found);
        if *depth > MAX_DEPTH {
            let id = match node {
                NodeRef::Category(i) => &t.categories[*i].id,
                NodeRef::Leaf(i) => &t.leaves[*i].id,
            };
            found.push((pos, Violation::new(ViolationCode::DepthExceeded, path.clone(), id)));
        }
    }

    // Nodes the walk never reached hang off a cycle or a dangling parent.
    let cat_index: HashMap<&str, usize> = t
        .categories
        .iter()
        .enumerate()
        .rev()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    let mut cycle_reported = vec![false; t.categories.len()];
    let mut pos = reachable;
    for (ci, cat) in t.categories.iter().enumerate() {
        if visited_cats[ci] {
            continue;
        }
        let path = format!("?/{}", cat.name);
        check_fields(pos, NodeRef::Category(ci), &path, &mut found);
        match cat.parent.as_deref().and_then(|p| cat_index.get(p)) {
            None => found.push((pos, Violation::new(ViolationCode::OrphanNode, path, &cat.id))),
            Some(_) => {
                if let Some(cycle) = cycle_through(t, ci, &cat_index) {
                    if !cycle.iter().any(|&c| cycle_reported[c]) {
                        found.push((pos, Violation::new(ViolationCode::Cycle, path, &cat.id)));
                    }
                    for c in cycle {
                        cycle_reported[c] = true;
                    }
                }
            }
        }
        pos += 1;
    }
    for (li, leaf) in t.leaves.iter().enumerate() {
        if visited_leaves[li] {
            continue;
        }
        let path = format!("?/{}", leaf.name);
        check_fields(pos, NodeRef::Leaf(li), &path, &mut found);
        if !cat_index.contains_key(leaf.parent.as_str()) {
            found.push((pos, Violation::new(ViolationCode::OrphanNode, path, &leaf.id)));
        }
        pos += 1;
    }

    found.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.code.cmp(&b.1.code)));
    found.into_iter().map(|(_, v)| v).collect()
}

/// Category indices forming the cycle that `start` lies on, if any.
fn cycle_through(t: &Taxonomy, start: usize, index: &HashMap<&str, usize>) -> Option<Vec<usize>> {
    let mut trail = vec![start];
    let mut cursor = start;
    loop {
        let next = *index.get(t.categories[cursor].parent.as_deref()?)?;
        if next == start {
            return Some(trail);
        }
        if trail.contains(&next) || trail.len() > t.categories.len() {
            // `start` leads into a cycle without being on it.
            return None;
        }
        trail.push(next);
        cursor = next;
    }
}
