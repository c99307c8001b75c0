use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use num_rational::Ratio;
use serde::{Serialize, Serializer};

use super::{AnnotationStore, Difficulty, Primary};
use crate::taxonomy::Taxonomy;

/// Share of annotated reports whose primary element is a leaf. An empty
/// store counts as fully successful.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuccessRate {
    pub classified: u64,
    pub total: u64,
}

impl SuccessRate {
    pub fn ratio(self) -> Ratio<u64> {
        if self.total == 0 {
            Ratio::from_integer(1)
        } else {
            Ratio::new(self.classified, self.total)
        }
    }

    /// Percentage rounded half-up to one decimal place, e.g. `98.3%`.
    pub fn percent(self) -> String {
        let r = self.ratio();
        // Tenths of a percent, rounded half up, in exact integer arithmetic.
        let tenths = (r.numer() * 2000 + r.denom()) / (r.denom() * 2);
        format!("{}.{}%", tenths / 10, tenths % 10)
    }
}

impl fmt::Display for SuccessRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({})", self.classified, self.total, self.percent())
    }
}

impl Serialize for SuccessRate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            classified: u64,
            total: u64,
            percent: String,
        }
        Repr {
            classified: self.classified,
            total: self.total,
            percent: self.percent(),
        }
        .serialize(s)
    }
}

/// Per-class counts, difficulty histogram and success rate over the
/// effective annotation of every annotated report. Leaf-keyed maps use leaf
/// names, list every leaf of the taxonomy (zeros included), and follow tree
/// pre-order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub taxonomy_version: u32,
    pub total: u64,
    pub primary_counts: IndexMap<String, u64>,
    pub unclassified: u64,
    /// Reports in which each leaf appears among the tags at all.
    pub tag_counts: IndexMap<String, u64>,
    pub difficulty_histogram: BTreeMap<u8, u64>,
    pub success_rate: SuccessRate,
    /// Reports with at most one tag.
    pub single_element: u64,
    pub multi_element: u64,
}

impl CoverageReport {
    pub fn primary_count(&self, leaf_name: &str) -> u64 {
        self.primary_counts.get(leaf_name).copied().unwrap_or(0)
    }
}

impl AnnotationStore {
    pub fn coverage(&self, taxonomy: &Taxonomy) -> CoverageReport {
        let zeroed: IndexMap<String, u64> = taxonomy
            .leaves_preorder()
            .into_iter()
            .map(|l| (l.name.clone(), 0))
            .collect();
        let name_of = |id: &str| -> String {
            taxonomy
                .leaf(id)
                .or_else(|| self.registry.latest().and_then(|t| t.leaf(id)))
                .map_or_else(|| id.to_string(), |l| l.name.clone())
        };

        let mut report = CoverageReport {
            taxonomy_version: taxonomy.version,
            total: 0,
            primary_counts: zeroed.clone(),
            unclassified: 0,
            tag_counts: zeroed,
            difficulty_histogram: Difficulty::ALL.iter().map(|d| (d.grade(), 0)).collect(),
            success_rate: SuccessRate {
                classified: 0,
                total: 0,
            },
            single_element: 0,
            multi_element: 0,
        };
        for a in self.effective_annotations() {
            report.total += 1;
            match &a.primary {
                Primary::Leaf(id) => *report.primary_counts.entry(name_of(id)).or_insert(0) += 1,
                Primary::Unclassified => report.unclassified += 1,
            }
            for tag in &a.tags {
                *report.tag_counts.entry(name_of(tag)).or_insert(0) += 1;
            }
            *report.difficulty_histogram.entry(a.difficulty).or_insert(0) += 1;
            if a.tags.len() <= 1 {
                report.single_element += 1;
            } else {
                report.multi_element += 1;
            }
        }
        report.success_rate = SuccessRate {
            classified: report.total - report.unclassified,
            total: report.total,
        };
        report
    }

    pub fn success_rate(&self) -> SuccessRate {
        let total = self.len() as u64;
        let unclassified = self
            .effective_annotations()
            .filter(|a| a.primary.is_unclassified())
            .count() as u64;
        SuccessRate {
            classified: total - unclassified,
            total,
        }
    }
}
