//! Lexicon-based suggestions of candidate element classes for a narrative.
//!
//! Narratives and patterns are tokenized the same way: Unicode lowercase,
//! split at every non-alphanumeric character. A pattern matches when its
//! tokens occur consecutively in the narrative. A leaf's score is the exact
//! sum of the weights of its distinct matched patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::annotation::AnnotationStore;
use crate::corpus::CollisionReport;
use crate::taxonomy::Taxonomy;

/// Positive rational weight. In documents it is an integer or an `"a/b"`
/// string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub Ratio<u64>);

impl Weight {
    pub fn integer(n: u64) -> Weight {
        Weight(Ratio::from_integer(n))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ratio(self.0, f)
    }
}

fn fmt_ratio(r: Ratio<u64>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("weight `{s}` is not an integer or a/b fraction");
        let (n, d) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: u64 = n.parse().map_err(|_| bad())?;
        let d: u64 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Weight(Ratio::new(n, d)))
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if *self.0.denom() == 1 {
            s.serialize_u64(*self.0.numer())
        } else {
            s.collect_str(self)
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Weight::integer(n)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconEntry {
    pub pattern: String,
    pub weight: Weight,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub lexicon_version: String,
    #[serde(default)]
    pub entries: BTreeMap<String, Vec<LexiconEntry>>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon: {0}")]
    Parse(String),
    #[error("lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon leaf `{0}` is not in the taxonomy")]
    UnknownLeaf(String),
    #[error("lexicon leaf `{leaf_id}` has an empty pattern")]
    EmptyPattern { leaf_id: String },
    #[error("lexicon pattern `{pattern}` of leaf `{leaf_id}` has weight 0")]
    ZeroWeight { leaf_id: String, pattern: String },
    #[error("lexicon pattern `{pattern}` appears twice under leaf `{leaf_id}`")]
    DuplicatePattern { leaf_id: String, pattern: String },
}

impl Lexicon {
    pub fn from_toml(text: &str) -> Result<Lexicon, LexiconError> {
        toml::from_str(text).map_err(|e| LexiconError::Parse(e.to_string()))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("lexicon serializes")
    }

    /// Check that every pattern is non-empty after tokenization, weights are
    /// positive, patterns are distinct per leaf and leaves exist in `taxonomy`.
    pub fn validate(&self, taxonomy: &Taxonomy) -> Result<(), LexiconError> {
        for (leaf_id, entries) in &self.entries {
            if taxonomy.leaf(leaf_id).is_none() {
                return Err(LexiconError::UnknownLeaf(leaf_id.clone()));
            }
            let mut seen = BTreeSet::new();
            for e in entries {
                let tokens = tokenize(&e.pattern);
                if tokens.is_empty() {
                    return Err(LexiconError::EmptyPattern {
                        leaf_id: leaf_id.clone(),
                    });
                }
                if *e.weight.0.numer() == 0 {
                    return Err(LexiconError::ZeroWeight {
                        leaf_id: leaf_id.clone(),
                        pattern: e.pattern.clone(),
                    });
                }
                if !seen.insert(tokens) {
                    return Err(LexiconError::DuplicatePattern {
                        leaf_id: leaf_id.clone(),
                        pattern: e.pattern.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn weight(&self, leaf_id: &str, pattern: &str) -> Option<Weight> {
        self.entries
            .get(leaf_id)?
            .iter()
            .find(|e| e.pattern == pattern)
            .map(|e| e.weight)
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whether `phrase` occurs as consecutive tokens of `tokens`.
pub fn contains_phrase<S: AsRef<str>>(tokens: &[String], phrase: &[S]) -> bool {
    !phrase.is_empty()
        && tokens
            .windows(phrase.len())
            .any(|w| w.iter().zip(phrase).all(|(a, b)| a == b.as_ref()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub leaf_id: String,
    pub score: Ratio<u64>,
    /// Matched patterns in lexicon order.
    pub matched: Vec<String>,
}

impl Serialize for Suggestion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            leaf_id: &'a str,
            score: Weight,
            matched: &'a [String],
        }
        Repr {
            leaf_id: &self.leaf_id,
            score: Weight(self.score),
            matched: &self.matched,
        }
        .serialize(s)
    }
}

/// Suggestions ordered by score descending, then leaf id ascending. Leaves
/// absent from `taxonomy` are never suggested.
pub fn suggest(narrative: &str, lexicon: &Lexicon, taxonomy: &Taxonomy) -> Vec<Suggestion> {
    let tokens = tokenize(narrative);
    if tokens.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<Suggestion> = lexicon
        .entries
        .iter()
        .filter(|(id, _)| taxonomy.leaf(id).is_some())
        .filter_map(|(id, entries)| {
            let mut seen = BTreeSet::new();
            let mut score = Ratio::from_integer(0);
            let mut matched = Vec::new();
            for e in entries {
                let p = tokenize(&e.pattern);
                if contains_phrase(&tokens, &p) && seen.insert(p) {
                    score += e.weight.0;
                    matched.push(e.pattern.clone());
                }
            }
            (!matched.is_empty()).then(|| Suggestion {
                leaf_id: id.clone(),
                score,
                matched,
            })
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.leaf_id.cmp(&b.leaf_id)));
    out
}

fn ratio(n: u64, d: u64) -> Option<Ratio<u64>> {
    (d > 0).then(|| Ratio::new(n, d))
}

fn ser_opt_ratio<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => Weight(*r).serialize(s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeafMetrics {
    pub leaf_id: String,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    /// `None` when the leaf never occurs in the gold tags.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub recall: Option<Ratio<u64>>,
    /// `None` when the leaf is never predicted.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub precision: Option<Ratio<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportMetrics {
    pub report_id: String,
    pub gold: BTreeSet<String>,
    pub predicted: Vec<String>,
    pub hits: u64,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub recall: Option<Ratio<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaggerEvaluation {
    pub per_leaf: Vec<LeafMetrics>,
    pub per_report: Vec<ReportMetrics>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub micro_recall: Option<Ratio<u64>>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub micro_precision: Option<Ratio<u64>>,
}

impl TaggerEvaluation {
    pub fn report(&self, report_id: &str) -> Option<&ReportMetrics> {
        self.per_report.iter().find(|r| r.report_id == report_id)
    }
}

/// Score the lexicon against the effective annotations of `store`. For each
/// annotated report found in `reports`, the top k suggestions with k the
/// number of gold tags are the predictions. Annotations without a matching
/// report are skipped.
pub fn evaluate_tagger(
    store: &AnnotationStore,
    reports: &[CollisionReport],
    lexicon: &Lexicon,
    taxonomy: &Taxonomy,
) -> TaggerEvaluation {
    let narratives: BTreeMap<&str, &str> = reports
        .iter()
        .map(|r| (r.report_id.as_str(), r.narrative.as_str()))
        .collect();
    let mut counts: BTreeMap<String, [u64; 3]> = BTreeMap::new();
    let mut per_report = Vec::new();
    for a in store.effective_annotations() {
        let Some(narrative) = narratives.get(a.report_id.as_str()) else {
            continue;
        };
        let predicted: Vec<String> = suggest(narrative, lexicon, taxonomy)
            .into_iter()
            .take(a.tags.len())
            .map(|s| s.leaf_id)
            .collect();
        let mut hits = 0;
        for p in &predicted {
            let c = counts.entry(p.clone()).or_default();
            if a.tags.contains(p) {
                c[0] += 1;
                hits += 1;
            } else {
                c[1] += 1;
            }
        }
        for g in a.tags.iter().filter(|g| !predicted.contains(g)) {
            counts.entry(g.clone()).or_default()[2] += 1;
        }
        per_report.push(ReportMetrics {
            report_id: a.report_id.clone(),
            gold: a.tags.clone(),
            predicted,
            hits,
            recall: ratio(hits, a.tags.len() as u64),
        });
    }
    let per_leaf: Vec<LeafMetrics> = counts
        .into_iter()
        .map(|(leaf_id, [tp, fp, fnn])| LeafMetrics {
            leaf_id,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fnn,
            recall: ratio(tp, tp + fnn),
            precision: ratio(tp, tp + fp),
        })
        .collect();
    let tp: u64 = per_leaf.iter().map(|l| l.true_positives).sum();
    let gold: u64 = per_leaf.iter().map(|l| l.true_positives + l.false_negatives).sum();
    let predicted: u64 = per_leaf.iter().map(|l| l.true_positives + l.false_positives).sum();
    TaggerEvaluation {
        per_leaf,
        per_report,
        micro_recall: ratio(tp, gold),
        micro_precision: ratio(tp, predicted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::canonical_taxonomy;

    fn lex(entries: &[(&str, &[(&str, &str)])]) -> Lexicon {
        Lexicon {
            lexicon_version: "t".into(),
            entries: entries
                .iter()
                .map(|(id, es)| {
                    let es = es
                        .iter()
                        .map(|(p, w)| LexiconEntry {
                            pattern: p.to_string(),
                            weight: w.parse().unwrap(),
                        })
                        .collect();
                    (id.to_string(), es)
                })
                .collect(),
        }
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("Rear-ended, at NIGHT!"), ["rear", "ended", "at", "night"]);
        assert_eq!(tokenize("ÉCLAIR über"), ["éclair", "über"]);
        assert!(tokenize("  -- ").is_empty());
    }

    #[test]
    fn phrase_and_whole_word_matching() {
        let t = canonical_taxonomy();
        let l = lex(&[("M", &[("rear-ended", "2"), ("car", "1")]), ("E", &[("night", "1/2")])]);
        let s = suggest("A scar; the AV was rear ended at night.", &l, &t);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].leaf_id, "M");
        assert_eq!(s[0].matched, ["rear-ended"]);
        assert_eq!(s[1].score, Ratio::new(1, 2));
        assert!(suggest("", &l, &t).is_empty());
    }

    #[test]
    fn pattern_counted_once_and_ties_by_id() {
        let t = canonical_taxonomy();
        let l = lex(&[("M", &[("car", "1")]), ("F", &[("rain", "1")])]);
        let s = suggest("car car car in the rain", &l, &t);
        assert_eq!(s.iter().map(|s| s.leaf_id.as_str()).collect::<Vec<_>>(), ["F", "M"]);
        assert_eq!(s[1].score, Ratio::from_integer(1));
    }

    #[test]
    fn weights_parse_and_render() {
        let w: Weight = "6/4".parse().unwrap();
        assert_eq!(w.to_string(), "3/2");
        assert!("1/0".parse::<Weight>().is_err());
        assert!("-1".parse::<Weight>().is_err());
        let l = Lexicon::from_toml("lexicon_version = \"x\"\n[entries]\nH = [{ pattern = \"dog\", weight = 2 }, { pattern = \"deer\", weight = \"1/3\" }]\n").unwrap();
        assert_eq!(l.weight("H", "deer"), Some(Weight(Ratio::new(1, 3))));
        assert_eq!(Lexicon::from_toml(&l.to_toml()).unwrap(), l);
    }

    #[test]
    fn validation() {
        let t = canonical_taxonomy();
        assert!(matches!(
            lex(&[("Z", &[("x", "1")])]).validate(&t),
            Err(LexiconError::UnknownLeaf(_))
        ));
        assert!(matches!(
            lex(&[("H", &[("--", "1")])]).validate(&t),
            Err(LexiconError::EmptyPattern { .. })
        ));
        assert!(matches!(
            lex(&[("H", &[("dog", "0")])]).validate(&t),
            Err(LexiconError::ZeroWeight { .. })
        ));
        assert!(matches!(
            lex(&[("H", &[("Dog", "1"), ("dog", "2")])]).validate(&t),
            Err(LexiconError::DuplicatePattern { .. })
        ));
    }

    #[test]
    fn empty_store_and_empty_lexicon() {
        let t = canonical_taxonomy();
        let store = AnnotationStore::new(t.clone().into());
        let e = evaluate_tagger(&store, &[], &lex(&[]), &t);
        assert!(e.per_leaf.is_empty() && e.per_report.is_empty());
        assert_eq!(e.micro_recall, None);
    }
}
