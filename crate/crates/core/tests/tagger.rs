use advtax_core::fixtures::{
    appendix_reports, appendix_store, bundled_lexicon, evaluation_corpus, gold_store, CRUISE_REPORT, TESLA_REPORT,
};
use advtax_core::tagger::{evaluate_tagger, suggest};
use advtax_core::taxonomy::canonical_taxonomy;
use num_rational::Ratio;

#[test]
fn bundled_lexicon_is_valid() {
    bundled_lexicon().validate(&canonical_taxonomy()).unwrap();
}

#[test]
fn dog_in_the_road() {
    let t = canonical_taxonomy();
    let lex = bundled_lexicon();
    let s = suggest("a dog ran into the road", &lex, &t);
    assert_eq!(s[0].leaf_id, "H");
    assert_eq!(s[0].score, lex.weight("H", "dog").unwrap().0);
    assert_eq!(s[0].matched, ["dog"]);
    assert!(suggest("", &lex, &t).is_empty());
}

#[test]
fn cruise_suggestions_include_gold_classes() {
    let t = canonical_taxonomy();
    let lex = bundled_lexicon();
    let cruise = appendix_reports()
        .into_iter()
        .find(|r| r.report_id == CRUISE_REPORT)
        .unwrap();
    let s = suggest(&cruise.narrative, &lex, &t);
    for leaf in ["G", "M", "E"] {
        assert!(s.iter().any(|x| x.leaf_id == leaf), "{leaf} missing from {s:?}");
    }
    assert_eq!(s, suggest(&cruise.narrative, &lex, &t));
}

#[test]
fn appendix_recall_floor() {
    let t = canonical_taxonomy();
    let e = evaluate_tagger(&appendix_store(), &appendix_reports(), &bundled_lexicon(), &t);
    for id in [CRUISE_REPORT, TESLA_REPORT] {
        let r = e.report(id).unwrap();
        assert_eq!(r.gold.len(), 5);
        assert!(r.recall.unwrap() >= Ratio::new(3, 5), "{id}: {r:?}");
    }
}

#[test]
fn evaluation_corpus_metrics_are_consistent() {
    let t = canonical_taxonomy();
    let lex = bundled_lexicon();
    let reports = evaluation_corpus().accepted;
    let e = evaluate_tagger(&gold_store(), &reports, &lex, &t);
    assert_eq!(e.per_report.len(), 116);
    let hits: u64 = e.per_report.iter().map(|r| r.hits).sum();
    let gold: u64 = e.per_report.iter().map(|r| r.gold.len() as u64).sum();
    assert_eq!(e.micro_recall, Some(Ratio::new(hits, gold)));
    let tp: u64 = e.per_leaf.iter().map(|l| l.true_positives).sum();
    assert_eq!(tp, hits);
    assert_eq!(e, evaluate_tagger(&gold_store(), &reports, &lex, &t));
}
