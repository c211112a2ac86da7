//! Own test binary: the parse counter is process-wide.

mod common;

use codebleu::parse_count;
use codebleu::score::{score_corpus, EvalConfig};
use codebleu::stats::{
    correlate, sweep_combos, weight_sweep, Granularity, HumanScores, SystemScores,
};
use codebleu::LanguageId;

#[test]
fn sweeping_reuses_cached_scores() {
    let records = common::mutated_corpus();
    let cfg = EvalConfig::new(LanguageId::Java);
    let before = parse_count();
    let scores = score_corpus(&records, &cfg).unwrap();
    let per_pair = parse_count() - before;
    assert_eq!(
        per_pair,
        records
            .iter()
            .map(|r| 1 + r.references.len())
            .sum::<usize>()
    );

    let mut human = HumanScores::default();
    for (i, p) in scores.pairs.iter().enumerate() {
        human.insert(p.id.clone(), 1.0 + (i % 5) as f64).unwrap();
    }
    let systems = [SystemScores {
        name: "s",
        scores: &scores,
    }];
    let after_scoring = parse_count();
    let rows = weight_sweep(&systems, &human, &sweep_combos(), Granularity::Pair).unwrap();
    correlate(&systems, &human, Granularity::Pair).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(parse_count(), after_scoring);
}
