//! Sweeps component weight combinations and reports how well each one
//! tracks the human ratings. Every pair is parsed once; each combination
//! only re-weights cached component scores.

use anyhow::Result;
use codebleu::score::{score_corpus, EvalConfig};
use codebleu::stats::{sweep_combos, weight_sweep, Granularity, HumanScores, SystemScores};
use codebleu::{parse_count, CorpusRecord, LanguageId};

fn main() -> Result<()> {
    let reference = "int clamp(int v, int lo, int hi) { if (v < lo) { return lo; } if (v > hi) { return hi; } return v; }";
    // Ratings reward correct flow more than surface overlap.
    let outputs = [
        ("same", reference.to_string(), 5.0),
        (
            "renamed",
            reference
                .replace('v', "x")
                .replace("lo", "a")
                .replace("hi", "b"),
            4.8,
        ),
        ("typed", reference.replace("int", "long"), 4.0),
        ("swapped", reference.replace("return lo", "return hi"), 2.0),
        ("inverted", reference.replace("v < lo", "v > lo"), 2.2),
        (
            "stub",
            "int clamp(int v, int lo, int hi) { return v; }".to_string(),
            1.5,
        ),
    ];
    let records: Vec<CorpusRecord> = outputs
        .iter()
        .map(|(id, c, _)| CorpusRecord::new(*id, c.clone(), vec![reference.to_string()]))
        .collect();
    let mut human = HumanScores::default();
    for (id, _, r) in &outputs {
        human.insert(*id, *r)?;
    }
    let scores = score_corpus(&records, &EvalConfig::new(LanguageId::Java))?;
    let parses = parse_count();
    let systems = [SystemScores {
        name: "demo",
        scores: &scores,
    }];
    let rows = weight_sweep(&systems, &human, &sweep_combos(), Granularity::Pair)?;
    for row in &rows {
        println!(
            "{:<28} {}  r = {:+.4}",
            row.combo.label, row.combo.weights, row.r
        );
    }
    println!("extra parses during sweep: {}", parse_count() - parses);
    Ok(())
}
