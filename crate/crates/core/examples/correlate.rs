//! Correlating metric columns with human ratings.
//!
//! Three simulated systems translate the same programs with increasingly
//! damaging edits; the ratings are what a reviewer might give each edit.

use anyhow::Result;
use codebleu::score::{score_corpus, EvalConfig};
use codebleu::stats::{correlate, Granularity, HumanScores, SystemScores};
use codebleu::{CorpusRecord, LanguageId};

const PROGRAMS: [&str; 4] = [
    "int sum(int[] a) { int s = 0; for (int x : a) { s += x; } return s; }",
    "int max(int a, int b) { if (a > b) { return a; } return b; }",
    "boolean even(int n) { return n % 2 == 0; }",
    "int fact(int n) { int r = 1; while (n > 1) { r *= n; n--; } return r; }",
];

// (system, edit, rating)
type Edit = fn(&str) -> String;
const SYSTEMS: [(&str, Edit, f64); 3] = [
    (
        "good",
        |s| {
            s.replace("int s", "int total")
                .replace("s +=", "total +=")
                .replace("return s", "return total")
        },
        4.5,
    ),
    (
        "sloppy",
        |s| {
            s.replacen("int", "long", 1)
                .replace("{ s += x; }", "s += x;")
        },
        3.5,
    ),
    (
        "broken",
        |s| {
            s.replace("return s;", "return 0;")
                .replace("return r;", "return n;")
                .replace("return b;", "return a;")
                .replace('>', "<")
        },
        1.5,
    ),
];

fn main() -> Result<()> {
    let cfg = EvalConfig::new(LanguageId::Java);
    let mut human = HumanScores::default();
    let mut scored = Vec::new();
    for (name, edit, rating) in SYSTEMS {
        let records: Vec<CorpusRecord> = PROGRAMS
            .iter()
            .enumerate()
            .map(|(i, p)| CorpusRecord::new(i.to_string(), edit(p), vec![p.to_string()]))
            .collect();
        for (i, r) in records.iter().enumerate() {
            // Small per-item jitter keeps the pair-level points from tying.
            human.insert(format!("{name}/{}", r.id), rating - 0.1 * i as f64)?;
        }
        scored.push((name, score_corpus(&records, &cfg)?));
    }
    let systems: Vec<SystemScores> = scored
        .iter()
        .map(|(name, s)| SystemScores { name, scores: s })
        .collect();
    for g in [Granularity::System, Granularity::Pair] {
        println!("{g:?}");
        for (metric, r) in correlate(&systems, &human, g)? {
            println!(
                "  {metric:<9} {}",
                r.map_or("undefined".into(), |r| format!("{r:+.4}"))
            );
        }
    }
    Ok(())
}
