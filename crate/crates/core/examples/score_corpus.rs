//! Corpus scoring from a JSONL file, or from a small built-in corpus, with
//! the report printed as TSV and JSON.
//!
//! Each line is `{"id": ..., "candidate": ..., "references": [...]}`.

use anyhow::Result;
use codebleu::corpus::load_jsonl;
use codebleu::report::ScoreReport;
use codebleu::score::{score_corpus, EvalConfig, Weights};
use codebleu::{CorpusRecord, LanguageId};

fn builtin() -> Vec<CorpusRecord> {
    let r = |s: &str| vec![s.to_string()];
    vec![
        CorpusRecord::new(
            "exact",
            "int sq(int x) { return x * x; }",
            r("int sq(int x) { return x * x; }"),
        ),
        CorpusRecord::new(
            "renamed",
            "int sq(int v) { return v * v; }",
            r("int sq(int x) { return x * x; }"),
        ),
        CorpusRecord::new(
            "extra",
            "int sq(int x) { int y = x; return x * x; }",
            r("int sq(int x) { return x * x; }"),
        ),
    ]
}

fn main() -> Result<()> {
    let records = match std::env::args().nth(1) {
        Some(path) => load_jsonl(path.as_ref())?,
        None => builtin(),
    };
    let cfg = EvalConfig::new(LanguageId::Java).with_weights(Weights::RECOMMENDED);
    let scores = score_corpus(&records, &cfg)?;
    let report = ScoreReport::new(&scores, &cfg, "builtin");
    print!("{}", report.to_tsv());
    println!();
    print!("{}", report.to_json());
    Ok(())
}
