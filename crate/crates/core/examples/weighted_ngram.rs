//! Plain BLEU against the keyword-weighted n-gram match, for a candidate
//! that only differs from its reference in a keyword.

use anyhow::Result;
use codebleu::lexer::tokenize;
use codebleu::ngram::{bleu, weighted_ngram_match, weighted_unigram_match, NGramConfig};
use codebleu::{KeywordSet, LanguageId};

fn main() -> Result<()> {
    let lang = LanguageId::Java;
    let reference = "public static int max(int a, int b) { if (a > b) return a; return b; }";
    let cands = [
        (
            "keyword swapped",
            "public static long max(int a, int b) { if (a > b) return a; return b; }",
        ),
        (
            "name swapped",
            "public static int big(int a, int b) { if (a > b) return a; return b; }",
        ),
    ];
    let kw = KeywordSet::builtin(lang);
    let refs = vec![vec![tokenize(reference, lang)?]];
    for (label, c) in cands {
        let c = vec![tokenize(c, lang)?];
        println!("{label}");
        println!(
            "  bleu              {:.4}",
            bleu(&c, &refs, &NGramConfig::default())?
        );
        for mu in [1.0, 2.0, 5.0, 10.0] {
            let cfg = NGramConfig::default().with_keyword_weight(mu);
            println!(
                "  mu={mu:<4} weighted {:.4}  unigram-only {:.4}",
                weighted_ngram_match(&c, &refs, &kw, &cfg)?,
                weighted_unigram_match(&c, &refs, &kw, &cfg)?,
            );
        }
    }
    Ok(())
}
