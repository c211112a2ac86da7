#![allow(dead_code)]

use std::collections::HashMap;

use codebleu::lexer::tokenize;
use codebleu::{CorpusRecord, LanguageId, TokenKind};
use serde::Deserialize;

#[derive(Deserialize)]
pub struct Snippet {
    pub lang: LanguageId,
    pub id: String,
    pub code: String,
}

pub fn identity_snippets() -> Vec<Snippet> {
    include_str!("../data/identity.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<&[String]> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| &tokens[i..i + n]).collect()
}

fn occurrences(haystack: &[&[String]], gram: &[String]) -> usize {
    haystack.iter().filter(|g| **g == gram).count()
}

/// Clipped and total n-gram counts by plain enumeration.
pub fn brute_clip(cand: &[String], refs: &[Vec<String>], n: usize) -> (usize, usize) {
    let cg = grams(cand, n);
    let rgs: Vec<Vec<&[String]>> = refs.iter().map(|r| grams(r, n)).collect();
    let mut seen: Vec<&[String]> = Vec::new();
    let mut clipped = 0;
    for g in &cg {
        if seen.contains(g) {
            continue;
        }
        seen.push(g);
        let in_cand = occurrences(&cg, g);
        let best_ref = rgs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
        clipped += in_cand.min(best_ref);
    }
    (clipped, cg.len())
}

/// Unsmoothed corpus BLEU-4 with uniform weights and the closest-length
/// brevity penalty (ties take the shorter reference). Panics if some order
/// has no match anywhere in the corpus.
pub fn textbook_bleu(cands: &[Vec<String>], refs: &[Vec<Vec<String>>]) -> f64 {
    let mut log_p = 0.0;
    for n in 1..=4 {
        let (mut num, mut den) = (0usize, 0usize);
        for (c, rs) in cands.iter().zip(refs) {
            let (m, t) = brute_clip(c, rs, n);
            num += m;
            den += t;
        }
        assert!(num > 0, "order {n} has no matches");
        log_p += 0.25 * (num as f64 / den as f64).ln();
    }
    let c: usize = cands.iter().map(Vec::len).sum();
    let r: usize = cands
        .iter()
        .zip(refs)
        .map(|(cand, rs)| {
            rs.iter()
                .map(Vec::len)
                .min_by_key(|&l| (l.abs_diff(cand.len()), l))
                .unwrap()
        })
        .sum();
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    bp * log_p.exp()
}

pub fn token_texts(code: &str, lang: LanguageId) -> Vec<String> {
    tokenize(code, lang)
        .unwrap()
        .tokens()
        .iter()
        .map(|t| t.text.clone())
        .collect()
}

/// Consistently renames every identifier token to a fresh name.
pub fn alpha_rename(code: &str, lang: LanguageId) -> String {
    let seq = tokenize(code, lang).unwrap();
    let mut names: HashMap<String, String> = HashMap::new();
    let mut out = String::new();
    let mut last = 0;
    for (tok, span) in seq.tokens().iter().zip(seq.spans()) {
        if tok.kind != TokenKind::Identifier || tok.text == "var" {
            continue;
        }
        let next = names.len();
        let fresh = names
            .entry(tok.text.clone())
            .or_insert_with(|| format!("zz{next}"))
            .clone();
        out.push_str(&code[last..span.start]);
        out.push_str(&fresh);
        last = span.end;
    }
    out.push_str(&code[last..]);
    out
}

/// Pairs built from the Java identity snippets by simple edits.
pub fn mutated_corpus() -> Vec<CorpusRecord> {
    identity_snippets()
        .into_iter()
        .filter(|s| s.lang == LanguageId::Java)
        .enumerate()
        .map(|(i, s)| {
            let cand = match i % 5 {
                0 => s.code.clone(),
                1 => alpha_rename(&s.code, s.lang),
                2 => s.code.replacen("int", "long", 1),
                3 => {
                    let lines: Vec<&str> = s.code.lines().collect();
                    let keep = lines.len().saturating_sub(2).max(1);
                    lines[..keep].join("\n")
                }
                _ => s.code.replace('+', "-").replace(" < ", " <= "),
            };
            CorpusRecord::new(s.id, cand, vec![s.code])
        })
        .collect()
}
