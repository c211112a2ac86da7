//! Corpus records and their two on-disk forms.
//!
//! JSONL holds one [`CorpusRecord`] per line. Text mode holds one snippet per
//! line with `\n`, `\t` and `\\` escapes, a hypothesis file plus one file per
//! reference set; record ids are line numbers starting at 0.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub candidate: String,
    pub references: Vec<String>,
}

impl CorpusRecord {
    pub fn new(
        id: impl Into<String>,
        candidate: impl Into<String>,
        references: Vec<String>,
    ) -> Self {
        CorpusRecord {
            id: id.into(),
            candidate: candidate.into(),
            references,
        }
    }

    pub fn reference_strs(&self) -> Vec<&str> {
        self.references.iter().map(String::as_str).collect()
    }
}

/// Checks id uniqueness and that every record has a reference.
pub fn validate(records: &[CorpusRecord]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if r.references.is_empty() {
            return Err(Error::InvalidInput(format!(
                "record `{}` has no references",
                r.id
            )));
        }
        if !seen.insert(r.id.as_str()) {
            return Err(Error::InvalidInput(format!(
                "duplicate record id `{}`",
                r.id
            )));
        }
    }
    Ok(())
}

pub fn parse_jsonl(text: &str) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(line)
            .map_err(|e| Error::InvalidInput(format!("line {}: {e}", i + 1)))?;
        records.push(record);
    }
    validate(&records)?;
    Ok(records)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<CorpusRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text)
}

pub fn to_jsonl(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn unescape_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn escape_line(code: &str) -> String {
    code.replace('\\', "\\\\")
        .replace('\n', "\\n")
        .replace('\t', "\\t")
}

/// Builds records from a hypothesis text and one text per reference set.
pub fn parse_text(hyp: &str, refs: &[&str]) -> Result<Vec<CorpusRecord>> {
    if refs.is_empty() {
        return Err(Error::InvalidInput(
            "at least one reference file is required".into(),
        ));
    }
    let hyps: Vec<&str> = hyp.lines().collect();
    let ref_lines: Vec<Vec<&str>> = refs.iter().map(|r| r.lines().collect()).collect();
    for (k, lines) in ref_lines.iter().enumerate() {
        if lines.len() != hyps.len() {
            return Err(Error::InvalidInput(format!(
                "reference set {} has {} lines, hypotheses have {}",
                k + 1,
                lines.len(),
                hyps.len()
            )));
        }
    }
    Ok(hyps
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let references = ref_lines
                .iter()
                .map(|lines| unescape_line(lines[i]))
                .collect();
            CorpusRecord::new(i.to_string(), unescape_line(h), references)
        })
        .collect())
}

pub fn load_text(hyp: &Path, refs: &[&Path]) -> Result<Vec<CorpusRecord>> {
    let hyp_text = fs::read_to_string(hyp).map_err(|e| Error::io(hyp, e))?;
    let ref_texts = refs
        .iter()
        .map(|p| fs::read_to_string(p).map_err(|e| Error::io(*p, e)))
        .collect::<Result<Vec<_>>>()?;
    let ref_strs: Vec<&str> = ref_texts.iter().map(String::as_str).collect();
    parse_text(&hyp_text, &ref_strs)
}
