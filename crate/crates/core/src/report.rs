//! Score reports. Percentages are scores ×100 written with two decimals, so a
//! JSON report read back and rendered again is byte-identical.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::score::{ComponentScores, CorpusScores, EvalConfig, Weights};

/// A score ×100, serialized with exactly two decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percent(pub f64);

impl Percent {
    pub fn of(score: f64) -> Self {
        Percent(score * 100.0)
    }
}

impl std::fmt::Display for Percent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Percent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub bleu: Percent,
    pub weighted: Percent,
    pub ast: Percent,
    pub dataflow: Option<Percent>,
    pub codebleu: Option<Percent>,
}

impl From<&ComponentScores> for ScoreRow {
    fn from(s: &ComponentScores) -> Self {
        ScoreRow {
            bleu: Percent::of(s.bleu),
            weighted: Percent::of(s.weighted),
            ast: Percent::of(s.ast),
            dataflow: s.dataflow.map(Percent::of),
            codebleu: s.codebleu.map(Percent::of),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub id: String,
    pub scores: ScoreRow,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lang: String,
    pub weights: Weights,
    pub max_order: usize,
    pub keyword_weight: f64,
    pub keywords: String,
    /// Absent components drop out and the remaining weights are rescaled.
    pub renormalize_absent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub config: ConfigEcho,
    pub corpus: ScoreRow,
    pub degraded_pairs: usize,
    pub pairs: Vec<PairRow>,
}

impl ScoreReport {
    /// `keywords` names the keyword source (`builtin` or a path).
    pub fn new(scores: &CorpusScores, cfg: &EvalConfig, keywords: &str) -> Self {
        ScoreReport {
            config: ConfigEcho {
                lang: cfg.lang.name().to_string(),
                weights: cfg.weights,
                max_order: cfg.ngram.max_order,
                keyword_weight: cfg.ngram.keyword_weight,
                keywords: keywords.to_string(),
                renormalize_absent: true,
            },
            corpus: ScoreRow::from(&scores.corpus),
            degraded_pairs: scores.degraded_pairs(),
            pairs: scores
                .pairs
                .iter()
                .map(|p| PairRow {
                    id: p.id.clone(),
                    scores: ScoreRow::from(&p.scores),
                    degraded: p.degraded,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    pub fn to_tsv(&self) -> String {
        fn opt(p: Option<Percent>) -> String {
            p.map_or_else(|| "-".to_string(), |p| p.to_string())
        }
        fn row(id: &str, s: &ScoreRow, degraded: &str) -> String {
            format!(
                "{id}\t{}\t{}\t{}\t{}\t{}\t{degraded}\n",
                s.bleu,
                s.weighted,
                s.ast,
                opt(s.dataflow),
                opt(s.codebleu)
            )
        }
        let mut out = String::from("id\tbleu\tweighted\tast\tdataflow\tcodebleu\tdegraded\n");
        for p in &self.pairs {
            out.push_str(&row(
                &p.id,
                &p.scores,
                if p.degraded { "yes" } else { "no" },
            ));
        }
        out.push_str(&row(
            "corpus",
            &self.corpus,
            &self.degraded_pairs.to_string(),
        ));
        out
    }
}
