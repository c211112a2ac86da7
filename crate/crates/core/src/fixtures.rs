//! Built-in fixture pairs with their expected component values.
//!
//! Each expectation records where its value comes from: `published` values
//! are the numbers reported for the original examples (checked within a
//! tolerance), `exact` values follow from the construction of the pair, and
//! `recomputed` values were derived by hand or by an independent
//! implementation for this transcription.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lexer::LanguageId;
use crate::score::{pair_stats, ComponentScores, EvalConfig};

const FIXTURES: &str = include_str!("../fixtures/fixtures.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Bleu,
    Weighted,
    Ast,
    Dataflow,
    Codebleu,
}

impl Component {
    pub fn of(self, s: &ComponentScores) -> Option<f64> {
        match self {
            Component::Bleu => Some(s.bleu),
            Component::Weighted => Some(s.weighted),
            Component::Ast => Some(s.ast),
            Component::Dataflow => s.dataflow,
            Component::Codebleu => s.codebleu,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Bleu => "bleu",
            Component::Weighted => "weighted",
            Component::Ast => "ast",
            Component::Dataflow => "dataflow",
            Component::Codebleu => "codebleu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Published,
    Exact,
    Recomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "lowercase")]
pub enum Check {
    Approx {
        component: Component,
        value: f64,
        tolerance: f64,
    },
    Below {
        component: Component,
        bound: f64,
    },
    Greater {
        component: Component,
        than: Component,
    },
    Degraded {
        value: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    #[serde(flatten)]
    pub check: Check,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub language: LanguageId,
    pub candidate: String,
    pub references: Vec<String>,
    pub note: String,
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub description: String,
    pub provenance: Provenance,
    pub passed: bool,
}

impl Fixture {
    pub fn reference_strs(&self) -> Vec<&str> {
        self.references.iter().map(String::as_str).collect()
    }

    /// Scores under equal weights and default n-gram settings.
    pub fn score(&self) -> Result<(ComponentScores, bool)> {
        let cfg = EvalConfig::new(self.language);
        let stats = pair_stats(&self.candidate, &self.reference_strs(), &cfg)?;
        Ok((stats.scores(&cfg), stats.degraded))
    }

    pub fn evaluate(&self) -> Result<Vec<Outcome>> {
        let (scores, degraded) = self.score()?;
        Ok(self
            .expect
            .iter()
            .map(|e| {
                let (description, passed) = check(&e.check, &scores, degraded);
                Outcome {
                    description,
                    provenance: e.provenance,
                    passed,
                }
            })
            .collect())
    }
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |x| format!("{x:.6}"))
}

fn check(c: &Check, s: &ComponentScores, degraded: bool) -> (String, bool) {
    match *c {
        Check::Approx {
            component,
            value,
            tolerance,
        } => {
            let got = component.of(s);
            let ok = got.is_some_and(|g| (g - value).abs() <= tolerance);
            (
                format!(
                    "{} = {value:.6} ± {tolerance} (got {})",
                    component.name(),
                    show(got)
                ),
                ok,
            )
        }
        Check::Below { component, bound } => {
            let got = component.of(s);
            (
                format!("{} < {bound} (got {})", component.name(), show(got)),
                got.is_some_and(|g| g < bound),
            )
        }
        Check::Greater { component, than } => {
            let (a, b) = (component.of(s), than.of(s));
            let ok = matches!((a, b), (Some(a), Some(b)) if a > b);
            (
                format!(
                    "{} > {} (got {} vs {})",
                    component.name(),
                    than.name(),
                    show(a),
                    show(b)
                ),
                ok,
            )
        }
        Check::Degraded { value } => (
            format!("degraded = {value} (got {degraded})"),
            degraded == value,
        ),
    }
}

pub fn load_fixtures() -> Vec<Fixture> {
    FIXTURES
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("embedded fixtures are valid"))
        .collect()
}

pub fn fixture(name: &str) -> Option<Fixture> {
    load_fixtures().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_fixtures_present() {
        let names: Vec<String> = load_fixtures().into_iter().map(|f| f.name).collect();
        for n in [
            "example1",
            "example2",
            "fig2",
            "empty-candidate",
            "unparseable-candidate",
            "keyword-only",
            "loop-with-reassignment",
        ] {
            assert!(names.iter().any(|x| x == n), "missing {n}");
        }
    }

    #[test]
    fn every_expectation_holds() {
        for f in load_fixtures() {
            assert!(!f.expect.is_empty());
            for o in f.evaluate().unwrap() {
                assert!(o.passed, "{}: {}", f.name, o.description);
            }
        }
    }
}
