//! Combining the four components at pair and corpus level.
//!
//! Each pair is parsed once into [`PairStats`], which hold count-level
//! statistics. Corpus scores sum those counts: BLEU and the weighted match use
//! summed n-gram counts with a corpus brevity penalty, the AST and data-flow
//! matches are micro-averaged. Changing weights afterwards only needs
//! [`combine`], never a re-parse.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusRecord};
use crate::dataflow::{self, dfg_of, normalize, DataflowCounts};
use crate::error::{Error, Result};
use crate::lexer::{tokens_of, KeywordSet, LanguageId};
use crate::ngram::{self, NGramConfig, NGramStats};
use crate::parse::parse_snippet;
use crate::syntax::{self, ast_of, subtree_bag, AstCounts};

/// Component weights `alpha` (BLEU), `beta` (weighted), `gamma` (AST),
/// `delta` (data flow).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Weights {
    pub const EQUAL: Weights = Weights {
        alpha: 0.25,
        beta: 0.25,
        gamma: 0.25,
        delta: 0.25,
    };

    pub const RECOMMENDED: Weights = Weights {
        alpha: 0.1,
        beta: 0.1,
        gamma: 0.4,
        delta: 0.4,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let w = Weights {
            alpha,
            beta,
            gamma,
            delta,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.as_array();
        if a.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "weights must be finite and non-negative".into(),
            ));
        }
        if a.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidConfig(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Scaled to sum to 1.
    pub fn normalized(&self) -> Weights {
        let s: f64 = self.as_array().iter().sum();
        Weights {
            alpha: self.alpha / s,
            beta: self.beta / s,
            gamma: self.gamma / s,
            delta: self.delta / s,
        }
    }

    pub fn preset(name: &str) -> Result<Weights> {
        match name {
            "equal" => Ok(Weights::EQUAL),
            "recommended" => Ok(Weights::RECOMMENDED),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (expected equal or recommended)"
            ))),
        }
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights::EQUAL
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.2},{:.2},{:.2},{:.2}",
            self.alpha, self.beta, self.gamma, self.delta
        )
    }
}

/// Parses `a,b,c,d`.
impl FromStr for Weights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad weight `{}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        match parts[..] {
            [a, b, c, d] => Weights::new(a, b, c, d),
            _ => Err(Error::InvalidConfig(format!(
                "expected four comma-separated weights, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub weights: Weights,
    pub ngram: NGramConfig,
    pub lang: LanguageId,
    pub keywords: KeywordSet,
}

impl EvalConfig {
    /// Equal weights, BLEU-4, keyword weight 5, the built-in keyword list.
    pub fn new(lang: LanguageId) -> Self {
        EvalConfig {
            weights: Weights::EQUAL,
            ngram: NGramConfig::default(),
            lang,
            keywords: KeywordSet::builtin(lang),
        }
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_ngram(mut self, ngram: NGramConfig) -> Self {
        self.ngram = ngram;
        self
    }

    pub fn with_keywords(mut self, keywords: KeywordSet) -> Self {
        self.keywords = keywords;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.ngram.validate()
    }
}

/// Component values before combination; `None` marks an absent component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Components {
    pub bleu: Option<f64>,
    pub weighted: Option<f64>,
    pub ast: Option<f64>,
    pub dataflow: Option<f64>,
}

impl Components {
    pub fn all(bleu: f64, weighted: f64, ast: f64, dataflow: f64) -> Self {
        Components {
            bleu: Some(bleu),
            weighted: Some(weighted),
            ast: Some(ast),
            dataflow: Some(dataflow),
        }
    }
}

/// `sum w_i s_i / sum w_i` over present components with positive weight.
pub fn combine(c: &Components, weights: &Weights) -> Result<f64> {
    let pairs = [
        (c.bleu, weights.alpha),
        (c.weighted, weights.beta),
        (c.ast, weights.gamma),
        (c.dataflow, weights.delta),
    ];
    let mut num = 0.0;
    let mut den = 0.0;
    for (score, w) in pairs {
        if let Some(s) = score {
            if w > 0.0 {
                num += w * s;
                den += w;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::AllComponentsAbsent);
    }
    Ok(num / den)
}

/// Scores in `[0, 1]`. Only the data-flow component can be absent, when no
/// reference has any data flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScores {
    pub bleu: f64,
    pub weighted: f64,
    pub ast: f64,
    pub dataflow: Option<f64>,
    /// `None` only when every positively weighted component is absent.
    pub codebleu: Option<f64>,
}

impl ComponentScores {
    pub fn from_components(
        bleu: f64,
        weighted: f64,
        ast: f64,
        dataflow: Option<f64>,
        weights: &Weights,
    ) -> Self {
        let mut s = ComponentScores {
            bleu,
            weighted,
            ast,
            dataflow,
            codebleu: None,
        };
        s.codebleu = combine(&s.components(), weights).ok();
        s
    }

    pub fn components(&self) -> Components {
        Components {
            bleu: Some(self.bleu),
            weighted: Some(self.weighted),
            ast: Some(self.ast),
            dataflow: self.dataflow,
        }
    }

    /// The same components under other weights.
    pub fn reweighted(&self, weights: &Weights) -> Result<f64> {
        combine(&self.components(), weights)
    }
}

/// Count-level statistics of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub bleu: NGramStats,
    pub weighted: NGramStats,
    pub ast: AstCounts,
    /// Pair-level AST ratio (differs from `ast.ratio()` only for empty references).
    pub ast_ratio: f64,
    pub dataflow: Option<DataflowCounts>,
    /// Some snippet of the pair did not parse cleanly.
    pub degraded: bool,
}

impl PairStats {
    pub fn scores(&self, cfg: &EvalConfig) -> ComponentScores {
        ComponentScores::from_components(
            self.bleu.score(&cfg.ngram.order_weights),
            self.weighted.score(&cfg.ngram.order_weights),
            self.ast_ratio,
            self.dataflow.map(DataflowCounts::ratio),
            &cfg.weights,
        )
    }
}

/// Commutative sum of pair statistics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusTotals {
    pub bleu: NGramStats,
    pub weighted: NGramStats,
    pub ast_clipped: usize,
    pub ast_total: usize,
    pub dataflow_clipped: usize,
    pub dataflow_total: usize,
    pub dataflow_pairs: usize,
    pub pairs: usize,
    pub degraded: usize,
}

impl AddAssign<&PairStats> for CorpusTotals {
    fn add_assign(&mut self, p: &PairStats) {
        self.bleu += &p.bleu;
        self.weighted += &p.weighted;
        self.ast_clipped += p.ast.clipped;
        self.ast_total += p.ast.total;
        if let Some(df) = p.dataflow {
            self.dataflow_clipped += df.clipped;
            self.dataflow_total += df.total;
            self.dataflow_pairs += 1;
        }
        self.pairs += 1;
        self.degraded += usize::from(p.degraded);
    }
}

impl CorpusTotals {
    pub fn scores(&self, cfg: &EvalConfig) -> ComponentScores {
        let ast = if self.ast_total == 0 {
            0.0
        } else {
            self.ast_clipped as f64 / self.ast_total as f64
        };
        let dataflow = (self.dataflow_pairs > 0 && self.dataflow_total > 0)
            .then(|| self.dataflow_clipped as f64 / self.dataflow_total as f64);
        ComponentScores::from_components(
            self.bleu.score(&cfg.ngram.order_weights),
            self.weighted.score(&cfg.ngram.order_weights),
            ast,
            dataflow,
            &cfg.weights,
        )
    }
}

/// Corpus-level scores of an arbitrary slice of pairs (a block, a system).
pub fn aggregate(pairs: &[PairStats], cfg: &EvalConfig) -> Result<ComponentScores> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut totals = CorpusTotals::default();
    for p in pairs {
        totals += p;
    }
    Ok(totals.scores(cfg))
}

pub fn pair_stats(candidate: &str, references: &[&str], cfg: &EvalConfig) -> Result<PairStats> {
    if references.is_empty() {
        return Err(Error::InvalidInput(
            "at least one reference is required".into(),
        ));
    }
    let cand = parse_snippet(candidate, cfg.lang)?;
    let refs = references
        .iter()
        .map(|r| parse_snippet(r, cfg.lang))
        .collect::<Result<Vec<_>>>()?;
    let degraded = cand.has_error() || refs.iter().any(|r| r.has_error());

    let cand_tokens = tokens_of(&cand);
    let ref_tokens: Vec<_> = refs.iter().map(tokens_of).collect();
    let bleu = ngram::pair_stats(&cand_tokens, &ref_tokens, &cfg.ngram, None);
    let weighted = ngram::pair_stats(&cand_tokens, &ref_tokens, &cfg.ngram, Some(&cfg.keywords));

    let cand_bag = subtree_bag(&ast_of(&cand));
    let ref_bags: Vec<_> = refs.iter().map(|r| subtree_bag(&ast_of(r))).collect();
    let (ast_ratio, ast) = syntax::best_match(&cand_bag, &ref_bags).unwrap_or_default();

    let cand_dfg = normalize(&dfg_of(&cand));
    let ref_dfgs: Vec<_> = refs.iter().map(|r| normalize(&dfg_of(r))).collect();
    let dataflow = dataflow::best_match(&cand_dfg, &ref_dfgs).map(|(_, c)| c);

    Ok(PairStats {
        bleu,
        weighted,
        ast,
        ast_ratio,
        dataflow,
        degraded,
    })
}

/// All components of one candidate against its references.
pub fn score_pair(
    candidate: &str,
    references: &[&str],
    cfg: &EvalConfig,
) -> Result<ComponentScores> {
    cfg.validate()?;
    Ok(pair_stats(candidate, references, cfg)?.scores(cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub id: String,
    pub scores: ComponentScores,
    pub degraded: bool,
}

#[derive(Debug, Clone)]
pub struct CorpusScores {
    pub corpus: ComponentScores,
    /// Pair scores in input order.
    pub pairs: Vec<PairScore>,
    /// Cached statistics, aligned with `pairs`.
    pub stats: Vec<PairStats>,
}

impl CorpusScores {
    pub fn degraded_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.degraded).count()
    }
}

/// Scores every record in parallel; output order follows input order.
pub fn score_corpus(records: &[CorpusRecord], cfg: &EvalConfig) -> Result<CorpusScores> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    cfg.validate()?;
    corpus::validate(records)?;
    let stats = records
        .par_iter()
        .map(|r| pair_stats(&r.candidate, &r.reference_strs(), cfg))
        .collect::<Result<Vec<_>>>()?;
    let pairs = records
        .iter()
        .zip(&stats)
        .map(|(r, s)| PairScore {
            id: r.id.clone(),
            scores: s.scores(cfg),
            degraded: s.degraded,
        })
        .collect();
    Ok(CorpusScores {
        corpus: aggregate(&stats, cfg)?,
        pairs,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_examples() {
        let c = Components::all(0.7543, 0.7491, 0.6190, 0.6667);
        assert!((combine(&c, &Weights::EQUAL).unwrap() - 0.6973).abs() < 5e-5);
        let ones = Components::all(1.0, 1.0, 1.0, 1.0);
        assert_eq!(combine(&ones, &Weights::RECOMMENDED).unwrap(), 1.0);
        let single = Components {
            bleu: Some(0.5),
            ..Components::default()
        };
        assert_eq!(combine(&single, &Weights::EQUAL).unwrap(), 0.5);
        assert!(matches!(
            combine(&Components::default(), &Weights::EQUAL),
            Err(Error::AllComponentsAbsent)
        ));
    }

    #[test]
    fn weights_parse() {
        let w: Weights = "0.1,0.1,0.4,0.4".parse().unwrap();
        assert_eq!(w, Weights::RECOMMENDED);
        assert!("1,2,3".parse::<Weights>().is_err());
        assert!("1,2,3,-1".parse::<Weights>().is_err());
        assert!("0,0,0,0".parse::<Weights>().is_err());
        assert!("a,b,c,d".parse::<Weights>().is_err());
        assert_eq!(
            Weights::preset("recommended").unwrap(),
            Weights::RECOMMENDED
        );
        let n = Weights::new(2.0, 2.0, 2.0, 2.0).unwrap().normalized();
        assert_eq!(n, Weights::EQUAL);
    }

    #[test]
    fn single_pair_corpus_equals_pair() {
        let cfg = EvalConfig::new(LanguageId::Java);
        let cand = "int f(int a) { return a + 1; }";
        let refs = ["int f(int b) { return b + 2; }".to_string()];
        let rec = CorpusRecord::new("0", cand, refs.to_vec());
        let corpus = score_corpus(&[rec], &cfg).unwrap();
        let pair = score_pair(cand, &[refs[0].as_str()], &cfg).unwrap();
        assert_eq!(corpus.corpus, pair);
        assert_eq!(corpus.pairs[0].scores, pair);
    }

    #[test]
    fn identity_is_one() {
        let cfg = EvalConfig::new(LanguageId::CSharp);
        let code = "public int Add(int a, int b) { var s = a + b; return s; }";
        let s = score_pair(code, &[code], &cfg).unwrap();
        assert_eq!(s.bleu, 1.0);
        assert_eq!(s.weighted, 1.0);
        assert_eq!(s.ast, 1.0);
        assert_eq!(s.dataflow, Some(1.0));
        assert_eq!(s.codebleu, Some(1.0));
    }

    #[test]
    fn absent_dataflow_renormalizes() {
        let cfg = EvalConfig::new(LanguageId::Java);
        let s = score_pair("return;", &["return;"], &cfg).unwrap();
        assert_eq!(s.dataflow, None);
        assert_eq!(s.codebleu, Some(1.0));
    }

    #[test]
    fn empty_corpus() {
        let cfg = EvalConfig::new(LanguageId::Java);
        assert!(matches!(score_corpus(&[], &cfg), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn micro_average_by_hand() {
        // Pair A: 3 reference dataflow items, 2 matched; pair B: 1 of 1.
        let cfg = EvalConfig::new(LanguageId::Java);
        let a = pair_stats(
            "int f(int d) { return c + d; }",
            &["int f(int d) { return d + d; }"],
            &cfg,
        )
        .unwrap();
        let b = pair_stats(
            "int g(int x) { return x; }",
            &["int g(int y) { return y; }"],
            &cfg,
        )
        .unwrap();
        assert_eq!(
            a.dataflow,
            Some(DataflowCounts {
                clipped: 2,
                total: 3
            })
        );
        assert_eq!(
            b.dataflow,
            Some(DataflowCounts {
                clipped: 2,
                total: 2
            })
        );
        let total = aggregate(&[a.clone(), b.clone()], &cfg).unwrap();
        assert!((total.dataflow.unwrap() - 4.0 / 5.0).abs() < 1e-12);
        let ast = (a.ast.clipped + b.ast.clipped) as f64 / (a.ast.total + b.ast.total) as f64;
        assert!((total.ast - ast).abs() < 1e-12);
    }
}
