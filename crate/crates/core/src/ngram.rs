//! Corpus BLEU and the keyword-weighted n-gram match.
//!
//! Both scores are computed from the same sufficient statistics
//! ([`NGramStats`]): per-order clipped and total counts, candidate length and
//! effective reference length. For standard BLEU every n-gram weighs 1; for
//! the weighted match an n-gram of order `n <= weighted_order` weighs the mean
//! of its tokens' weights, where a keyword weighs `keyword_weight` and any
//! other token 1.
//!
//! Orders with zero clipped matches (n >= 2) are smoothed to `1 / (2 * total)`,
//! and orders the candidate is too short to contain are left out with the
//! remaining order weights renormalized.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexer::{KeywordSet, TokenSeq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramConfig {
    pub max_order: usize,
    pub order_weights: Vec<f64>,
    pub keyword_weight: f64,
    pub weighted_order: usize,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            max_order: 4,
            order_weights: vec![0.25; 4],
            keyword_weight: 5.0,
            weighted_order: 1,
        }
    }
}

impl NGramConfig {
    /// Uniform order weights up to `max_order`.
    pub fn uniform(max_order: usize) -> Self {
        NGramConfig {
            max_order,
            order_weights: vec![1.0 / max_order as f64; max_order],
            weighted_order: 1,
            ..NGramConfig::default()
        }
    }

    pub fn with_keyword_weight(mut self, mu: f64) -> Self {
        self.keyword_weight = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::InvalidConfig("max_order must be at least 1".into()));
        }
        if self.order_weights.len() != self.max_order {
            return Err(Error::InvalidConfig(format!(
                "expected {} order weights, got {}",
                self.max_order,
                self.order_weights.len()
            )));
        }
        if self
            .order_weights
            .iter()
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::InvalidConfig(
                "order weights must be non-negative".into(),
            ));
        }
        let sum: f64 = self.order_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "order weights sum to {sum}, not 1"
            )));
        }
        if !(self.keyword_weight.is_finite() && self.keyword_weight > 0.0) {
            return Err(Error::InvalidConfig(
                "keyword weight must be positive".into(),
            ));
        }
        if self.weighted_order == 0 || self.weighted_order > self.max_order {
            return Err(Error::InvalidConfig(
                "weighted_order must lie in 1..=max_order".into(),
            ));
        }
        Ok(())
    }
}

/// Sufficient statistics for BLEU-style scores; sums over pairs are corpus stats.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NGramStats {
    pub matched: Vec<f64>,
    pub total: Vec<f64>,
    pub cand_len: usize,
    pub ref_len: usize,
}

impl NGramStats {
    pub fn zeros(max_order: usize) -> Self {
        NGramStats {
            matched: vec![0.0; max_order],
            total: vec![0.0; max_order],
            cand_len: 0,
            ref_len: 0,
        }
    }

    /// `BP * exp(sum_n w_n log p_n)`.
    pub fn score(&self, order_weights: &[f64]) -> f64 {
        if self.cand_len == 0 {
            return if self.ref_len == 0 { 1.0 } else { 0.0 };
        }
        if self.total.first().copied().unwrap_or(0.0) > 0.0 && self.matched[0] == 0.0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut weight_sum = 0.0;
        for (n, &w) in order_weights.iter().enumerate() {
            let total = self.total[n];
            if w == 0.0 || total == 0.0 {
                continue;
            }
            let matched = self.matched[n];
            let p = if matched > 0.0 {
                matched / total
            } else {
                1.0 / (2.0 * total)
            };
            log_sum += w * p.ln();
            weight_sum += w;
        }
        if weight_sum == 0.0 {
            return 0.0;
        }
        brevity_penalty(self.cand_len, self.ref_len) * (log_sum / weight_sum).exp()
    }
}

impl AddAssign<&NGramStats> for NGramStats {
    fn add_assign(&mut self, rhs: &NGramStats) {
        if self.matched.len() < rhs.matched.len() {
            self.matched.resize(rhs.matched.len(), 0.0);
            self.total.resize(rhs.total.len(), 0.0);
        }
        for (a, b) in self.matched.iter_mut().zip(&rhs.matched) {
            *a += b;
        }
        for (a, b) in self.total.iter_mut().zip(&rhs.total) {
            *a += b;
        }
        self.cand_len += rhs.cand_len;
        self.ref_len += rhs.ref_len;
    }
}

fn counts<'b, 'a>(tokens: &'b [&'a str], n: usize) -> BTreeMap<&'b [&'a str], usize> {
    let mut map = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return map;
    }
    for gram in tokens.windows(n) {
        *map.entry(gram).or_default() += 1;
    }
    map
}

/// Per distinct n-gram, the candidate count clipped at its maximum count in
/// any reference. Returns `(clipped, total)`.
pub fn clipped_ngram_counts(cand: &TokenSeq, refs: &[TokenSeq], n: usize) -> (usize, usize) {
    let cand = cand.texts();
    let refs: Vec<Vec<&str>> = refs.iter().map(TokenSeq::texts).collect();
    let (clipped, total) = clipped_counts(&cand, &refs, n, |_| 1.0);
    (clipped as usize, total as usize)
}

fn clipped_counts(
    cand: &[&str],
    refs: &[Vec<&str>],
    n: usize,
    weight: impl Fn(&[&str]) -> f64,
) -> (f64, f64) {
    let cand_counts = counts(cand, n);
    let ref_counts: Vec<_> = refs.iter().map(|r| counts(r, n)).collect();
    let mut clipped = 0.0;
    let mut total = 0.0;
    for (gram, &count) in &cand_counts {
        let w = weight(gram);
        let max_ref = ref_counts
            .iter()
            .map(|rc| rc.get(gram).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        clipped += w * count.min(max_ref) as f64;
        total += w * count as f64;
    }
    (clipped, total)
}

/// `1` if `c > r`, else `e^(1 - r/c)`; zero-length candidates get 0 (or 1
/// against an empty reference).
pub fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else if c == 0 {
        if r == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Length of the reference closest to `cand_len`; ties go to the shorter one.
pub fn closest_ref_len(cand_len: usize, ref_lens: impl IntoIterator<Item = usize>) -> usize {
    ref_lens
        .into_iter()
        .min_by_key(|&r| (r.abs_diff(cand_len), r))
        .unwrap_or(0)
}

/// Statistics for one candidate against its references. `keywords = None`
/// yields standard (unweighted) BLEU counts.
pub fn pair_stats(
    cand: &TokenSeq,
    refs: &[TokenSeq],
    cfg: &NGramConfig,
    keywords: Option<&KeywordSet>,
) -> NGramStats {
    let cand_texts = cand.texts();
    let ref_texts: Vec<Vec<&str>> = refs.iter().map(TokenSeq::texts).collect();
    let mut stats = NGramStats::zeros(cfg.max_order);
    for n in 1..=cfg.max_order {
        let (m, t) = match keywords {
            Some(kw) if n <= cfg.weighted_order => {
                clipped_counts(&cand_texts, &ref_texts, n, |gram| {
                    let sum: f64 = gram
                        .iter()
                        .map(|t| {
                            if kw.contains(t) {
                                cfg.keyword_weight
                            } else {
                                1.0
                            }
                        })
                        .sum();
                    sum / gram.len() as f64
                })
            }
            _ => clipped_counts(&cand_texts, &ref_texts, n, |_| 1.0),
        };
        stats.matched[n - 1] = m;
        stats.total[n - 1] = t;
    }
    stats.cand_len = cand.len();
    stats.ref_len = closest_ref_len(cand.len(), refs.iter().map(TokenSeq::len));
    stats
}

fn corpus_stats(
    cands: &[TokenSeq],
    refs: &[Vec<TokenSeq>],
    cfg: &NGramConfig,
    keywords: Option<&KeywordSet>,
) -> Result<NGramStats> {
    if cands.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if cands.len() != refs.len() {
        return Err(Error::InvalidInput(format!(
            "{} candidates but {} reference sets",
            cands.len(),
            refs.len()
        )));
    }
    cfg.validate()?;
    let mut acc = NGramStats::zeros(cfg.max_order);
    for (cand, refs) in cands.iter().zip(refs) {
        acc += &pair_stats(cand, refs, cfg, keywords);
    }
    Ok(acc)
}

/// Corpus-level BLEU.
pub fn bleu(cands: &[TokenSeq], refs: &[Vec<TokenSeq>], cfg: &NGramConfig) -> Result<f64> {
    Ok(corpus_stats(cands, refs, cfg, None)?.score(&cfg.order_weights))
}

/// Keyword-weighted n-gram match over the orders of `cfg`, with keyword
/// weights on orders up to `cfg.weighted_order`.
pub fn weighted_ngram_match(
    cands: &[TokenSeq],
    refs: &[Vec<TokenSeq>],
    keywords: &KeywordSet,
    cfg: &NGramConfig,
) -> Result<f64> {
    Ok(corpus_stats(cands, refs, cfg, Some(keywords))?.score(&cfg.order_weights))
}

/// The unigram-only weighted match: `N = 1`, `w_1 = 1`, keyword weight from `cfg`.
pub fn weighted_unigram_match(
    cands: &[TokenSeq],
    refs: &[Vec<TokenSeq>],
    keywords: &KeywordSet,
    cfg: &NGramConfig,
) -> Result<f64> {
    let unigram = NGramConfig {
        max_order: 1,
        order_weights: vec![1.0],
        keyword_weight: cfg.keyword_weight,
        weighted_order: 1,
    };
    weighted_ngram_match(cands, refs, keywords, &unigram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::LanguageId;

    fn seq(words: &[&str]) -> TokenSeq {
        TokenSeq::from_words(words, LanguageId::Java)
    }

    #[test]
    fn clip_example() {
        assert_eq!(
            clipped_ngram_counts(&seq(&["a", "b", "a"]), &[seq(&["a", "b"])], 1),
            (2, 3)
        );
        assert_eq!(
            clipped_ngram_counts(&seq(&["x"]), &[seq(&["y"])], 2),
            (0, 0)
        );
        let c = seq(&["p", "q", "p", "q"]);
        for n in 1..=4 {
            let total = 4 - n + 1;
            assert_eq!(
                clipped_ngram_counts(&c, std::slice::from_ref(&c), n),
                (total, total)
            );
        }
    }

    #[test]
    fn clip_takes_max_over_references() {
        let cand = seq(&["a", "a", "a"]);
        let refs = [seq(&["a"]), seq(&["a", "a"]), seq(&["b"])];
        assert_eq!(clipped_ngram_counts(&cand, &refs, 1), (2, 3));
    }

    #[test]
    fn brevity() {
        assert_eq!(brevity_penalty(10, 5), 1.0);
        assert_eq!(brevity_penalty(5, 5), 1.0);
        assert!((brevity_penalty(5, 10) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(brevity_penalty(0, 3), 0.0);
    }

    #[test]
    fn closest_length_ties_prefer_shorter() {
        assert_eq!(closest_ref_len(5, [3, 7]), 3);
        assert_eq!(closest_ref_len(5, [9, 6, 4]), 4);
        assert_eq!(closest_ref_len(5, []), 0);
    }

    #[test]
    fn bleu_bigram_example() {
        let cfg = NGramConfig::uniform(2);
        let s = bleu(
            &[seq(&["a", "b", "c"])],
            &[vec![seq(&["a", "b", "d"])]],
            &cfg,
        )
        .unwrap();
        // p1 = 2/3, p2 = 1/2, BP = 1
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bleu_identity_and_empty_corpus() {
        let c = seq(&["int", "x", "=", "1", ";"]);
        let cfg = NGramConfig::default();
        assert_eq!(
            bleu(std::slice::from_ref(&c), &[vec![c.clone()]], &cfg).unwrap(),
            1.0
        );
        let short = seq(&["x"]);
        assert_eq!(
            bleu(std::slice::from_ref(&short), &[vec![short.clone()]], &cfg).unwrap(),
            1.0
        );
        assert!(matches!(bleu(&[], &[], &cfg), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn bleu_zero_unigram_precision() {
        let cfg = NGramConfig::default();
        let s = bleu(&[seq(&["x", "y"])], &[vec![seq(&["a", "b"])]], &cfg).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn weighted_unigram_example() {
        let kw = KeywordSet::builtin(LanguageId::Java);
        let cfg = NGramConfig::default();
        let s = weighted_unigram_match(
            &[seq(&["int", "x"])],
            &[vec![seq(&["int", "y"])]],
            &kw,
            &cfg,
        )
        .unwrap();
        assert!((s - 5.0 / 6.0).abs() < 1e-12);
        let c = seq(&["public", "int", "f"]);
        assert_eq!(
            weighted_unigram_match(std::slice::from_ref(&c), &[vec![c.clone()]], &kw, &cfg)
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn unit_keyword_weight_is_plain_bleu() {
        let kw = KeywordSet::builtin(LanguageId::Java);
        let cand = seq(&["int", "x", "=", "y", "+", "1", ";"]);
        let refs = vec![seq(&["int", "x", "=", "z", "+", "1", ";"])];
        let cfg = NGramConfig::default().with_keyword_weight(1.0);
        let w = weighted_ngram_match(
            std::slice::from_ref(&cand),
            std::slice::from_ref(&refs),
            &kw,
            &cfg,
        )
        .unwrap();
        let b = bleu(&[cand], &[refs], &cfg).unwrap();
        assert_eq!(w, b);
    }

    #[test]
    fn config_validation() {
        assert!(NGramConfig::default().validate().is_ok());
        let bad = NGramConfig {
            order_weights: vec![0.5, 0.5, 0.5, 0.5],
            ..NGramConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = NGramConfig::default().with_keyword_weight(0.0);
        assert!(bad.validate().is_err());
        let bad = NGramConfig {
            weighted_order: 5,
            ..NGramConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
