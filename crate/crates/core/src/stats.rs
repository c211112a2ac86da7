//! Validating a metric against human judgments.
//!
//! * [`pearson`] correlates metric and human scores;
//! * [`block_stats`] splits aligned per-system outputs into blocks and reports
//!   per-system block means, deviations and paired t-statistics;
//! * [`weight_sweep`] recombines cached component scores under several weight
//!   combinations and correlates each with human scores.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::score::{aggregate, CorpusScores, EvalConfig, PairStats, Weights};

/// A paired t-statistic at or above this is significant at the 95% level.
pub const SIGNIFICANCE_T: f64 = 1.7;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for fewer than 2 values.
pub fn sample_stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "sequences differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("constant sequence".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean human rating per pair id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HumanScores {
    scores: BTreeMap<String, f64>,
}

impl HumanScores {
    pub fn insert(&mut self, id: impl Into<String>, score: f64) -> Result<()> {
        let id = id.into();
        if !(1.0..=5.0).contains(&score) {
            return Err(Error::InvalidInput(format!(
                "rating {score} for `{id}` is outside [1, 5]"
            )));
        }
        if self.scores.insert(id.clone(), score).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate human score id `{id}`"
            )));
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// TSV with a header naming the `id` and `score` columns.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("human score file is empty".into()))?
            .split('\t')
            .map(str::trim)
            .collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| Error::InvalidInput(format!("human score header lacks `{name}`")))
        };
        let (id_col, score_col) = (col("id")?, col("score")?);
        let mut out = HumanScores::default();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let field = |c: usize| {
                fields
                    .get(c)
                    .map(|f| f.trim())
                    .ok_or_else(|| Error::InvalidInput(format!("row {}: missing column", i + 2)))
            };
            let score = field(score_col)?
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("row {}: bad score", i + 2)))?;
            out.insert(field(id_col)?, score)?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    /// Rating stored under `system/id`, or under `id` alone.
    pub fn lookup(&self, system: &str, id: &str) -> Result<f64> {
        self.get(&format!("{system}/{id}"))
            .or_else(|| self.get(id))
            .ok_or_else(|| Error::MissingHumanScore(format!("{system}/{id}")))
    }
}

/// Paired t-statistic of one system against the previous one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedT {
    pub baseline: String,
    pub system: String,
    pub mean_diff: f64,
    pub stddev_diff: f64,
    /// `0` or `±inf` when the differences have zero variance.
    #[serde(serialize_with = "finite_or_string")]
    pub t: f64,
    pub degenerate_variance: bool,
    pub significant: bool,
}

fn finite_or_string<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format!("{v}"))
    }
}

pub fn paired_t(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64, bool)> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("block counts differ".into()));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData(
            "a paired t-statistic needs two blocks".into(),
        ));
    }
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let sd = sample_stddev(&d);
    if sd == 0.0 {
        let t = if m == 0.0 {
            0.0
        } else {
            m.signum() * f64::INFINITY
        };
        return Ok((m, sd, t, true));
    }
    Ok((m, sd, m / (sd / (d.len() as f64).sqrt()), false))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemBlocks {
    pub name: String,
    pub blocks: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub block_size: usize,
    pub block_count: usize,
    pub significance_t: f64,
    pub systems: Vec<SystemBlocks>,
    /// System `i + 1` against system `i`.
    pub comparisons: Vec<PairedT>,
}

/// Contiguous blocks of `block_size` aligned pairs per system (the remainder
/// is dropped), each scored with `block_score`.
pub fn block_stats<T>(
    systems: &[(String, Vec<T>)],
    block_size: usize,
    block_score: impl Fn(&[T]) -> Result<f64>,
) -> Result<BlockReport> {
    if systems.is_empty() {
        return Err(Error::InsufficientData("no systems".into()));
    }
    if block_size == 0 {
        return Err(Error::InvalidConfig("block size must be positive".into()));
    }
    let n = systems[0].1.len();
    if let Some((name, pairs)) = systems.iter().find(|(_, p)| p.len() != n) {
        return Err(Error::InvalidInput(format!(
            "system `{name}` has {} pairs, expected {n}",
            pairs.len()
        )));
    }
    if n < 2 * block_size {
        return Err(Error::InsufficientData(format!(
            "{n} pairs cannot fill two blocks of {block_size}"
        )));
    }
    let block_count = n / block_size;
    let mut rows = Vec::with_capacity(systems.len());
    for (name, pairs) in systems {
        let blocks = pairs[..block_count * block_size]
            .chunks(block_size)
            .map(&block_score)
            .collect::<Result<Vec<_>>>()?;
        rows.push(SystemBlocks {
            name: name.clone(),
            mean: mean(&blocks),
            stddev: sample_stddev(&blocks),
            blocks,
        });
    }
    let mut comparisons = Vec::new();
    for w in rows.windows(2) {
        let (m, sd, t, degenerate) = paired_t(&w[0].blocks, &w[1].blocks)?;
        comparisons.push(PairedT {
            baseline: w[0].name.clone(),
            system: w[1].name.clone(),
            mean_diff: m,
            stddev_diff: sd,
            t,
            degenerate_variance: degenerate,
            significant: t.abs() >= SIGNIFICANCE_T,
        });
    }
    Ok(BlockReport {
        block_size,
        block_count,
        significance_t: SIGNIFICANCE_T,
        systems: rows,
        comparisons,
    })
}

/// Block statistics of corpus-level CodeBLEU.
pub fn codebleu_blocks(
    systems: &[(String, Vec<PairStats>)],
    block_size: usize,
    cfg: &EvalConfig,
) -> Result<BlockReport> {
    block_stats(systems, block_size, |block| {
        aggregate(block, cfg)?
            .codebleu
            .ok_or(Error::AllComponentsAbsent)
    })
}

impl fmt::Display for BlockReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} blocks of {} pairs; paired t >= {} is significant at 95%",
            self.block_count, self.block_size, self.significance_t
        )?;
        writeln!(f, "system\tmean\tstddev\tt\tsignificant")?;
        for (i, s) in self.systems.iter().enumerate() {
            let (t, sig) = match i.checked_sub(1).map(|j| &self.comparisons[j]) {
                Some(c) => (
                    format!("{:.3}", c.t),
                    if c.significant { "yes" } else { "no" },
                ),
                None => ("-".to_string(), "-"),
            };
            writeln!(
                f,
                "{}\t{:.2}\t{:.2}\t{t}\t{sig}",
                s.name,
                s.mean * 100.0,
                s.stddev * 100.0
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// One point per system: corpus score against mean human rating.
    #[default]
    System,
    /// One point per pair.
    Pair,
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system" => Ok(Granularity::System),
            "pair" => Ok(Granularity::Pair),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combo {
    pub label: String,
    pub weights: Weights,
}

/// The seven combinations from `[1] 0.40,0.40,0.10,0.10` to
/// `[7] 0.10,0.10,0.40,0.40`.
pub fn sweep_combos() -> Vec<Combo> {
    (0..7)
        .map(|i| {
            let ab = 0.40 - 0.05 * i as f64;
            let gd = 0.10 + 0.05 * i as f64;
            Combo {
                label: format!("[{}]", i + 1),
                weights: Weights {
                    alpha: round2(ab),
                    beta: round2(ab),
                    gamma: round2(gd),
                    delta: round2(gd),
                },
            }
        })
        .collect()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One combination per line: `a,b,c,d` or `LABEL a,b,c,d`; `#` starts a comment.
pub fn parse_combos(text: &str) -> Result<Vec<Combo>> {
    let mut combos = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, weights) = match line.rsplit_once(char::is_whitespace) {
            Some((l, w)) => (l.trim().to_string(), w),
            None => (format!("[{}]", combos.len() + 1), line),
        };
        combos.push(Combo {
            label,
            weights: weights.parse()?,
        });
    }
    if combos.is_empty() {
        return Err(Error::InvalidInput("no weight combinations given".into()));
    }
    Ok(combos)
}

/// `table6` or a combination file.
pub fn load_combos(choice: &str) -> Result<Vec<Combo>> {
    if choice == "table6" {
        return Ok(sweep_combos());
    }
    let path = Path::new(choice);
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_combos(&text)
}

/// Scored corpus of one system.
pub struct SystemScores<'a> {
    pub name: &'a str,
    pub scores: &'a CorpusScores,
}

/// Metric and human points, one per system or per pair.
fn points(
    systems: &[SystemScores<'_>],
    human: &HumanScores,
    granularity: Granularity,
    metric: impl Fn(&crate::score::ComponentScores) -> Result<Option<f64>>,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for sys in systems {
        let ratings = sys
            .scores
            .pairs
            .iter()
            .map(|p| human.lookup(sys.name, &p.id))
            .collect::<Result<Vec<_>>>()?;
        match granularity {
            Granularity::System => {
                let Some(x) = metric(&sys.scores.corpus)? else {
                    return Ok(None);
                };
                xs.push(x);
                ys.push(mean(&ratings));
            }
            Granularity::Pair => {
                for (p, r) in sys.scores.pairs.iter().zip(ratings) {
                    let Some(x) = metric(&p.scores)? else {
                        return Ok(None);
                    };
                    xs.push(x);
                    ys.push(r);
                }
            }
        }
    }
    Ok(Some((xs, ys)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub combo: Combo,
    pub r: f64,
}

/// Pearson r of CodeBLEU under each combination; uses only cached scores.
pub fn weight_sweep(
    systems: &[SystemScores<'_>],
    human: &HumanScores,
    combos: &[Combo],
    granularity: Granularity,
) -> Result<Vec<SweepRow>> {
    if combos.is_empty() {
        return Err(Error::InvalidInput("no weight combinations given".into()));
    }
    combos
        .iter()
        .map(|combo| {
            let (xs, ys) = points(systems, human, granularity, |s| {
                s.reweighted(&combo.weights).map(Some)
            })?
            .expect("reweighting never yields absent scores");
            Ok(SweepRow {
                combo: combo.clone(),
                r: pearson(&xs, &ys)?,
            })
        })
        .collect()
}

/// Pearson r of each metric column; `None` where a component is absent or
/// the points are degenerate.
pub fn correlate(
    systems: &[SystemScores<'_>],
    human: &HumanScores,
    granularity: Granularity,
) -> Result<Vec<(&'static str, Option<f64>)>> {
    type Metric = fn(&crate::score::ComponentScores) -> Option<f64>;
    let metrics: [(&'static str, Metric); 5] = [
        ("bleu", |s| Some(s.bleu)),
        ("weighted", |s| Some(s.weighted)),
        ("ast", |s| Some(s.ast)),
        ("dataflow", |s| s.dataflow),
        ("codebleu", |s| s.codebleu),
    ];
    let mut out = Vec::new();
    for (name, f) in metrics {
        let r = match points(systems, human, granularity, |s| Ok(f(s)))? {
            Some((xs, ys)) => match pearson(&xs, &ys) {
                Ok(r) => Some(r),
                Err(Error::DegenerateInput(_)) if name != "codebleu" => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        out.push((name, r));
    }
    Ok(out)
}
