//! The `codebleu` command line.
//!
//! Exit codes: 0 success, 1 failed fixture check or internal error, 2 bad
//! flags or configuration, 3 unreadable or invalid input, 4 degenerate or
//! insufficient data for statistics.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{load_jsonl, load_text, CorpusRecord};
use crate::dataflow::{extract_dfg, normalize};
use crate::error::{Error, Result};
use crate::fixtures::{load_fixtures, Provenance};
use crate::lexer::{load_keywords, LanguageId};
use crate::ngram::NGramConfig;
use crate::report::ScoreReport;
use crate::score::{score_corpus, CorpusScores, EvalConfig, Weights};
use crate::stats::{
    codebleu_blocks, correlate, load_combos, weight_sweep, Granularity, HumanScores, SystemScores,
};

#[derive(Parser, Debug)]
#[command(
    name = "codebleu",
    version,
    about = "Score generated Java or C# code with CodeBLEU"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score candidates against references.
    Score(ScoreArgs),
    /// Correlate metric scores of several systems with human ratings.
    Correlate(CorrelateArgs),
    /// Block means, deviations and paired t-statistics of several systems.
    Blocks(BlocksArgs),
    /// Score the built-in fixtures and check their expected values.
    Reproduce,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value = "java")]
    lang: LanguageId,
    /// Component weights alpha,beta,gamma,delta.
    #[arg(long, value_parser = parse_weights, conflicts_with = "preset")]
    weights: Option<Weights>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Keyword list, one per line; replaces the built-in list.
    #[arg(long)]
    keywords: Option<PathBuf>,
    /// Weight of keyword unigrams in the weighted n-gram match.
    #[arg(long)]
    keyword_weight: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Preset {
    Equal,
    Recommended,
}

#[derive(Copy, Clone, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Tsv,
}

#[derive(Copy, Clone, Debug, Default, ValueEnum)]
enum Mode {
    #[default]
    System,
    Pair,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    /// Hypotheses, one escaped snippet per line.
    #[arg(long, requires = "refs", conflicts_with = "jsonl")]
    hyp: Option<PathBuf>,
    /// Reference file aligned with --hyp; repeat for several references.
    #[arg(long)]
    refs: Vec<PathBuf>,
    /// Records with id, candidate and references.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Print normalized data-flow items to stderr.
    #[arg(long)]
    dump_dfg: bool,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[command(flatten)]
    common: Common,
    /// NAME=FILE.jsonl, once per system.
    #[arg(long = "system", required = true)]
    systems: Vec<String>,
    /// TSV with columns id and score; ids are `system/id` or `id`.
    #[arg(long)]
    human: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    mode: Mode,
    /// `table6` or a file of weight combinations.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args, Debug)]
struct BlocksArgs {
    #[command(flatten)]
    common: Common,
    /// NAME=FILE.jsonl, once per system, in comparison order.
    #[arg(long = "system", required = true)]
    systems: Vec<String>,
    #[arg(long, default_value_t = 25)]
    block_size: usize,
}

fn parse_weights(s: &str) -> std::result::Result<Weights, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the binary and exits with its status.
pub fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}

/// Runs the command line with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = with_pool(|| match cli.command {
        Command::Score(a) => cmd_score(a, out, err),
        Command::Correlate(a) => cmd_correlate(a, out),
        Command::Blocks(a) => cmd_blocks(a, out),
        Command::Reproduce => cmd_reproduce(out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedLanguage(_) | Error::InvalidConfig(_) => 2,
        Error::Io { .. }
        | Error::InvalidInput(_)
        | Error::EmptyCorpus
        | Error::MissingHumanScore(_) => 3,
        Error::DegenerateInput(_) | Error::InsufficientData(_) => 4,
        Error::AllComponentsAbsent | Error::Grammar(_) => 1,
    }
}

fn with_pool(f: impl FnOnce() -> Result<i32>) -> Result<i32> {
    if let Ok(v) = std::env::var("CODEBLEU_THREADS") {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "CODEBLEU_THREADS must be a positive integer, got `{v}`"
                ))
            })?;
        // Fails only when the global pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    f()
}

fn config(common: &Common) -> Result<(EvalConfig, String)> {
    let weights = match (common.weights, common.preset) {
        (Some(w), _) => w,
        (None, Some(Preset::Recommended)) => Weights::RECOMMENDED,
        (None, _) => Weights::EQUAL,
    };
    let mut ngram = NGramConfig::default();
    if let Some(mu) = common.keyword_weight {
        ngram = ngram.with_keyword_weight(mu);
    }
    let keywords = load_keywords(common.lang, common.keywords.as_deref())?;
    let label = common
        .keywords
        .as_ref()
        .map_or_else(|| "builtin".to_string(), |p| p.display().to_string());
    let cfg = EvalConfig::new(common.lang)
        .with_weights(weights)
        .with_ngram(ngram)
        .with_keywords(keywords);
    cfg.validate()?;
    Ok((cfg, label))
}

fn cmd_score(a: ScoreArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (cfg, label) = config(&a.common)?;
    let records = match (&a.jsonl, &a.hyp) {
        (Some(path), None) => load_jsonl(path)?,
        (None, Some(hyp)) => {
            let refs: Vec<&Path> = a.refs.iter().map(PathBuf::as_path).collect();
            load_text(hyp, &refs)?
        }
        _ => {
            return Err(Error::InvalidConfig(
                "give either --jsonl FILE or --hyp FILE with --refs FILE".into(),
            ))
        }
    };
    let scores = score_corpus(&records, &cfg)?;
    if a.dump_dfg {
        dump_dfg(&records, cfg.lang, err)?;
    }
    let report = ScoreReport::new(&scores, &cfg, &label);
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Tsv => report.to_tsv(),
    };
    write_out(out, &text)?;
    Ok(0)
}

fn dump_dfg(records: &[CorpusRecord], lang: LanguageId, err: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    for r in records {
        let snippets = std::iter::once(("candidate".to_string(), &r.candidate)).chain(
            r.references
                .iter()
                .enumerate()
                .map(|(i, s)| (format!("reference {i}"), s)),
        );
        for (label, code) in snippets {
            text.push_str(&format!("# {} {label}\n", r.id));
            text.push_str(&normalize(&extract_dfg(code, lang)?).to_string());
        }
    }
    write_out(err, &text)
}

fn write_out(w: &mut dyn Write, text: &str) -> Result<()> {
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io("<output>", e))
}

fn load_systems(args: &[String], cfg: &EvalConfig) -> Result<Vec<(String, CorpusScores)>> {
    args.iter()
        .map(|arg| {
            let (name, path) = match arg.split_once('=') {
                Some((n, p)) => (n.to_string(), PathBuf::from(p)),
                None => {
                    let p = PathBuf::from(arg);
                    let stem = p
                        .file_stem()
                        .map_or_else(|| arg.clone(), |s| s.to_string_lossy().into_owned());
                    (stem, p)
                }
            };
            let records = load_jsonl(&path)?;
            Ok((name, score_corpus(&records, cfg)?))
        })
        .collect()
}

fn cmd_correlate(a: CorrelateArgs, out: &mut dyn Write) -> Result<i32> {
    let (cfg, _) = config(&a.common)?;
    let human = HumanScores::load(&a.human)?;
    let systems = load_systems(&a.systems, &cfg)?;
    let views: Vec<SystemScores<'_>> = systems
        .iter()
        .map(|(name, scores)| SystemScores { name, scores })
        .collect();
    let granularity = match a.mode {
        Mode::System => Granularity::System,
        Mode::Pair => Granularity::Pair,
    };
    let mut text = String::from("metric\tpearson\n");
    for (metric, r) in correlate(&views, &human, granularity)? {
        let r = r.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        text.push_str(&format!("{metric}\t{r}\n"));
    }
    if let Some(choice) = &a.sweep {
        let combos = load_combos(choice)?;
        text.push_str("\ncombo\tweights\tpearson\n");
        for row in weight_sweep(&views, &human, &combos, granularity)? {
            text.push_str(&format!(
                "{}\t{}\t{:.4}\n",
                row.combo.label, row.combo.weights, row.r
            ));
        }
    }
    write_out(out, &text)?;
    Ok(0)
}

fn cmd_blocks(a: BlocksArgs, out: &mut dyn Write) -> Result<i32> {
    let (cfg, _) = config(&a.common)?;
    let systems: Vec<_> = load_systems(&a.systems, &cfg)?
        .into_iter()
        .map(|(name, scores)| (name, scores.stats))
        .collect();
    let report = codebleu_blocks(&systems, a.block_size, &cfg)?;
    write_out(out, &report.to_string())?;
    Ok(0)
}

fn cmd_reproduce(out: &mut dyn Write) -> Result<i32> {
    let mut text = String::new();
    let mut failed = 0;
    for f in load_fixtures() {
        let (scores, _) = f.score()?;
        text.push_str(&format!("## {} ({})\n", f.name, f.language));
        let pct =
            |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0));
        text.push_str(&format!(
            "bleu {}  weighted {}  ast {}  dataflow {}  codebleu {}\n",
            pct(Some(scores.bleu)),
            pct(Some(scores.weighted)),
            pct(Some(scores.ast)),
            pct(scores.dataflow),
            pct(scores.codebleu)
        ));
        for o in f.evaluate()? {
            let tag = match o.provenance {
                Provenance::Published => "published",
                Provenance::Exact => "exact",
                Provenance::Recomputed => "recomputed",
            };
            failed += usize::from(!o.passed);
            let status = if o.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!("{status} [{tag}] {}\n", o.description));
        }
        text.push('\n');
    }
    write_out(out, &text)?;
    Ok(if failed == 0 { 0 } else { 1 })
}
