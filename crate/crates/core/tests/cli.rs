mod common;

use std::process::{Command, Output};

use codebleu::corpus::{escape_line, to_jsonl};
use codebleu::fixtures::load_fixtures;
use codebleu::report::ScoreReport;
use codebleu::{CorpusRecord, LanguageId};
use serde_json::Value;
use tempfile::TempDir;

fn codebleu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codebleu"))
        .args(args)
        .env_remove("CODEBLEU_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn fixture_jsonl(dir: &TempDir, name: &str) -> String {
    let f = load_fixtures()
        .into_iter()
        .find(|f| f.name == name)
        .unwrap();
    let rec = CorpusRecord::new(f.name, f.candidate, f.references);
    write(dir, &format!("{name}.jsonl"), &to_jsonl(&[rec]))
}

fn corpus_value(o: &Output, key: &str) -> f64 {
    let v: Value = serde_json::from_str(&stdout(o)).unwrap();
    v["corpus"][key].as_f64().unwrap()
}

fn java_corpus() -> Vec<CorpusRecord> {
    load_fixtures()
        .into_iter()
        .filter(|f| f.language == LanguageId::Java)
        .map(|f| CorpusRecord::new(f.name, f.candidate, f.references))
        .collect()
}

#[test]
fn example1_codebleu() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "example1");
    let o = codebleu(&[
        "score",
        "--jsonl",
        &path,
        "--weights",
        "0.25,0.25,0.25,0.25",
    ]);
    assert!(o.status.success());
    assert!((corpus_value(&o, "codebleu") - 69.73).abs() <= 1.0);
}

#[test]
fn self_score_is_100() {
    let dir = TempDir::new().unwrap();
    let code = "public int Add(int a, int b) {\n    return a + b;\n}\n";
    let escaped = format!("{}\n", escape_line(code.trim_end()));
    let hyp = write(&dir, "hyp.txt", &escaped);
    let o = codebleu(&["score", "--lang", "csharp", "--hyp", &hyp, "--refs", &hyp]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["bleu", "weighted", "ast", "dataflow", "codebleu"] {
        assert!(
            text.contains(&format!("\"{key}\": 100.00")),
            "{key}: {text}"
        );
    }
}

#[test]
fn bleu_only_matches_textbook_bleu() {
    let dir = TempDir::new().unwrap();
    let records = java_corpus();
    let path = write(&dir, "c.jsonl", &to_jsonl(&records));
    let o = codebleu(&[
        "score",
        "--jsonl",
        &path,
        "--weights",
        "1,0,0,0",
        "--keyword-weight",
        "1",
    ]);
    assert!(o.status.success());
    let cands: Vec<Vec<String>> = records
        .iter()
        .map(|r| common::token_texts(&r.candidate, LanguageId::Java))
        .collect();
    let refs: Vec<Vec<Vec<String>>> = records
        .iter()
        .map(|r| {
            r.references
                .iter()
                .map(|x| common::token_texts(x, LanguageId::Java))
                .collect()
        })
        .collect();
    let want = common::textbook_bleu(&cands, &refs) * 100.0;
    assert!((corpus_value(&o, "codebleu") - want).abs() <= 0.1);
    assert!((corpus_value(&o, "bleu") - want).abs() <= 0.1);
}

#[test]
fn text_and_jsonl_modes_agree() {
    let dir = TempDir::new().unwrap();
    let records = java_corpus();
    let jsonl = write(&dir, "c.jsonl", &to_jsonl(&records));
    let hyp: String = records
        .iter()
        .map(|r| escape_line(&r.candidate) + "\n")
        .collect();
    let refs: String = records
        .iter()
        .map(|r| escape_line(&r.references[0]) + "\n")
        .collect();
    let hyp = write(&dir, "hyp.txt", &hyp);
    let refs = write(&dir, "ref.txt", &refs);
    let a = codebleu(&["score", "--jsonl", &jsonl, "--format", "tsv"]);
    let b = codebleu(&["score", "--hyp", &hyp, "--refs", &refs, "--format", "tsv"]);
    let strip_ids = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .map(|l| l.split_once('\t').unwrap().1.to_string())
            .collect()
    };
    assert_eq!(strip_ids(&a), strip_ids(&b));
}

#[test]
fn json_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "c.jsonl", &to_jsonl(&java_corpus()));
    let o = codebleu(&["score", "--jsonl", &path]);
    let text = stdout(&o);
    assert_eq!(ScoreReport::from_json(&text).unwrap().to_json(), text);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["degraded_pairs"], 2);
    assert_eq!(v["config"]["weights"]["alpha"], 0.25);
}

#[test]
fn unparseable_code_still_exits_zero() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "unparseable-candidate");
    let o = codebleu(&["score", "--jsonl", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(corpus_value(&o, "codebleu"), 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "example1");
    assert_eq!(
        codebleu(&["score", "--jsonl", &path, "--weights", "1,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        codebleu(&["score", "--jsonl", &path, "--lang", "cobol"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(codebleu(&["score", "--bogus"]).status.code(), Some(2));
    assert_eq!(codebleu(&["score"]).status.code(), Some(2));
    let missing = dir.path().join("missing.jsonl");
    let missing = missing.to_string_lossy();
    assert_eq!(
        codebleu(&["score", "--jsonl", &missing]).status.code(),
        Some(3)
    );
    let bad = write(&dir, "bad.jsonl", "{oops\n");
    assert_eq!(codebleu(&["score", "--jsonl", &bad]).status.code(), Some(3));
    assert_eq!(codebleu(&["--help"]).status.code(), Some(0));
}

#[test]
fn dump_dfg_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "example1");
    let o = codebleu(&["score", "--jsonl", &path, "--dump-dfg"]);
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("# example1 candidate\nvar_0 comesFrom []\nvar_0 comesFrom [var_0]\n"));
    assert!(err.contains("# example1 reference 0\n"));
    assert!(!stdout(&o).contains("comesFrom"));
}

fn systems(dir: &TempDir) -> (String, String, String) {
    let records = common::mutated_corpus();
    let good = write(dir, "good.jsonl", &to_jsonl(&records));
    let worse: Vec<CorpusRecord> = records
        .iter()
        .map(|r| {
            CorpusRecord::new(
                r.id.clone(),
                r.candidate.replace(';', ""),
                r.references.clone(),
            )
        })
        .collect();
    let worse = write(dir, "worse.jsonl", &to_jsonl(&worse));
    let mut tsv = String::from("id\tscore\n");
    for r in &records {
        tsv.push_str(&format!("good/{}\t4\nworse/{}\t2\n", r.id, r.id));
    }
    let human = write(dir, "human.tsv", &tsv);
    (format!("good={good}"), format!("worse={worse}"), human)
}

#[test]
fn correlate_with_sweep() {
    let dir = TempDir::new().unwrap();
    let (good, worse, human) = systems(&dir);
    let o = codebleu(&[
        "correlate",
        "--system",
        &good,
        "--system",
        &worse,
        "--human",
        &human,
        "--mode",
        "pair",
        "--sweep",
        "table6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("metric\tpearson\n"));
    assert!(text.contains("[7]\t0.10,0.10,0.40,0.40\t"));
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 7);
}

#[test]
fn correlate_degenerate_exits_4() {
    let dir = TempDir::new().unwrap();
    let (good, _, human) = systems(&dir);
    let o = codebleu(&["correlate", "--system", &good, "--human", &human]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn blocks_report() {
    let dir = TempDir::new().unwrap();
    let (good, worse, _) = systems(&dir);
    let o = codebleu(&[
        "blocks",
        "--system",
        &good,
        "--system",
        &worse,
        "--block-size",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("5 blocks of 5 pairs; paired t >= 1.7 is significant at 95%"));
    assert!(text.lines().any(|l| l.starts_with("worse\t")));
    let o = codebleu(&["blocks", "--system", &good, "--block-size", "25"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn thread_cap() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "example1");
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_codebleu"))
            .args(["score", "--jsonl", &path])
            .env("CODEBLEU_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn reproduce_passes() {
    let o = codebleu(&["reproduce"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn keyword_override_file() {
    let dir = TempDir::new().unwrap();
    let path = fixture_jsonl(&dir, "example1");
    let kw = write(&dir, "kw.txt", "# nothing is a keyword\n");
    let o = codebleu(&["score", "--jsonl", &path, "--keywords", &kw]);
    assert!(o.status.success());
    assert_eq!(corpus_value(&o, "weighted"), corpus_value(&o, "bleu"));
}
