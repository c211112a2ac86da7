//! Scores every bundled fixture and checks it against its recorded expectations.

use anyhow::Result;
use codebleu::fixtures::load_fixtures;

fn main() -> Result<()> {
    let mut failed = 0;
    for f in load_fixtures() {
        let (s, degraded) = f.score()?;
        println!(
            "{:<24} bleu {:.4}  weighted {:.4}  ast {:.4}  dataflow {}  codebleu {}{}",
            f.name,
            s.bleu,
            s.weighted,
            s.ast,
            s.dataflow.map_or("-".into(), |d| format!("{d:.4}")),
            s.codebleu.map_or("-".into(), |c| format!("{c:.4}")),
            if degraded { "  (degraded)" } else { "" },
        );
        for o in f.evaluate()? {
            let mark = if o.passed { "ok  " } else { "FAIL" };
            println!("    {mark} [{:?}] {}", o.provenance, o.description);
            failed += usize::from(!o.passed);
        }
    }
    anyhow::ensure!(failed == 0, "{failed} expectations failed");
    Ok(())
}
