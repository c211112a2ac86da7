//! Splits two systems' outputs into blocks, scores each block at corpus
//! level and runs a paired t-test on the block scores.

use anyhow::Result;
use codebleu::score::{pair_stats, EvalConfig};
use codebleu::stats::codebleu_blocks;
use codebleu::LanguageId;

fn main() -> Result<()> {
    let cfg = EvalConfig::new(LanguageId::Java);
    let refs: Vec<String> = (0..60)
        .map(|i| {
            format!(
                "int f{i}(int x) {{ int y = x * {i}; if (y > {}) {{ y -= x; }} return y; }}",
                i % 7
            )
        })
        .collect();
    let baseline = refs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let c = if i % 3 == 0 {
                r.replace("y -= x", "y += x")
            } else {
                r.replace("return y", "return x")
            };
            pair_stats(&c, &[r.as_str()], &cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let improved = refs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let c = if i % 4 == 0 {
                r.replace("y -= x", "y += x")
            } else {
                r.clone()
            };
            pair_stats(&c, &[r.as_str()], &cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let systems = vec![
        ("baseline".to_string(), baseline),
        ("improved".to_string(), improved),
    ];
    let report = codebleu_blocks(&systems, 10, &cfg)?;
    print!("{report}");
    Ok(())
}
