//! Extracts the data-flow graph of a snippet and its name-normalized form.
//!
//! Pass a file path to inspect your own code: `cargo run --example dataflow -- Foo.java`.

use anyhow::{Context, Result};
use codebleu::dataflow::{dataflow_match, extract_dfg, normalize};
use codebleu::LanguageId;

const DEFAULT: &str =
    "int abs(int x) {\n    int y = x;\n    if (x < 0) {\n        y = -x;\n    }\n    return y;\n}";

fn main() -> Result<()> {
    let (src, lang) = match std::env::args().nth(1) {
        Some(path) => {
            let lang = if path.ends_with(".cs") {
                LanguageId::CSharp
            } else {
                LanguageId::Java
            };
            (
                std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?,
                lang,
            )
        }
        None => (DEFAULT.to_string(), LanguageId::Java),
    };
    let graph = extract_dfg(&src, lang)?;
    println!("{graph}");
    println!("normalized:\n{}", normalize(&graph));

    // Returning the input instead of the absolute value breaks one edge.
    let broken = DEFAULT.replace("return y;", "return x;");
    let df = dataflow_match(&broken, &[DEFAULT], LanguageId::Java)?;
    println!(
        "return x instead of y: dataflow {:.4}",
        df.unwrap_or(f64::NAN)
    );
    Ok(())
}
