//! Subtree matching on leaf-stripped syntax trees. Renaming variables does
//! not move the score, changing structure does.

use anyhow::Result;
use codebleu::syntax::{ast_match, parse_ast, subtree_bag};
use codebleu::LanguageId;

fn main() -> Result<()> {
    let lang = LanguageId::Java;
    let reference = "int f(int n) { int s = 0; for (int i = 0; i < n; i++) s += i; return s; }";
    let tree = parse_ast(reference, lang)?;
    let bag = subtree_bag(&tree);
    println!(
        "reference: {} nodes, {} subtrees, {} distinct",
        tree.node_count(),
        bag.total(),
        bag.distinct().count()
    );
    let mut top: Vec<_> = bag.distinct().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.len().cmp(&b.0.len())));
    for (sig, n) in top.iter().take(5) {
        println!("  {n} x {sig}");
    }

    let cands = [
        (
            "renamed",
            "int g(int m) { int t = 0; for (int j = 0; j < m; j++) t += j; return t; }",
        ),
        (
            "while loop",
            "int f(int n) { int s = 0; int i = 0; while (i < n) { s += i; i++; } return s; }",
        ),
        ("statement dropped", "int f(int n) { int s = 0; return s; }"),
    ];
    for (label, c) in cands {
        println!("{label:<18} ast {:.4}", ast_match(c, &[reference], lang)?);
    }
    Ok(())
}
