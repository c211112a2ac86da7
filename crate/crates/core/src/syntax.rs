//! Syntactic match over leaf-stripped AST subtrees.
//!
//! Every node of the stripped tree roots one subtree; its signature is the
//! node kind followed by the children's signatures, parenthesized. Token
//! leaves (identifiers, literals, keywords, punctuation) and comments are
//! removed first, so names never influence the match.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use crate::error::{Error, Result};
use crate::lexer::LanguageId;
use crate::parse::{parse_snippet, ParsedSnippet};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstNode {
    pub kind: String,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn leaf(kind: impl Into<String>) -> Self {
        AstNode {
            kind: kind.into(),
            children: Vec::new(),
        }
    }

    pub fn new(kind: impl Into<String>, children: Vec<AstNode>) -> Self {
        AstNode {
            kind: kind.into(),
            children,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Canonical serialization, e.g. `(A(B)(B))`.
    pub fn signature(&self) -> String {
        let mut out = String::new();
        self.write_signature(&mut out);
        out
    }

    fn write_signature(&self, out: &mut String) {
        out.push('(');
        out.push_str(&self.kind);
        for child in &self.children {
            child.write_signature(out);
        }
        out.push(')');
    }
}

impl fmt::Display for AstNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

/// Multiset of subtree signatures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeBag {
    counts: BTreeMap<String, usize>,
    total: usize,
}

impl SubtreeBag {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, signature: &str) -> usize {
        self.counts.get(signature).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> impl Iterator<Item = (&str, usize)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    fn insert(&mut self, signature: String) {
        *self.counts.entry(signature).or_default() += 1;
        self.total += 1;
    }

    /// `sum_sig min(self[sig], reference[sig])`.
    pub fn clipped_against(&self, reference: &SubtreeBag) -> usize {
        self.counts
            .iter()
            .map(|(sig, &c)| c.min(reference.count(sig)))
            .sum()
    }
}

pub fn parse_ast(source: &str, lang: LanguageId) -> Result<AstNode> {
    let parsed = parse_snippet(source, lang)?;
    Ok(ast_of(&parsed))
}

pub(crate) fn ast_of(parsed: &ParsedSnippet) -> AstNode {
    let root = parsed.root();
    // A lone error node stands for the whole input.
    let lone_error = root.child_count() == 1 && root.child(0).is_some_and(|c| c.is_error());
    if root.is_error() || lone_error {
        return AstNode::leaf("ERROR");
    }
    strip(root)
}

fn strip(node: Node<'_>) -> AstNode {
    let mut cursor = node.walk();
    let children = node
        .children(&mut cursor)
        .filter(|c| c.child_count() > 0)
        .map(strip)
        .collect();
    AstNode::new(node.kind(), children)
}

pub fn subtree_bag(tree: &AstNode) -> SubtreeBag {
    let mut bag = SubtreeBag::default();
    collect(tree, &mut bag);
    bag
}

fn collect(node: &AstNode, bag: &mut SubtreeBag) -> String {
    let mut sig = String::with_capacity(node.kind.len() + 2);
    sig.push('(');
    sig.push_str(&node.kind);
    for child in &node.children {
        sig.push_str(&collect(child, bag));
    }
    sig.push(')');
    bag.insert(sig.clone());
    sig
}

/// Clipped count and reference total for the best-matching reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AstCounts {
    pub clipped: usize,
    pub total: usize,
}

impl AstCounts {
    pub fn ratio(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.clipped as f64 / self.total as f64
        }
    }
}

/// Scores one reference bag; an empty reference matches only an empty candidate.
fn reference_score(cand: &SubtreeBag, reference: &SubtreeBag) -> (f64, AstCounts) {
    if reference.is_empty() {
        let r = if cand.is_empty() { 1.0 } else { 0.0 };
        return (r, AstCounts::default());
    }
    let counts = AstCounts {
        clipped: cand.clipped_against(reference),
        total: reference.total(),
    };
    (counts.ratio(), counts)
}

/// Max over references of the per-reference ratio, with that reference's counts.
pub fn best_match(cand: &SubtreeBag, refs: &[SubtreeBag]) -> Option<(f64, AstCounts)> {
    refs.iter().map(|r| reference_score(cand, r)).fold(
        None,
        |best: Option<(f64, AstCounts)>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        },
    )
}

pub fn ast_match(cand_src: &str, ref_srcs: &[&str], lang: LanguageId) -> Result<f64> {
    if ref_srcs.is_empty() {
        return Err(Error::InvalidInput(
            "at least one reference is required".into(),
        ));
    }
    let cand = subtree_bag(&parse_ast(cand_src, lang)?);
    let refs = ref_srcs
        .iter()
        .map(|r| parse_ast(r, lang).map(|t| subtree_bag(&t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_match(&cand, &refs).map(|(r, _)| r).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_bag() {
        let bag = subtree_bag(&AstNode::leaf("A"));
        assert_eq!(bag.total(), 1);
        assert_eq!(bag.count("(A)"), 1);
    }

    #[test]
    fn duplicate_children() {
        let tree = AstNode::new("A", vec![AstNode::leaf("B"), AstNode::leaf("B")]);
        let bag = subtree_bag(&tree);
        assert_eq!(bag.total(), 3);
        assert_eq!(bag.count("(A(B)(B))"), 1);
        assert_eq!(bag.count("(B)"), 2);
        assert_eq!(tree.signature(), "(A(B)(B))");
    }

    #[test]
    fn root_is_program() {
        let tree = parse_ast("class C { int x; }", LanguageId::Java).unwrap();
        assert_eq!(tree.kind, "program");
        let tree = parse_ast("int x;", LanguageId::Java).unwrap();
        assert_eq!(tree.kind, "program");
        let tree = parse_ast("class C { int x; }", LanguageId::CSharp).unwrap();
        assert_eq!(tree.kind, "compilation_unit");
    }

    #[test]
    fn empty_source_is_bare_root() {
        let tree = parse_ast("", LanguageId::Java).unwrap();
        assert!(tree.children.is_empty());
        assert_eq!(subtree_bag(&tree).total(), 1);
    }

    #[test]
    fn leaves_are_stripped() {
        let tree = parse_ast("int x = a + 1;", LanguageId::Java).unwrap();
        assert_eq!(
            tree.signature(),
            "(program(local_variable_declaration(integral_type)(variable_declarator(binary_expression))))"
        );
    }

    #[test]
    fn renaming_is_invisible() {
        let a = ast_match(
            "int f(int a) { return a * 2; }",
            &["int g(int q) { return q * 2; }"],
            LanguageId::Java,
        )
        .unwrap();
        assert_eq!(a, 1.0);
    }

    #[test]
    fn identical_is_one() {
        let src = "public void Run() { for (int i = 0; i < 3; i++) { Console.WriteLine(i); } }";
        assert_eq!(ast_match(src, &[src], LanguageId::CSharp).unwrap(), 1.0);
    }

    #[test]
    fn max_over_references() {
        let cand = "int f() { return 1; }";
        let refs = ["int f() { if (true) { return 1; } return 2; }", cand];
        assert_eq!(ast_match(cand, &refs, LanguageId::Java).unwrap(), 1.0);
    }

    #[test]
    fn empty_reference_bag() {
        let empty = SubtreeBag::default();
        let some = subtree_bag(&AstNode::leaf("A"));
        assert_eq!(
            best_match(&some, std::slice::from_ref(&empty)).unwrap().0,
            0.0
        );
        assert_eq!(best_match(&empty, &[SubtreeBag::default()]).unwrap().0, 1.0);
    }

    #[test]
    fn no_references_is_an_error() {
        assert!(ast_match("int x;", &[], LanguageId::Java).is_err());
    }
}
