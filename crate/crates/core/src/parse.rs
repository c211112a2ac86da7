//! Shared tree-sitter front end used by the lexer, `syntax` and `dataflow`.
//!
//! Method-level snippets (the usual unit of generated code) are embedded in a
//! class stub before parsing, so that bare methods and whole classes produce
//! the same member-level structure. The stub's nodes stay in the tree; its
//! tokens are outside the snippet range and never reach the lexer.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use tree_sitter::{Node, Parser, Tree};

use crate::error::{Error, Result};
use crate::lexer::LanguageId;

static PARSES: AtomicUsize = AtomicUsize::new(0);

thread_local! {
    static PARSERS: RefCell<HashMap<LanguageId, Parser>> = RefCell::new(HashMap::new());
}

const STUB_PREFIX: &str = "class Stub {\n";
const STUB_SUFFIX: &str = "\n}\n";

/// Number of snippets parsed by this process so far.
pub fn parse_count() -> usize {
    PARSES.load(Ordering::Relaxed)
}

pub(crate) struct ParsedSnippet {
    pub lang: LanguageId,
    pub text: String,
    pub tree: Tree,
    /// Byte range of the caller's source inside `text`.
    pub start: usize,
    pub end: usize,
}

impl ParsedSnippet {
    pub fn root(&self) -> Node<'_> {
        self.tree.root_node()
    }

    pub fn node_text(&self, node: Node<'_>) -> &str {
        &self.text[node.byte_range()]
    }

    pub fn has_error(&self) -> bool {
        self.tree.root_node().has_error()
    }
}

fn raw_parse(lang: LanguageId, text: &str) -> Result<Tree> {
    PARSERS.with(|cell| {
        let mut parsers = cell.borrow_mut();
        if let std::collections::hash_map::Entry::Vacant(e) = parsers.entry(lang) {
            let mut parser = Parser::new();
            parser
                .set_language(&lang.grammar())
                .map_err(|e| Error::Grammar(e.to_string()))?;
            e.insert(parser);
        }
        let parser = parsers.get_mut(&lang).expect("parser inserted above");
        parser
            .parse(text, None)
            .ok_or_else(|| Error::Grammar("parser returned no tree".into()))
    })
}

pub(crate) fn parse_snippet(source: &str, lang: LanguageId) -> Result<ParsedSnippet> {
    PARSES.fetch_add(1, Ordering::Relaxed);
    let bare = raw_parse(lang, source)?;
    let member_level = is_member_level(lang, bare.root_node());
    if member_level || bare.root_node().has_error() {
        let text = format!("{STUB_PREFIX}{source}{STUB_SUFFIX}");
        let tree = raw_parse(lang, &text)?;
        // Members the grammar only accepts inside a type (e.g. C# constructors).
        if member_level || !tree.root_node().has_error() {
            return Ok(ParsedSnippet {
                lang,
                start: STUB_PREFIX.len(),
                end: STUB_PREFIX.len() + source.len(),
                text,
                tree,
            });
        }
    }
    Ok(ParsedSnippet {
        lang,
        text: source.to_string(),
        tree: bare,
        start: 0,
        end: source.len(),
    })
}

/// True when every top-level construct is a method or constructor.
fn is_member_level(lang: LanguageId, root: Node<'_>) -> bool {
    let mut cursor = root.walk();
    let mut members = 0usize;
    for child in root.named_children(&mut cursor) {
        if child.is_extra() {
            continue;
        }
        let member = match lang {
            LanguageId::Java => {
                matches!(
                    child.kind(),
                    "method_declaration" | "constructor_declaration"
                )
            }
            LanguageId::CSharp => {
                child.kind() == "global_statement"
                    && child.named_child_count() == 1
                    && child
                        .named_child(0)
                        .is_some_and(|n| n.kind() == "local_function_statement")
            }
        };
        if !member {
            return false;
        }
        members += 1;
    }
    members > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_method_is_wrapped() {
        let p = parse_snippet("int f() { return 1; }", LanguageId::Java).unwrap();
        assert!(p.start > 0);
        assert_eq!(&p.text[p.start..p.end], "int f() { return 1; }");
        assert_eq!(p.root().named_child(0).unwrap().kind(), "class_declaration");
    }

    #[test]
    fn statements_are_not_wrapped() {
        let p = parse_snippet("int x = 0;", LanguageId::Java).unwrap();
        assert_eq!(p.start, 0);
        assert_eq!(p.root().kind(), "program");
    }

    #[test]
    fn csharp_local_function_is_wrapped() {
        let p = parse_snippet("public int F(int a) { return a; }", LanguageId::CSharp).unwrap();
        assert!(p.start > 0);
        assert!(!p.has_error());
    }

    #[test]
    fn csharp_constructor_is_wrapped() {
        let p = parse_snippet(
            "public Point(int x) {\n    this.X = x;\n}",
            LanguageId::CSharp,
        )
        .unwrap();
        assert!(p.start > 0);
        assert!(!p.has_error());
    }

    #[test]
    fn counter_advances() {
        let before = parse_count();
        parse_snippet("", LanguageId::CSharp).unwrap();
        assert!(parse_count() > before);
    }
}
