//! Language-aware tokenization.
//!
//! Tokens are the leaves of the same concrete syntax tree that `syntax` and
//! `dataflow` consume, so all components agree on token boundaries. Comments
//! and whitespace are dropped. Text the grammar cannot place falls back to
//! whitespace-split tokens of kind [`TokenKind::Other`].

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use crate::error::{Error, Result};
use crate::parse::{parse_snippet, ParsedSnippet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageId {
    Java,
    #[serde(rename = "csharp")]
    CSharp,
}

impl LanguageId {
    pub const ALL: [LanguageId; 2] = [LanguageId::Java, LanguageId::CSharp];

    pub fn name(self) -> &'static str {
        match self {
            LanguageId::Java => "java",
            LanguageId::CSharp => "csharp",
        }
    }

    pub(crate) fn grammar(self) -> tree_sitter::Language {
        match self {
            LanguageId::Java => tree_sitter_java::LANGUAGE.into(),
            LanguageId::CSharp => tree_sitter_c_sharp::LANGUAGE.into(),
        }
    }

    /// Built-in reserved words.
    pub fn reserved_words(self) -> &'static [&'static str] {
        match self {
            LanguageId::Java => JAVA_KEYWORDS,
            LanguageId::CSharp => CSHARP_KEYWORDS,
        }
    }

    fn atomic_kinds(self) -> &'static [&'static str] {
        match self {
            LanguageId::Java => &["string_literal", "character_literal"],
            LanguageId::CSharp => &[
                "string_literal",
                "verbatim_string_literal",
                "raw_string_literal",
                "interpolated_string_expression",
                "character_literal",
            ],
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(LanguageId::Java),
            "csharp" | "c#" | "cs" | "c_sharp" => Ok(LanguageId::CSharp),
            _ => Err(Error::UnsupportedLanguage(s.to_string())),
        }
    }
}

/// The 50 reserved words of the Java SE language.
const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

/// C# reserved (non-contextual) keywords.
const CSHARP_KEYWORDS: &[&str] = &[
    "abstract",
    "as",
    "base",
    "bool",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "checked",
    "class",
    "const",
    "continue",
    "decimal",
    "default",
    "delegate",
    "do",
    "double",
    "else",
    "enum",
    "event",
    "explicit",
    "extern",
    "false",
    "finally",
    "fixed",
    "float",
    "for",
    "foreach",
    "goto",
    "if",
    "implicit",
    "in",
    "int",
    "interface",
    "internal",
    "is",
    "lock",
    "long",
    "namespace",
    "new",
    "null",
    "object",
    "operator",
    "out",
    "override",
    "params",
    "private",
    "protected",
    "public",
    "readonly",
    "ref",
    "return",
    "sbyte",
    "sealed",
    "short",
    "sizeof",
    "stackalloc",
    "static",
    "string",
    "struct",
    "switch",
    "this",
    "throw",
    "true",
    "try",
    "typeof",
    "uint",
    "ulong",
    "unchecked",
    "unsafe",
    "ushort",
    "using",
    "virtual",
    "void",
    "volatile",
    "while",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordSet(HashSet<String>);

impl KeywordSet {
    pub fn builtin(lang: LanguageId) -> Self {
        lang.reserved_words().iter().copied().collect()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Parses an override file: one keyword per line, `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    }
}

impl<S: Into<String>> FromIterator<S> for KeywordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        KeywordSet(iter.into_iter().map(Into::into).collect())
    }
}

/// Keyword set for `lang`, replaced wholesale by the override file if given.
pub fn load_keywords(lang: LanguageId, override_path: Option<&Path>) -> Result<KeywordSet> {
    match override_path {
        None => Ok(KeywordSet::builtin(lang)),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(KeywordSet::parse(&text))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Literal,
    Punctuation,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

/// Token stream of one snippet. Equality ignores source spans.
#[derive(Debug, Clone)]
pub struct TokenSeq {
    tokens: Vec<Token>,
    spans: Vec<Range<usize>>,
    language: LanguageId,
}

impl PartialEq for TokenSeq {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language && self.tokens == other.tokens
    }
}

impl TokenSeq {
    /// Builds a sequence from pre-split words, classifying keywords against
    /// the built-in set. Non-keywords get kind `Other`.
    pub fn from_words<S: AsRef<str>>(words: &[S], language: LanguageId) -> Self {
        let keywords = KeywordSet::builtin(language);
        let tokens = words
            .iter()
            .map(|w| {
                let text = w.as_ref().to_string();
                let kind = if keywords.contains(&text) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Other
                };
                Token { text, kind }
            })
            .collect::<Vec<_>>();
        TokenSeq {
            spans: vec![0..0; tokens.len()],
            tokens,
            language,
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Byte ranges of each token in the original source.
    pub fn spans(&self) -> &[Range<usize>] {
        &self.spans
    }

    pub fn language(&self) -> LanguageId {
        self.language
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Token texts joined by single spaces.
    pub fn joined(&self) -> String {
        self.texts().join(" ")
    }

    pub fn has_fallback_tokens(&self) -> bool {
        self.tokens.iter().any(|t| t.kind == TokenKind::Other)
    }
}

pub fn tokenize(source: &str, lang: LanguageId) -> Result<TokenSeq> {
    let parsed = parse_snippet(source, lang)?;
    Ok(tokens_of(&parsed))
}

enum Piece {
    Token(TokenKind),
    Fallback,
    Skip,
}

pub(crate) fn tokens_of(parsed: &ParsedSnippet) -> TokenSeq {
    let keywords = KeywordSet::builtin(parsed.lang);
    let mut pieces: Vec<(Range<usize>, Piece)> = Vec::new();
    collect_pieces(parsed, parsed.root(), &keywords, &mut pieces);

    let mut seq = TokenSeq {
        tokens: Vec::new(),
        spans: Vec::new(),
        language: parsed.lang,
    };
    let mut cursor = parsed.start;
    for (range, piece) in pieces {
        if range.start > cursor {
            push_fallback(parsed, cursor..range.start, &mut seq);
        }
        match piece {
            Piece::Token(kind) => {
                seq.tokens.push(Token {
                    text: parsed.text[range.clone()].to_string(),
                    kind,
                });
                seq.spans
                    .push(range.start - parsed.start..range.end - parsed.start);
            }
            Piece::Fallback => push_fallback(parsed, range.clone(), &mut seq),
            Piece::Skip => {}
        }
        cursor = cursor.max(range.end);
    }
    if cursor < parsed.end {
        push_fallback(parsed, cursor..parsed.end, &mut seq);
    }
    seq
}

fn push_fallback(parsed: &ParsedSnippet, range: Range<usize>, seq: &mut TokenSeq) {
    let text = &parsed.text[range.clone()];
    let mut offset = 0;
    for word in text.split_whitespace() {
        let at = offset + text[offset..].find(word).expect("word comes from text");
        offset = at + word.len();
        seq.tokens.push(Token {
            text: word.to_string(),
            kind: TokenKind::Other,
        });
        let abs = range.start + at - parsed.start;
        seq.spans.push(abs..abs + word.len());
    }
}

fn collect_pieces(
    parsed: &ParsedSnippet,
    node: Node<'_>,
    keywords: &KeywordSet,
    out: &mut Vec<(Range<usize>, Piece)>,
) {
    let range = node.byte_range();
    if range.end <= parsed.start || range.start >= parsed.end {
        return;
    }
    if range.start == range.end {
        return;
    }
    let atomic = parsed.lang.atomic_kinds().contains(&node.kind());
    if node.child_count() > 0 && !atomic {
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            collect_pieces(parsed, child, keywords, out);
        }
        return;
    }
    let range = range.start.max(parsed.start)..range.end.min(parsed.end);
    let piece = if node.kind().contains("comment") {
        Piece::Skip
    } else if node.is_error() {
        Piece::Fallback
    } else {
        let text = &parsed.text[range.clone()];
        if text.chars().any(char::is_whitespace) && !atomic {
            Piece::Fallback
        } else {
            Piece::Token(classify(node, text, keywords))
        }
    };
    out.push((range, piece));
}

fn classify(node: Node<'_>, text: &str, keywords: &KeywordSet) -> TokenKind {
    let kind = node.kind();
    if keywords.contains(text) {
        TokenKind::Keyword
    } else if matches!(
        kind,
        "identifier" | "type_identifier" | "implicit_parameter"
    ) {
        TokenKind::Identifier
    } else if kind.contains("literal")
        || kind.contains("string")
        || matches!(kind, "true" | "false" | "null")
    {
        TokenKind::Literal
    } else if text.chars().all(|c| c.is_ascii_punctuation()) {
        TokenKind::Punctuation
    } else if node.is_named() {
        // Named leaves the grammar does not call identifiers, e.g. `var`.
        TokenKind::Identifier
    } else {
        TokenKind::Other
    }
}
