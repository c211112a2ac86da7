//! CodeBLEU for Java and C#.
//!
//! The score of a candidate snippet against one or more references is a
//! weighted combination of four components:
//!
//! * corpus BLEU over the language-aware token stream ([`ngram::bleu`]),
//! * the keyword-weighted n-gram match ([`ngram::weighted_ngram_match`]),
//! * the clipped match of leaf-stripped AST subtrees ([`syntax::ast_match`]),
//! * the clipped match of normalized data-flow triples ([`dataflow::dataflow_match`]).
//!
//! [`score::score_corpus`] computes all four at pair and corpus level, and
//! [`stats`] holds the tooling used to validate a metric against human
//! judgments (Pearson correlation, block statistics, weight sweeps).
//!
//! ```
//! use codebleu::{score::{score_corpus, EvalConfig}, CorpusRecord, LanguageId};
//!
//! let code = "int sum(int[] a) { int s = 0; for (int x : a) { s += x; } return s; }";
//! let records = vec![CorpusRecord::new("0", code, vec![code.to_string()])];
//! let cfg = EvalConfig::new(LanguageId::Java);
//! let report = score_corpus(&records, &cfg).unwrap();
//! assert_eq!(report.corpus.codebleu, Some(1.0));
//! ```

pub mod cli;
pub mod corpus;
pub mod dataflow;
mod error;
pub mod fixtures;
pub mod lexer;
pub mod ngram;
mod parse;
pub mod report;
pub mod score;
pub mod stats;
pub mod syntax;

pub use corpus::CorpusRecord;
pub use error::{Error, Result};
pub use lexer::{KeywordSet, LanguageId, Token, TokenKind, TokenSeq};
pub use parse::parse_count;
