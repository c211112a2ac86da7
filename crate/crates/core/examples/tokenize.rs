//! Language-aware tokenization. Keywords, identifiers and literals come out
//! as separate kinds; comments are dropped.

use anyhow::Result;
use codebleu::lexer::tokenize;
use codebleu::{KeywordSet, LanguageId};

fn main() -> Result<()> {
    let java = "// adds one\npublic int inc(int x) { return x + 1; /* trailing */ }";
    let csharp = "public string Greet(string name) => $\"hi {name}\";";
    for (src, lang) in [(java, LanguageId::Java), (csharp, LanguageId::CSharp)] {
        let kw = KeywordSet::builtin(lang);
        let seq = tokenize(src, lang)?;
        println!(
            "{} ({} tokens, {} keywords known)",
            lang.name(),
            seq.len(),
            kw.len()
        );
        for t in seq.tokens() {
            let star = if kw.contains(&t.text) { "*" } else { " " };
            println!("  {star} {:<12} {:?}", t.text, t.kind);
        }
        println!("  joined: {}", seq.joined());
    }
    Ok(())
}
