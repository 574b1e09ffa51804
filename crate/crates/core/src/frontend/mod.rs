//! Lexing, parsing and pretty-printing of MTL source.

mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::*;
pub use lexer::{tokenize, Keyword, Punct, Span, Token, TokenKind};
pub use parser::parse_program;
pub use pretty::pretty_print;

use crate::error::CompileError;

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<SourceProgram, CompileError> {
    parse_program(&tokenize(source)?)
}

/// Normalizes a docstring: strips surrounding blank lines and removes the
/// common indentation of continuation lines. Returns `None` when nothing is left.
pub fn clean_docstring(raw: &str) -> Option<String> {
    let lines: Vec<&str> = raw.lines().collect();
    let indent = lines
        .iter()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    let mut cleaned: Vec<String> = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let line = if i == 0 {
            line.trim_start()
        } else {
            line.get(indent..).unwrap_or_else(|| line.trim_start())
        };
        cleaned.push(line.trim_end().to_string());
    }
    while cleaned.first().is_some_and(|l| l.is_empty()) {
        cleaned.remove(0);
    }
    while cleaned.last().is_some_and(|l| l.is_empty()) {
        cleaned.pop();
    }
    if cleaned.is_empty() {
        None
    } else {
        Some(cleaned.join("\n"))
    }
}
