use thiserror::Error;

use crate::frontend::Span;

/// Diagnostics produced while compiling an MTL unit (front-end and symbol passes).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{span}: lexical error: {message}")]
    Lex { message: String, span: Span },

    #[error("{span}: syntax error: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        expected: Vec<String>,
        found: String,
        span: Span,
    },

    #[error("{span}: {message}")]
    Invalid { message: String, span: Span },

    #[error("{second}: duplicate name `{name}` in the same scope (first declared at {first})")]
    DuplicateName {
        name: String,
        first: Span,
        second: Span,
    },

    #[error("{span}: undeclared type `{name}`")]
    UndeclaredType { name: String, span: Span },

    #[error("{span}: type `{name}` takes {expected} type argument(s), found {found}")]
    TypeArity {
        name: String,
        expected: usize,
        found: usize,
        span: Span,
    },

    #[error(
        "{span}: cannot resolve `{path}`: segment {index} `{segment}` not found{}",
        candidate_hint(candidates)
    )]
    Unresolved {
        path: String,
        /// 1-based position of the failing segment.
        index: usize,
        segment: String,
        candidates: Vec<String>,
        span: Span,
    },

    #[error("{second}: duplicate sem for `{target}` (first sem at {first})")]
    DuplicateSem {
        target: String,
        first: Span,
        second: Span,
    },

    #[error("no by-llm function named `{name}`{}", candidate_hint(candidates))]
    UnknownCallsite {
        name: String,
        candidates: Vec<String>,
    },
}

impl CompileError {
    /// Every source span the diagnostic refers to, primary span first.
    pub fn spans(&self) -> Vec<Span> {
        match self {
            CompileError::Lex { span, .. }
            | CompileError::Syntax { span, .. }
            | CompileError::Invalid { span, .. }
            | CompileError::UndeclaredType { span, .. }
            | CompileError::TypeArity { span, .. }
            | CompileError::Unresolved { span, .. } => vec![*span],
            CompileError::DuplicateName { first, second, .. }
            | CompileError::DuplicateSem { first, second, .. } => vec![*second, *first],
            CompileError::UnknownCallsite { .. } => vec![],
        }
    }
}

fn candidate_hint(candidates: &[String]) -> String {
    if candidates.is_empty() {
        String::new()
    } else {
        format!(" (candidates: {})", candidates.join(", "))
    }
}
