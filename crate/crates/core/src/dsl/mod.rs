//! The `.sca` model format: parsing, checking, printing and elaboration.
//!
//! ```text
//! semiring W = weighted;
//! domain forward = {1..5};
//! automaton Patrol over W {
//!     states q_F, q_B;
//!     init q_F;
//!     trans q_F -> q_F on {forward} pref 1;
//!     trans q_F -> q_B on {stay_P, turn} where turn = 5 pref 1;
//! }
//! compose Move = product(apply(bw, Path), Patrol);
//! ```
//!
//! Double quotes delimit atom values; backticks escape identifiers that are
//! not plain (`` `r-1` ``). `#` starts a line comment.

mod ast;
mod check;
mod elaborate;
mod lexer;
mod parser;
mod print;

use std::fmt;

pub use ast::*;
pub use elaborate::{elaborate, Elaborator, Model};
pub use parser::parse;
pub use elaborate::resolve_pref;
pub use print::{automaton_decl, pref_lit, semiring_expr, serialize};

const KEYWORDS: &[&str] = &[
    "apply", "automaton", "bool", "bot", "compose", "domain", "embed_bool", "false", "hom", "identity", "in", "inf",
    "init", "inject_left", "inject_right", "join", "join_to_product", "lex", "on", "one", "over", "ports", "pref",
    "prob", "problem", "prod", "product", "semiring", "set", "states", "top", "trans", "true", "weighted", "where",
    "zero",
];

/// Whether `s` is reserved and must be written in backticks as a name.
pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.binary_search(&s).is_ok()
}

/// A position in the source text; lines and columns count from 1.
#[derive(Debug, Clone, Copy, Default, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
}

/// A source range. Spans never take part in structural comparison, so a
/// reparsed document equals the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }

    /// Whether `inner` lies within this span.
    pub fn contains(&self, inner: &Span) -> bool {
        self.start.offset <= inner.start.offset && inner.end.offset <= self.end.offset
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl PartialEq for Pos {
    fn eq(&self, other: &Pos) -> bool {
        self.offset == other.offset
    }
}

impl Eq for Pos {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    SyntaxError,
    UnresolvedName,
    Duplicate,
    CarrierMismatch,
    CancellativityRequired,
    SemiringMismatch,
    DomainMismatch,
    MissingDomain,
    Invalid,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagnosticKind::SyntaxError => "syntax error",
            DiagnosticKind::UnresolvedName => "unresolved name",
            DiagnosticKind::Duplicate => "duplicate declaration",
            DiagnosticKind::CarrierMismatch => "carrier mismatch",
            DiagnosticKind::CancellativityRequired => "cancellativity required",
            DiagnosticKind::SemiringMismatch => "semiring mismatch",
            DiagnosticKind::DomainMismatch => "domain mismatch",
            DiagnosticKind::MissingDomain => "missing domain",
            DiagnosticKind::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {kind}: {message}")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { kind, message: message.into(), span }
    }
}
