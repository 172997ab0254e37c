use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;

use super::Span;
use crate::automata::StateId;
use crate::data::Symbol;
use crate::expr::Expr;
use crate::scsp::Domain;
use crate::semiring::{CompositeKind, Side};

/// A parsed model. Declarations are keyed by name, so printing is
/// deterministic regardless of source order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub semirings: BTreeMap<Symbol, SemiringDecl>,
    pub domains: BTreeMap<Symbol, DomainDecl>,
    pub homs: BTreeMap<Symbol, HomDecl>,
    pub automata: BTreeMap<Symbol, AutomatonDecl>,
    pub compositions: BTreeMap<Symbol, ComposeDecl>,
    pub problems: BTreeMap<Symbol, ProblemDecl>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.semirings.is_empty()
            && self.domains.is_empty()
            && self.homs.is_empty()
            && self.automata.is_empty()
            && self.compositions.is_empty()
            && self.problems.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiringDecl {
    pub name: Symbol,
    pub expr: SemiringExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiringExpr {
    pub kind: SemiringExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemiringExprKind {
    Bool,
    Weighted,
    Prob,
    Set(BTreeSet<Symbol>),
    Prod(Box<SemiringExpr>, Box<SemiringExpr>),
    Join(Box<SemiringExpr>, Box<SemiringExpr>),
    Lex(Box<SemiringExpr>, Box<SemiringExpr>),
    Named(Symbol),
}

impl SemiringExpr {
    pub fn new(kind: SemiringExprKind) -> Self {
        SemiringExpr { kind, span: Span::default() }
    }
}

/// `domain port = {…};`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDecl {
    pub port: Symbol,
    pub values: Domain,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomDecl {
    pub name: Symbol,
    pub expr: HomExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomExpr {
    Identity(SemiringExpr),
    EmbedBool(SemiringExpr),
    Inject { side: Side, kind: CompositeKind, left: SemiringExpr, right: SemiringExpr },
    JoinToProduct(SemiringExpr, SemiringExpr),
}

/// A preference literal, resolved against a semiring during checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefLit {
    Num(BigRational),
    Inf,
    Top,
    Bot,
    Zero,
    One,
    Set(BTreeSet<Symbol>),
    Pair(Box<PrefLit>, Box<PrefLit>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransDecl {
    pub source: StateId,
    pub target: StateId,
    pub fired: BTreeSet<Symbol>,
    pub guard: Expr,
    pub pref: PrefLit,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonDecl {
    pub name: Symbol,
    pub semiring: SemiringExpr,
    pub states: Vec<StateId>,
    pub init: Option<StateId>,
    /// Ports beyond those fired by some transition.
    pub ports: BTreeSet<Symbol>,
    /// Local domains, overriding document-level ones.
    pub domains: BTreeMap<Symbol, DomainDecl>,
    pub transitions: Vec<TransDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposeDecl {
    pub name: Symbol,
    pub expr: CompExpr,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompOp {
    Product,
    Join,
    Lex,
}

impl CompOp {
    pub fn keyword(self) -> &'static str {
        match self {
            CompOp::Product => "product",
            CompOp::Join => "join",
            CompOp::Lex => "lex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompExpr {
    pub kind: CompExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompExprKind {
    Ref(Symbol),
    /// n-ary, folded from the left.
    Op(CompOp, Vec<CompExpr>),
    Apply(Symbol, Box<CompExpr>),
}

impl CompExpr {
    pub fn new(kind: CompExprKind) -> Self {
        CompExpr { kind, span: Span::default() }
    }

    pub fn name(n: &str) -> Self {
        CompExpr::new(CompExprKind::Ref(Symbol::new(n)))
    }

    pub fn op(op: CompOp, args: Vec<CompExpr>) -> Self {
        CompExpr::new(CompExprKind::Op(op, args))
    }

    pub fn apply(hom: &str, arg: CompExpr) -> Self {
        CompExpr::new(CompExprKind::Apply(Symbol::new(hom), Box::new(arg)))
    }
}

/// `on {scope} where φ pref e;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub scope: BTreeSet<Symbol>,
    pub guard: Expr,
    pub pref: PrefLit,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDecl {
    pub name: Symbol,
    pub semiring: SemiringExpr,
    pub domains: BTreeMap<Symbol, DomainDecl>,
    pub constraints: Vec<ConstraintDecl>,
    pub span: Span,
}
