use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::{Diagnostic, DiagnosticKind, Span};
use crate::automata::{self, Automaton, AutomatonError, Transition};
use crate::data::{Port, Symbol};
use crate::par::Exec;
use crate::scsp::{Constraint, Domain, Scsp, ScspError};
use crate::semiring::{Homomorphism, Pref, Semiring, SemiringError, SemiringKind, Weight};

/// Everything a document declares, built.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub semirings: BTreeMap<Symbol, Semiring>,
    pub homs: BTreeMap<Symbol, Homomorphism>,
    /// Declared automata and compositions.
    pub automata: BTreeMap<Symbol, Arc<Automaton>>,
    pub problems: BTreeMap<Symbol, Scsp>,
}

/// Builds every declaration of a checked document.
pub fn elaborate(doc: &Document) -> Result<Model, Vec<Diagnostic>> {
    let mut el = Elaborator::new(doc);
    let mut model = Model::default();
    let mut diags = Vec::new();
    for name in doc.semirings.keys() {
        match el.named_semiring(name, Span::default()) {
            Ok(s) => drop(model.semirings.insert(name.clone(), s)),
            Err(d) => diags.push(d),
        }
    }
    for name in doc.homs.keys() {
        match el.hom(name, Span::default()) {
            Ok(h) => drop(model.homs.insert(name.clone(), h)),
            Err(d) => diags.push(d),
        }
    }
    for name in doc.automata.keys().chain(doc.compositions.keys()) {
        match el.automaton(name) {
            Ok(a) => drop(model.automata.insert(name.clone(), a)),
            Err(d) => diags.push(d),
        }
    }
    for name in doc.problems.keys() {
        match el.problem(name) {
            Ok(p) => drop(model.problems.insert(name.clone(), p)),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(diags)
    }
}

fn diag(kind: DiagnosticKind, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(kind, span, msg)
}

pub(super) fn semiring_diag(e: SemiringError, span: Span) -> Diagnostic {
    let kind = match &e {
        SemiringError::CarrierViolation { .. } => DiagnosticKind::CarrierMismatch,
        SemiringError::NotCancellative { .. } => DiagnosticKind::CancellativityRequired,
        SemiringError::Mismatch { .. } => DiagnosticKind::SemiringMismatch,
        SemiringError::EmptyAlphabet | SemiringError::NotHomomorphism(_) => DiagnosticKind::Invalid,
    };
    diag(kind, span, e.to_string())
}

fn scsp_diag(e: ScspError, span: Span) -> Diagnostic {
    let kind = match &e {
        ScspError::Semiring(s) => return semiring_diag(s.clone(), span),
        ScspError::SemiringMismatch { .. } => DiagnosticKind::SemiringMismatch,
        ScspError::DomainMismatch(_) => DiagnosticKind::DomainMismatch,
        ScspError::MissingDomain(_) => DiagnosticKind::MissingDomain,
        ScspError::UnknownVariable(_) | ScspError::OutOfScope(_) => DiagnosticKind::UnresolvedName,
        _ => DiagnosticKind::Invalid,
    };
    diag(kind, span, e.to_string())
}

pub(super) fn automaton_diag(e: AutomatonError, span: Span) -> Diagnostic {
    let kind = match &e {
        AutomatonError::Semiring(s) => return semiring_diag(s.clone(), span),
        AutomatonError::Scsp(s) => return scsp_diag(s.clone(), span),
        AutomatonError::SemiringMismatch { .. } => DiagnosticKind::SemiringMismatch,
        AutomatonError::DomainMismatch(_) => DiagnosticKind::DomainMismatch,
        AutomatonError::Invalid(_) => DiagnosticKind::Invalid,
    };
    diag(kind, span, e.to_string())
}

/// Resolves a preference literal in `s`.
pub fn resolve_pref(lit: &PrefLit, s: &Semiring) -> Result<Pref, SemiringError> {
    let mismatch = || SemiringError::CarrierViolation { value: literal_guess(lit), semiring: s.clone() };
    let out = match (lit, s.kind()) {
        (PrefLit::Zero | PrefLit::Bot, _) => s.zero(),
        (PrefLit::One | PrefLit::Top, _) => s.one(),
        (PrefLit::Inf, SemiringKind::Weighted) => Pref::infinity(),
        (PrefLit::Num(n), SemiringKind::Weighted) => Pref::Weight(Weight::Finite(n.clone())),
        (PrefLit::Num(n), SemiringKind::Prob) => Pref::Prob(n.clone()),
        (PrefLit::Set(atoms), SemiringKind::Set(_)) => Pref::Set(atoms.clone()),
        (PrefLit::Pair(l, r), SemiringKind::Product(a, b) | SemiringKind::Join(a, b) | SemiringKind::Lex(a, b)) => {
            Pref::pair(resolve_pref(l, a)?, resolve_pref(r, b)?)
        }
        _ => return Err(mismatch()),
    };
    s.check(&out)?;
    Ok(out)
}

/// A best-effort value for error messages about literals that fit nowhere.
fn literal_guess(lit: &PrefLit) -> Pref {
    match lit {
        PrefLit::Num(n) => Pref::Prob(n.clone()),
        PrefLit::Inf => Pref::infinity(),
        PrefLit::Top | PrefLit::One => Pref::Bool(true),
        PrefLit::Bot | PrefLit::Zero => Pref::Bool(false),
        PrefLit::Set(s) => Pref::Set(s.clone()),
        PrefLit::Pair(l, r) => Pref::pair(literal_guess(l), literal_guess(r)),
    }
}

/// Lazily builds named declarations, memoizing each one.
pub struct Elaborator<'d> {
    doc: &'d Document,
    exec: Exec,
    semirings: BTreeMap<Symbol, Semiring>,
    automata: BTreeMap<Symbol, Arc<Automaton>>,
    in_progress: HashSet<Symbol>,
}

impl<'d> Elaborator<'d> {
    pub fn new(doc: &'d Document) -> Self {
        Self::with_exec(doc, Exec::default())
    }

    pub fn with_exec(doc: &'d Document, exec: Exec) -> Self {
        Elaborator { doc, exec, semirings: BTreeMap::new(), automata: BTreeMap::new(), in_progress: HashSet::new() }
    }

    pub fn document(&self) -> &'d Document {
        self.doc
    }

    fn enter(&mut self, name: &Symbol, span: Span) -> Result<(), Diagnostic> {
        if !self.in_progress.insert(name.clone()) {
            return Err(diag(DiagnosticKind::Invalid, span, format!("`{name}` is defined in terms of itself")));
        }
        Ok(())
    }

    pub fn named_semiring(&mut self, name: &Symbol, span: Span) -> Result<Semiring, Diagnostic> {
        if let Some(s) = self.semirings.get(name) {
            return Ok(s.clone());
        }
        let doc = self.doc;
        let decl = doc
            .semirings
            .get(name)
            .ok_or_else(|| diag(DiagnosticKind::UnresolvedName, span, format!("no semiring named `{name}`")))?;
        self.enter(name, decl.span)?;
        let out = self.semiring(&decl.expr);
        self.in_progress.remove(name);
        let s = out?;
        self.semirings.insert(name.clone(), s.clone());
        Ok(s)
    }

    pub fn semiring(&mut self, e: &SemiringExpr) -> Result<Semiring, Diagnostic> {
        let s = match &e.kind {
            SemiringExprKind::Bool => Semiring::boolean(),
            SemiringExprKind::Weighted => Semiring::weighted(),
            SemiringExprKind::Prob => Semiring::prob(),
            SemiringExprKind::Set(atoms) => Semiring::set_of(atoms.clone()).map_err(|x| semiring_diag(x, e.span))?,
            SemiringExprKind::Prod(l, r) => {
                let (l, r) = (self.semiring(l)?, self.semiring(r)?);
                Semiring::product(l, r)
            }
            SemiringExprKind::Join(l, r) => {
                let (l, r) = (self.semiring(l)?, self.semiring(r)?);
                Semiring::join(l, r).map_err(|x| semiring_diag(x, e.span))?
            }
            SemiringExprKind::Lex(l, r) => {
                let (l, r) = (self.semiring(l)?, self.semiring(r)?);
                Semiring::lex(l, r).map_err(|x| semiring_diag(x, e.span))?
            }
            SemiringExprKind::Named(n) => self.named_semiring(n, e.span)?,
        };
        Ok(s)
    }

    pub fn hom(&mut self, name: &Symbol, span: Span) -> Result<Homomorphism, Diagnostic> {
        let doc = self.doc;
        let decl = doc
            .homs
            .get(name)
            .ok_or_else(|| diag(DiagnosticKind::UnresolvedName, span, format!("no homomorphism named `{name}`")))?;
        let err = |x| semiring_diag(x, decl.span);
        Ok(match &decl.expr {
            HomExpr::Identity(s) => Homomorphism::identity(self.semiring(s)?),
            HomExpr::EmbedBool(s) => Homomorphism::embed_bool(self.semiring(s)?),
            HomExpr::Inject { side, kind, left, right } => {
                let (l, r) = (self.semiring(left)?, self.semiring(right)?);
                Homomorphism::canonical_injection(*side, l, r, *kind).map_err(err)?
            }
            HomExpr::JoinToProduct(l, r) => {
                let (l, r) = (self.semiring(l)?, self.semiring(r)?);
                Homomorphism::join_to_product(l, r).map_err(err)?
            }
        })
    }

    fn domains_for(
        &self,
        ports: &BTreeSet<Symbol>,
        local: &BTreeMap<Symbol, DomainDecl>,
        span: Span,
    ) -> Result<BTreeMap<Port, Domain>, Diagnostic> {
        let mut out = BTreeMap::new();
        for p in ports {
            let d = local
                .get(p)
                .or_else(|| self.doc.domains.get(p))
                .ok_or_else(|| diag(DiagnosticKind::MissingDomain, span, format!("port `{p}` has no domain")))?;
            if d.values.is_empty() {
                return Err(diag(DiagnosticKind::Invalid, d.span, format!("domain of `{p}` is empty")));
            }
            out.insert(p.clone(), d.values.clone());
        }
        Ok(out)
    }

    /// A declared automaton or composition.
    pub fn automaton(&mut self, name: &Symbol) -> Result<Arc<Automaton>, Diagnostic> {
        self.automaton_at(name, Span::default())
    }

    fn automaton_at(&mut self, name: &Symbol, span: Span) -> Result<Arc<Automaton>, Diagnostic> {
        if let Some(a) = self.automata.get(name) {
            return Ok(a.clone());
        }
        let doc = self.doc;
        let a = if let Some(decl) = doc.automata.get(name) {
            self.leaf(decl)?
        } else if let Some(decl) = doc.compositions.get(name) {
            self.enter(name, decl.span)?;
            let out = self.composition(&decl.expr);
            self.in_progress.remove(name);
            out?
        } else {
            return Err(diag(DiagnosticKind::UnresolvedName, span, format!("no automaton named `{name}`")));
        };
        let a = Arc::new(a);
        self.automata.insert(name.clone(), a.clone());
        Ok(a)
    }

    pub(super) fn leaf(&mut self, decl: &AutomatonDecl) -> Result<Automaton, Diagnostic> {
        let s = self.semiring(&decl.semiring)?;
        let mut seen = HashSet::new();
        for q in &decl.states {
            if !seen.insert(q) {
                return Err(diag(DiagnosticKind::Duplicate, decl.span, format!("state {q} is declared twice")));
            }
        }
        let init = decl
            .init
            .clone()
            .ok_or_else(|| diag(DiagnosticKind::Invalid, decl.span, format!("automaton `{}` has no init", decl.name)))?;
        if !seen.contains(&init) {
            return Err(diag(DiagnosticKind::UnresolvedName, decl.span, format!("initial state {init} is not a state")));
        }
        let mut ports = decl.ports.clone();
        for t in &decl.transitions {
            ports.extend(t.fired.iter().cloned());
        }
        let domains = self.domains_for(&ports, &decl.domains, decl.span)?;
        let mut transitions = Vec::with_capacity(decl.transitions.len());
        for t in &decl.transitions {
            for q in [&t.source, &t.target] {
                if !seen.contains(q) {
                    return Err(diag(DiagnosticKind::UnresolvedName, t.span, format!("unknown state {q}")));
                }
            }
            transitions.push(Transition { source: t.source.clone(), label: self.label(&s, t, &domains)?, target: t.target.clone() });
        }
        Automaton::new(decl.states.clone(), init, ports, s, &domains, transitions).map_err(|e| automaton_diag(e, decl.span))
    }

    fn label(&self, s: &Semiring, t: &TransDecl, domains: &BTreeMap<Port, Domain>) -> Result<Scsp, Diagnostic> {
        if let Some(v) = t.guard.vars().into_iter().find(|v| !t.fired.contains(v)) {
            return Err(diag(DiagnosticKind::UnresolvedName, t.span, format!("guard mentions `{v}`, which the transition does not fire")));
        }
        let pref = resolve_pref(&t.pref, s).map_err(|e| semiring_diag(e, t.span))?;
        Scsp::binary(t.fired.clone(), s.clone(), t.guard.clone(), pref, domains).map_err(|e| scsp_diag(e, t.span))
    }

    fn composition(&mut self, e: &CompExpr) -> Result<Automaton, Diagnostic> {
        match &e.kind {
            CompExprKind::Ref(n) => Ok((*self.automaton_at(n, e.span)?).clone()),
            CompExprKind::Apply(h, arg) => {
                let h = self.hom(h, e.span)?;
                self.composition(arg)?.lift_hom(&h).map_err(|x| automaton_diag(x, e.span))
            }
            CompExprKind::Op(op, args) => {
                let mut acc = self.composition(&args[0])?;
                for arg in &args[1..] {
                    let next = self.composition(arg)?;
                    acc = match op {
                        CompOp::Product => automata::product_with(&acc, &next, self.exec),
                        CompOp::Join => automata::join_compose(&acc, &next),
                        CompOp::Lex => automata::lex_compose(&acc, &next),
                    }
                    .map_err(|x| automaton_diag(x, e.span))?;
                }
                Ok(acc)
            }
        }
    }

    pub fn problem(&mut self, name: &Symbol) -> Result<Scsp, Diagnostic> {
        let doc = self.doc;
        let decl = doc
            .problems
            .get(name)
            .ok_or_else(|| diag(DiagnosticKind::UnresolvedName, Span::default(), format!("no problem named `{name}`")))?;
        let s = self.semiring(&decl.semiring)?;
        let vars: BTreeSet<Symbol> = decl.constraints.iter().flat_map(|c| c.scope.iter().cloned()).collect();
        let domains = self.domains_for(&vars, &decl.domains, decl.span)?;
        let mut constraints = Vec::new();
        for c in &decl.constraints {
            if let Some(v) = c.guard.vars().into_iter().find(|v| !c.scope.contains(v)) {
                return Err(diag(DiagnosticKind::UnresolvedName, c.span, format!("guard mentions `{v}`, which is outside the scope")));
            }
            let pref = resolve_pref(&c.pref, &s).map_err(|e| semiring_diag(e, c.span))?;
            let k = Constraint::binary(c.scope.clone(), s.clone(), c.guard.clone(), pref).map_err(|e| scsp_diag(e, c.span))?;
            constraints.push(Arc::new(k));
        }
        Scsp::new(vars, s, constraints, &domains).map_err(|e| scsp_diag(e, decl.span))
    }
}

/// Composition typing without building products: the semiring and the
/// port domains an expression would have.
pub(super) struct Signature {
    pub semiring: Semiring,
    pub domains: BTreeMap<Port, Domain>,
}

impl Elaborator<'_> {
    pub(super) fn signature(&mut self, e: &CompExpr) -> Result<Signature, Diagnostic> {
        match &e.kind {
            CompExprKind::Ref(n) => {
                let doc = self.doc;
                if let Some(a) = self.automata.get(n) {
                    return Ok(Signature { semiring: a.semiring().clone(), domains: a.domains().clone() });
                }
                if doc.automata.contains_key(n) {
                    let a = self.automaton_at(n, e.span)?;
                    return Ok(Signature { semiring: a.semiring().clone(), domains: a.domains().clone() });
                }
                let decl = doc
                    .compositions
                    .get(n)
                    .ok_or_else(|| diag(DiagnosticKind::UnresolvedName, e.span, format!("no automaton named `{n}`")))?;
                self.enter(n, e.span)?;
                let out = self.signature(&decl.expr);
                self.in_progress.remove(n);
                out
            }
            CompExprKind::Apply(h, arg) => {
                let h = self.hom(h, e.span)?;
                let sig = self.signature(arg)?;
                if h.source() != &sig.semiring {
                    return Err(diag(
                        DiagnosticKind::SemiringMismatch,
                        e.span,
                        format!("homomorphism expects {}, automaton is over {}", h.source(), sig.semiring),
                    ));
                }
                Ok(Signature { semiring: h.target().clone(), domains: sig.domains })
            }
            CompExprKind::Op(op, args) => {
                let mut acc = self.signature(&args[0])?;
                for arg in &args[1..] {
                    let next = self.signature(arg)?;
                    let semiring = match op {
                        CompOp::Product if acc.semiring == next.semiring => Ok(acc.semiring.clone()),
                        CompOp::Product => {
                            return Err(diag(
                                DiagnosticKind::SemiringMismatch,
                                e.span,
                                format!("product of automata over {} and {}", acc.semiring, next.semiring),
                            ))
                        }
                        CompOp::Join => Semiring::join(acc.semiring.clone(), next.semiring.clone()),
                        CompOp::Lex => Semiring::lex(acc.semiring.clone(), next.semiring.clone()),
                    }
                    .map_err(|x| semiring_diag(x, e.span))?;
                    for (p, d) in next.domains {
                        if acc.domains.get(&p).is_some_and(|x| *x != d) {
                            return Err(diag(DiagnosticKind::DomainMismatch, e.span, format!("shared port `{p}` has different domains")));
                        }
                        acc.domains.insert(p, d);
                    }
                    acc.semiring = semiring;
                }
                Ok(acc)
            }
        }
    }
}
