use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use super::ast::*;
use super::{Diagnostic, DiagnosticKind, Span};
use crate::automata::{Automaton, StateId};
use crate::data::{rational_to_string, DataValue, Symbol};
use crate::expr::{write_ident, write_value, Expr};
use crate::scsp::Domain;
use crate::semiring::{CompositeKind, Pref, Semiring, SemiringKind, Side, Weight};

struct Ident<'a>(&'a str);

impl fmt::Display for Ident<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ident(f, self.0)
    }
}

struct Value<'a>(&'a DataValue);

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_value(f, self.0)
    }
}

struct State<'a>(&'a StateId);

impl fmt::Display for State<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            StateId::Name(n) => write_ident(f, n),
            StateId::Tuple(items) => {
                f.write_char('(')?;
                for (i, q) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", State(q))?;
                }
                f.write_char(')')
            }
        }
    }
}

fn names(set: &BTreeSet<Symbol>) -> String {
    let items: Vec<String> = set.iter().map(|s| Ident(s).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn domain(d: &Domain) -> String {
    match d.as_int_range() {
        Some((lo, hi)) => format!("{{{lo}..{hi}}}"),
        None => {
            let items: Vec<String> = d.values().iter().map(|v| Value(v).to_string()).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

fn semiring(e: &SemiringExpr) -> String {
    match &e.kind {
        SemiringExprKind::Bool => "bool".into(),
        SemiringExprKind::Weighted => "weighted".into(),
        SemiringExprKind::Prob => "prob".into(),
        SemiringExprKind::Set(atoms) => format!("set {}", names(atoms)),
        SemiringExprKind::Prod(l, r) => format!("prod({}, {})", semiring(l), semiring(r)),
        SemiringExprKind::Join(l, r) => format!("join({}, {})", semiring(l), semiring(r)),
        SemiringExprKind::Lex(l, r) => format!("lex({}, {})", semiring(l), semiring(r)),
        SemiringExprKind::Named(n) => Ident(n).to_string(),
    }
}

fn pref(p: &PrefLit) -> String {
    match p {
        PrefLit::Num(n) => rational_to_string(n),
        PrefLit::Inf => "inf".into(),
        PrefLit::Top => "top".into(),
        PrefLit::Bot => "bot".into(),
        PrefLit::Zero => "zero".into(),
        PrefLit::One => "one".into(),
        PrefLit::Set(s) => names(s),
        PrefLit::Pair(l, r) => format!("<{}, {}>", pref(l), pref(r)),
    }
}

fn guarded(out: &mut String, ports: &BTreeSet<Symbol>, guard: &Expr, p: &PrefLit) {
    write!(out, "on {}", names(ports)).unwrap();
    if *guard != Expr::True {
        write!(out, " where {guard}").unwrap();
    }
    if *p != PrefLit::One {
        write!(out, " pref {}", pref(p)).unwrap();
    }
    out.push_str(";\n");
}

fn over(out: &mut String, e: &SemiringExpr) {
    if e.kind != SemiringExprKind::Bool {
        write!(out, " over {}", semiring(e)).unwrap();
    }
}

fn comp(e: &CompExpr) -> String {
    match &e.kind {
        CompExprKind::Ref(n) => Ident(n).to_string(),
        CompExprKind::Op(op, args) => {
            let args: Vec<String> = args.iter().map(comp).collect();
            format!("{}({})", op.keyword(), args.join(", "))
        }
        CompExprKind::Apply(h, arg) => format!("apply({}, {})", Ident(h), comp(arg)),
    }
}

fn hom(h: &HomExpr) -> String {
    match h {
        HomExpr::Identity(s) => format!("identity({})", semiring(s)),
        HomExpr::EmbedBool(s) => format!("embed_bool({})", semiring(s)),
        HomExpr::Inject { side, kind, left, right } => {
            let side = if *side == Side::Left { "inject_left" } else { "inject_right" };
            let kind = if *kind == CompositeKind::Join { "join" } else { "lex" };
            format!("{side}({kind}, {}, {})", semiring(left), semiring(right))
        }
        HomExpr::JoinToProduct(l, r) => format!("join_to_product({}, {})", semiring(l), semiring(r)),
    }
}

fn automaton(out: &mut String, a: &AutomatonDecl) {
    write!(out, "automaton {}", Ident(&a.name)).unwrap();
    over(out, &a.semiring);
    out.push_str(" {\n");
    if !a.states.is_empty() {
        let states: Vec<String> = a.states.iter().map(|q| State(q).to_string()).collect();
        writeln!(out, "    states {};", states.join(", ")).unwrap();
    }
    if let Some(q) = &a.init {
        writeln!(out, "    init {};", State(q)).unwrap();
    }
    if !a.ports.is_empty() {
        writeln!(out, "    ports {};", names(&a.ports)).unwrap();
    }
    for d in a.domains.values() {
        writeln!(out, "    domain {} = {};", Ident(&d.port), domain(&d.values)).unwrap();
    }
    for t in &a.transitions {
        write!(out, "    trans {} -> {} ", State(&t.source), State(&t.target)).unwrap();
        guarded(out, &t.fired, &t.guard, &t.pref);
    }
    out.push_str("}\n");
}

fn problem(out: &mut String, p: &ProblemDecl) {
    write!(out, "problem {}", Ident(&p.name)).unwrap();
    over(out, &p.semiring);
    out.push_str(" {\n");
    for d in p.domains.values() {
        writeln!(out, "    domain {} = {};", Ident(&d.port), domain(&d.values)).unwrap();
    }
    for c in &p.constraints {
        out.push_str("    ");
        guarded(out, &c.scope, &c.guard, &c.pref);
    }
    out.push_str("}\n");
}

/// Renders a document in canonical form: sections in a fixed order,
/// declarations sorted by name. Parsing the output gives back an equal document.
pub fn serialize(doc: &Document) -> String {
    let mut sections: Vec<String> = Vec::new();
    let mut block = String::new();
    for d in doc.semirings.values() {
        writeln!(block, "semiring {} = {};", Ident(&d.name), semiring(&d.expr)).unwrap();
    }
    sections.push(std::mem::take(&mut block));
    for d in doc.domains.values() {
        writeln!(block, "domain {} = {};", Ident(&d.port), domain(&d.values)).unwrap();
    }
    sections.push(std::mem::take(&mut block));
    for d in doc.homs.values() {
        writeln!(block, "hom {} = {};", Ident(&d.name), hom(&d.expr)).unwrap();
    }
    sections.push(std::mem::take(&mut block));
    for a in doc.automata.values() {
        let mut s = String::new();
        automaton(&mut s, a);
        sections.push(s);
    }
    for c in doc.compositions.values() {
        writeln!(block, "compose {} = {};", Ident(&c.name), comp(&c.expr)).unwrap();
    }
    sections.push(std::mem::take(&mut block));
    for p in doc.problems.values() {
        let mut s = String::new();
        problem(&mut s, p);
        sections.push(s);
    }
    sections.retain(|s| !s.is_empty());
    sections.join("\n")
}

/// The expression denoting semiring `s`.
pub fn semiring_expr(s: &Semiring) -> SemiringExpr {
    let pair = |l: &Semiring, r: &Semiring| (Box::new(semiring_expr(l)), Box::new(semiring_expr(r)));
    SemiringExpr::new(match s.kind() {
        SemiringKind::Bool => SemiringExprKind::Bool,
        SemiringKind::Weighted => SemiringExprKind::Weighted,
        SemiringKind::Prob => SemiringExprKind::Prob,
        SemiringKind::Set(a) => SemiringExprKind::Set(a.clone()),
        SemiringKind::Product(l, r) => {
            let (l, r) = pair(l, r);
            SemiringExprKind::Prod(l, r)
        }
        SemiringKind::Join(l, r) => {
            let (l, r) = pair(l, r);
            SemiringExprKind::Join(l, r)
        }
        SemiringKind::Lex(l, r) => {
            let (l, r) = pair(l, r);
            SemiringExprKind::Lex(l, r)
        }
    })
}

/// The literal denoting carrier element `p`.
pub fn pref_lit(p: &Pref) -> PrefLit {
    match p {
        Pref::Bool(true) => PrefLit::Top,
        Pref::Bool(false) => PrefLit::Bot,
        Pref::Weight(Weight::Infinite) => PrefLit::Inf,
        Pref::Weight(Weight::Finite(n)) | Pref::Prob(n) => PrefLit::Num(n.clone()),
        Pref::Set(s) => PrefLit::Set(s.clone()),
        Pref::Pair(l, r) => PrefLit::Pair(Box::new(pref_lit(l)), Box::new(pref_lit(r))),
    }
}

/// Describes a built automaton as a declaration, for writing compositions
/// back out. Labels are merged into a single guarded constraint each; only
/// table-valued labels cannot be expressed.
pub fn automaton_decl(name: &str, a: &Automaton) -> Result<AutomatonDecl, Diagnostic> {
    let mut fired_any = BTreeSet::new();
    let mut transitions = Vec::with_capacity(a.transitions().len());
    for (i, t) in a.transitions().iter().enumerate() {
        let (guard, value) = t.label.as_single_binary().ok_or_else(|| {
            Diagnostic::new(DiagnosticKind::Invalid, Span::default(), format!("transition {i} has a table-valued label"))
        })?;
        fired_any.extend(t.fired().iter().cloned());
        transitions.push(TransDecl {
            source: t.source.clone(),
            target: t.target.clone(),
            fired: t.fired().clone(),
            guard,
            pref: pref_lit(&value),
            span: Span::default(),
        });
    }
    let domains: BTreeMap<Symbol, DomainDecl> = a
        .domains()
        .iter()
        .map(|(p, d)| (p.clone(), DomainDecl { port: p.clone(), values: d.clone(), span: Span::default() }))
        .collect();
    Ok(AutomatonDecl {
        name: Symbol::new(name),
        semiring: semiring_expr(a.semiring()),
        states: a.states().to_vec(),
        init: Some(a.initial().clone()),
        ports: a.ports().difference(&fired_any).cloned().collect(),
        domains,
        transitions,
        span: Span::default(),
    })
}
