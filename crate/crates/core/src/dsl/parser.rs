use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{check, Diagnostic, DiagnosticKind, Span};
use crate::automata::StateId;
use crate::data::{parse_rational, DataValue, Symbol};
use crate::expr::{ArithOp, CmpOp, Expr};
use crate::scsp::Domain;
use crate::semiring::{CompositeKind, Side};

type PResult<T> = Result<T, Diagnostic>;

/// Parses and checks a document. On failure every diagnostic found is
/// returned, in source order.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, pos: 0 };
    let mut doc = Document::default();
    let mut diags = Vec::new();
    while !p.at_eof() {
        let start = p.pos;
        if let Err(d) = p.declaration(&mut doc) {
            diags.push(d);
            p.recover(start);
        }
    }
    if diags.is_empty() {
        diags = check::check(&doc);
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort_by_key(|d| d.span.start.offset);
        Err(diags)
    }
}

fn syntax(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::SyntaxError, span, msg)
}

const DECL_KEYWORDS: &[&str] = &["semiring", "domain", "hom", "automaton", "compose", "problem"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(syntax(self.span(), format!("expected {wanted}, found {}", self.peek().describe())))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.eat_punct(p) {
            Ok(self.prev_span())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Span> {
        if self.eat_kw(k) {
            Ok(self.prev_span())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    /// A non-keyword identifier, plain or backticked.
    fn ident(&mut self) -> PResult<Symbol> {
        match self.peek().clone() {
            Tok::Ident(s) if !super::is_keyword(&s) => {
                self.pos += 1;
                Ok(Symbol::from(s))
            }
            Tok::Quoted(s) => {
                self.pos += 1;
                Ok(Symbol::from(s))
            }
            _ => self.unexpected("a name"),
        }
    }

    /// Skips to the next top-level declaration keyword, always making progress.
    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.advance();
        }
        let mut depth = 0i32;
        while !self.at_eof() {
            match self.peek() {
                Tok::Punct("{") => depth += 1,
                Tok::Punct("}") => depth -= 1,
                Tok::Ident(k) if depth <= 0 && DECL_KEYWORDS.contains(&k.as_str()) => return,
                _ => {}
            }
            self.advance();
        }
    }

    fn declaration(&mut self, doc: &mut Document) -> PResult<()> {
        let start = self.span();
        let dup = |span: Span, what: &str, name: &Symbol| {
            Diagnostic::new(DiagnosticKind::Duplicate, span, format!("{what} `{name}` is declared twice"))
        };
        if self.eat_kw("semiring") {
            let name = self.ident()?;
            self.expect_punct("=")?;
            let expr = self.semiring_expr()?;
            let span = start.to(self.expect_punct(";")?);
            if doc.semirings.contains_key(&name) {
                return Err(dup(span, "semiring", &name));
            }
            doc.semirings.insert(name.clone(), SemiringDecl { name, expr, span });
        } else if self.is_kw("domain") {
            let d = self.domain_decl()?;
            if doc.domains.contains_key(&d.port) {
                return Err(dup(d.span, "domain", &d.port));
            }
            doc.domains.insert(d.port.clone(), d);
        } else if self.eat_kw("hom") {
            let name = self.ident()?;
            self.expect_punct("=")?;
            let expr = self.hom_expr()?;
            let span = start.to(self.expect_punct(";")?);
            if doc.homs.contains_key(&name) {
                return Err(dup(span, "homomorphism", &name));
            }
            doc.homs.insert(name.clone(), HomDecl { name, expr, span });
        } else if self.eat_kw("automaton") {
            let a = self.automaton(start)?;
            if doc.automata.contains_key(&a.name) || doc.compositions.contains_key(&a.name) {
                return Err(dup(a.span, "automaton", &a.name));
            }
            doc.automata.insert(a.name.clone(), a);
        } else if self.eat_kw("compose") {
            let name = self.ident()?;
            self.expect_punct("=")?;
            let expr = self.comp_expr()?;
            let span = start.to(self.expect_punct(";")?);
            if doc.automata.contains_key(&name) || doc.compositions.contains_key(&name) {
                return Err(dup(span, "automaton", &name));
            }
            doc.compositions.insert(name.clone(), ComposeDecl { name, expr, span });
        } else if self.eat_kw("problem") {
            let p = self.problem(start)?;
            if doc.problems.contains_key(&p.name) {
                return Err(dup(p.span, "problem", &p.name));
            }
            doc.problems.insert(p.name.clone(), p);
        } else {
            return self.unexpected("a declaration");
        }
        Ok(())
    }

    fn semiring_expr(&mut self) -> PResult<SemiringExpr> {
        let start = self.span();
        let kind = if self.eat_kw("bool") {
            SemiringExprKind::Bool
        } else if self.eat_kw("weighted") {
            SemiringExprKind::Weighted
        } else if self.eat_kw("prob") {
            SemiringExprKind::Prob
        } else if self.eat_kw("set") {
            SemiringExprKind::Set(self.name_set()?)
        } else if let Some(k) = ["prod", "join", "lex"].into_iter().find(|k| self.is_kw(k)) {
            self.pos += 1;
            self.expect_punct("(")?;
            let l = Box::new(self.semiring_expr()?);
            self.expect_punct(",")?;
            let r = Box::new(self.semiring_expr()?);
            self.expect_punct(")")?;
            match k {
                "prod" => SemiringExprKind::Prod(l, r),
                "join" => SemiringExprKind::Join(l, r),
                _ => SemiringExprKind::Lex(l, r),
            }
        } else {
            SemiringExprKind::Named(self.ident().or_else(|_| self.unexpected("a semiring"))?)
        };
        Ok(SemiringExpr { kind, span: start.to(self.prev_span()) })
    }

    /// `{a, b, …}` of names.
    fn name_set(&mut self) -> PResult<BTreeSet<Symbol>> {
        self.expect_punct("{")?;
        let mut out = BTreeSet::new();
        if !self.eat_punct("}") {
            loop {
                out.insert(self.ident()?);
                if self.eat_punct("}") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(out)
    }

    fn domain_decl(&mut self) -> PResult<DomainDecl> {
        let start = self.expect_kw("domain")?;
        let port = self.ident()?;
        self.expect_punct("=")?;
        let values = self.domain_values()?;
        let span = start.to(self.expect_punct(";")?);
        Ok(DomainDecl { port, values, span })
    }

    fn domain_values(&mut self) -> PResult<Domain> {
        self.expect_punct("{")?;
        if self.eat_punct("}") {
            return Ok(Domain::new([]));
        }
        let first_span = self.span();
        let first = self.value()?;
        if self.eat_punct("..") {
            let last = self.value()?;
            self.expect_punct("}")?;
            return match (first, last) {
                (DataValue::Int(lo), DataValue::Int(hi)) => Ok(Domain::range(lo, hi)),
                _ => Err(syntax(first_span.to(self.prev_span()), "range bounds must be integers")),
            };
        }
        let mut values = vec![first];
        while self.eat_punct(",") {
            values.push(self.value()?);
        }
        self.expect_punct("}")?;
        Ok(Domain::new(values))
    }

    /// A data literal: `-`? number, or a quoted atom.
    fn value(&mut self) -> PResult<DataValue> {
        let neg = self.eat_punct("-");
        match self.peek().clone() {
            Tok::Number(n) => {
                let span = self.span();
                self.pos += 1;
                let r = parse_rational(&n).ok_or_else(|| syntax(span, format!("bad number {n}")))?;
                Ok(DataValue::rational(if neg { -r } else { r }))
            }
            Tok::Str(s) if !neg => {
                self.pos += 1;
                Ok(DataValue::atom(&s))
            }
            _ => self.unexpected("a value"),
        }
    }

    fn hom_expr(&mut self) -> PResult<HomExpr> {
        let kw = match self.peek() {
            Tok::Ident(k) => k.clone(),
            _ => return self.unexpected("a homomorphism"),
        };
        self.pos += 1;
        self.expect_punct("(")?;
        let out = match kw.as_str() {
            "identity" => HomExpr::Identity(self.semiring_expr()?),
            "embed_bool" => HomExpr::EmbedBool(self.semiring_expr()?),
            "inject_left" | "inject_right" => {
                let kind = if self.eat_kw("join") {
                    CompositeKind::Join
                } else if self.eat_kw("lex") {
                    CompositeKind::Lex
                } else {
                    return self.unexpected("`join` or `lex`");
                };
                self.expect_punct(",")?;
                let left = self.semiring_expr()?;
                self.expect_punct(",")?;
                let right = self.semiring_expr()?;
                let side = if kw == "inject_left" { Side::Left } else { Side::Right };
                HomExpr::Inject { side, kind, left, right }
            }
            "join_to_product" => {
                let l = self.semiring_expr()?;
                self.expect_punct(",")?;
                HomExpr::JoinToProduct(l, self.semiring_expr()?)
            }
            _ => {
                self.pos -= 2;
                return self.unexpected("a homomorphism");
            }
        };
        self.expect_punct(")")?;
        Ok(out)
    }

    fn state(&mut self) -> PResult<StateId> {
        if self.eat_punct("(") {
            let mut items = vec![self.state()?];
            while self.eat_punct(",") {
                items.push(self.state()?);
            }
            self.expect_punct(")")?;
            Ok(StateId::flatten(&items))
        } else {
            Ok(StateId::Name(self.ident()?))
        }
    }

    /// `p1..p5` expands to `p1, p2, …, p5`.
    fn state_items(&mut self, out: &mut Vec<StateId>) -> PResult<()> {
        let start = self.span();
        let first = self.state()?;
        if !self.eat_punct("..") {
            out.push(first);
            return Ok(());
        }
        let last = self.ident()?;
        let split = |s: &str| {
            let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
            (s[..cut].to_string(), s[cut..].parse::<u64>().ok())
        };
        let bad = || syntax(start.to(self.prev_span()), "a state range needs names like p1..p5");
        let StateId::Name(first) = first else { return Err(bad()) };
        let ((p1, Some(lo)), (p2, Some(hi))) = (split(&first), split(&last)) else { return Err(bad()) };
        if p1 != p2 || lo > hi {
            return Err(bad());
        }
        out.extend((lo..=hi).map(|i| StateId::Name(Symbol::from(format!("{p1}{i}")))));
        Ok(())
    }

    fn pref_lit(&mut self) -> PResult<PrefLit> {
        for (k, lit) in [("inf", PrefLit::Inf), ("top", PrefLit::Top), ("bot", PrefLit::Bot), ("zero", PrefLit::Zero), ("one", PrefLit::One)] {
            if self.eat_kw(k) {
                return Ok(lit);
            }
        }
        match self.peek().clone() {
            Tok::Number(n) => {
                let span = self.span();
                self.pos += 1;
                Ok(PrefLit::Num(parse_rational(&n).ok_or_else(|| syntax(span, format!("bad number {n}")))?))
            }
            Tok::Punct("{") => Ok(PrefLit::Set(self.name_set()?)),
            Tok::Punct("<") => {
                self.pos += 1;
                let l = self.pref_lit()?;
                self.expect_punct(",")?;
                let r = self.pref_lit()?;
                self.expect_punct(">")?;
                Ok(PrefLit::Pair(Box::new(l), Box::new(r)))
            }
            _ => self.unexpected("a preference"),
        }
    }

    /// `on {ports} [where φ] [pref e] ;` after the caller consumed any prefix.
    fn guarded(&mut self) -> PResult<(BTreeSet<Symbol>, Expr, PrefLit)> {
        self.expect_kw("on")?;
        let ports = self.name_set()?;
        let guard = if self.eat_kw("where") { self.expr()? } else { Expr::True };
        let pref = if self.eat_kw("pref") { self.pref_lit()? } else { PrefLit::One };
        Ok((ports, guard, pref))
    }

    fn local_domain(&mut self, domains: &mut BTreeMap<Symbol, DomainDecl>) -> PResult<()> {
        let d = self.domain_decl()?;
        if domains.contains_key(&d.port) {
            return Err(Diagnostic::new(DiagnosticKind::Duplicate, d.span, format!("domain `{}` is declared twice", d.port)));
        }
        domains.insert(d.port.clone(), d);
        Ok(())
    }

    fn automaton(&mut self, start: Span) -> PResult<AutomatonDecl> {
        let name = self.ident()?;
        let semiring = if self.eat_kw("over") { self.semiring_expr()? } else { SemiringExpr::new(SemiringExprKind::Bool) };
        self.expect_punct("{")?;
        let mut a = AutomatonDecl {
            name,
            semiring,
            states: Vec::new(),
            init: None,
            ports: BTreeSet::new(),
            domains: BTreeMap::new(),
            transitions: Vec::new(),
            span: start,
        };
        while !self.eat_punct("}") {
            let item = self.span();
            if self.eat_kw("states") {
                self.state_items(&mut a.states)?;
                while self.eat_punct(",") {
                    self.state_items(&mut a.states)?;
                }
                self.expect_punct(";")?;
            } else if self.eat_kw("init") {
                if a.init.is_some() {
                    return Err(Diagnostic::new(DiagnosticKind::Duplicate, item, "initial state is declared twice"));
                }
                a.init = Some(self.state()?);
                self.expect_punct(";")?;
            } else if self.eat_kw("ports") {
                a.ports.extend(self.name_set()?);
                self.expect_punct(";")?;
            } else if self.is_kw("domain") {
                self.local_domain(&mut a.domains)?;
            } else if self.eat_kw("trans") {
                let source = self.state()?;
                self.expect_punct("->")?;
                let target = self.state()?;
                let (fired, guard, pref) = self.guarded()?;
                let span = item.to(self.expect_punct(";")?);
                a.transitions.push(TransDecl { source, target, fired, guard, pref, span });
            } else {
                return self.unexpected("`states`, `init`, `ports`, `domain`, `trans` or `}`");
            }
        }
        a.span = start.to(self.prev_span());
        Ok(a)
    }

    fn problem(&mut self, start: Span) -> PResult<ProblemDecl> {
        let name = self.ident()?;
        let semiring = if self.eat_kw("over") { self.semiring_expr()? } else { SemiringExpr::new(SemiringExprKind::Bool) };
        self.expect_punct("{")?;
        let mut p = ProblemDecl { name, semiring, domains: BTreeMap::new(), constraints: Vec::new(), span: start };
        while !self.eat_punct("}") {
            let item = self.span();
            if self.is_kw("domain") {
                self.local_domain(&mut p.domains)?;
            } else if self.is_kw("on") {
                let (scope, guard, pref) = self.guarded()?;
                let span = item.to(self.expect_punct(";")?);
                p.constraints.push(ConstraintDecl { scope, guard, pref, span });
            } else {
                return self.unexpected("`domain`, `on` or `}`");
            }
        }
        p.span = start.to(self.prev_span());
        Ok(p)
    }

    fn comp_expr(&mut self) -> PResult<CompExpr> {
        let start = self.span();
        let op = [("product", CompOp::Product), ("join", CompOp::Join), ("lex", CompOp::Lex)]
            .into_iter()
            .find(|(k, _)| self.is_kw(k))
            .map(|(_, op)| op);
        let kind = if let Some(op) = op {
            self.pos += 1;
            self.expect_punct("(")?;
            let mut args = vec![self.comp_expr()?];
            while self.eat_punct(",") {
                args.push(self.comp_expr()?);
            }
            self.expect_punct(")")?;
            if args.len() < 2 {
                return Err(syntax(start.to(self.prev_span()), format!("`{}` needs at least two operands", op.keyword())));
            }
            CompExprKind::Op(op, args)
        } else if self.eat_kw("apply") {
            self.expect_punct("(")?;
            let h = self.ident()?;
            self.expect_punct(",")?;
            let arg = self.comp_expr()?;
            self.expect_punct(")")?;
            CompExprKind::Apply(h, Box::new(arg))
        } else {
            CompExprKind::Ref(self.ident().or_else(|_| self.unexpected("an automaton expression"))?)
        };
        Ok(CompExpr { kind, span: start.to(self.prev_span()) })
    }

    // Predicates: || < && < ! < comparisons < + - < * < unary minus.

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.and_expr()?;
        while self.eat_punct("||") {
            e = Expr::or(e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut e = self.not_expr()?;
        while self.eat_punct("&&") {
            e = Expr::and(e, self.not_expr()?);
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_punct("!") {
            Ok(Expr::not(self.not_expr()?))
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Punct("=") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Ident(k) if k == "in" => {
                self.pos += 1;
                self.expect_punct("{")?;
                let mut values = Vec::new();
                if !self.eat_punct("}") {
                    loop {
                        values.push(self.value()?);
                        if self.eat_punct("}") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                return self.non_assoc(Expr::member(lhs, values));
            }
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.add_expr()?;
        self.non_assoc(Expr::cmp(op, lhs, rhs))
    }

    fn non_assoc(&self, e: Expr) -> PResult<Expr> {
        match self.peek() {
            Tok::Punct("=" | "!=" | "<" | "<=" | ">=" | ">") => Err(syntax(self.span(), "comparisons do not chain; add parentheses")),
            Tok::Ident(k) if k == "in" => Err(syntax(self.span(), "comparisons do not chain; add parentheses")),
            _ => Ok(e),
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut e = self.mul_expr()?;
        loop {
            let op = if self.eat_punct("+") {
                ArithOp::Add
            } else if self.eat_punct("-") {
                ArithOp::Sub
            } else {
                return Ok(e);
            };
            e = Expr::arith(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        while self.eat_punct("*") {
            e = Expr::arith(ArithOp::Mul, e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_punct("-") {
            if matches!(self.peek_at(1), Tok::Number(_)) {
                return Ok(Expr::Const(self.value()?));
            }
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Number(_) | Tok::Str(_) => Ok(Expr::Const(self.value()?)),
            Tok::Ident(k) if k == "true" => {
                self.pos += 1;
                Ok(Expr::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.pos += 1;
                Ok(Expr::False)
            }
            Tok::Punct("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Ok(Expr::Var(self.ident().or_else(|_| self.unexpected("an expression"))?)),
        }
    }
}
