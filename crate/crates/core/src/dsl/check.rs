//! Semantic checks run after parsing. Leaf automata and problems are built
//! outright; compositions are only typed, so checking stays cheap even when
//! the composed automaton would be large.

use super::ast::Document;
use super::elaborate::Elaborator;
use super::Diagnostic;

pub(super) fn check(doc: &Document) -> Vec<Diagnostic> {
    let mut el = Elaborator::new(doc);
    let mut diags = Vec::new();
    for (name, decl) in &doc.semirings {
        diags.extend(el.named_semiring(name, decl.span).err());
    }
    for (name, decl) in &doc.homs {
        diags.extend(el.hom(name, decl.span).err());
    }
    for name in doc.automata.keys() {
        diags.extend(el.automaton(name).err());
    }
    for decl in doc.compositions.values() {
        diags.extend(el.signature(&decl.expr).err());
    }
    for name in doc.problems.keys() {
        diags.extend(el.problem(name).err());
    }
    // A broken named semiring is reported once, where it is declared.
    diags.sort_by_key(|d| (d.span.start.offset, d.message.clone()));
    diags.dedup_by(|a, b| a.message == b.message && a.span.start.offset == b.span.start.offset);
    diags
}
