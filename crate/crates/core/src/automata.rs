//! Soft constraint automata and their composition.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::data::{Port, Symbol};
use crate::par::Exec;
use crate::scsp::{Domain, Scsp, ScspError};
use crate::semiring::{CompositeKind, Homomorphism, Semiring, SemiringError, Side};

/// A state name; composite states are flat tuples of names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateId {
    Name(Symbol),
    Tuple(Vec<StateId>),
}

impl StateId {
    pub fn name(s: &str) -> Self {
        StateId::Name(Symbol::new(s))
    }

    /// The components of a flattened tuple; a name is its own single component.
    pub fn components(&self) -> &[StateId] {
        match self {
            StateId::Tuple(items) => items,
            name => std::slice::from_ref(name),
        }
    }

    /// Concatenates the components of `parts`; a single component stays bare.
    pub fn flatten<'a>(parts: impl IntoIterator<Item = &'a StateId>) -> StateId {
        let mut items: Vec<StateId> = parts.into_iter().flat_map(|p| p.components().iter().cloned()).collect();
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            StateId::Tuple(items)
        }
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId::name(s)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Name(n) => write!(f, "{n}"),
            StateId::Tuple(items) => {
                f.write_str("(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for StateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `source --label--> target`. The label's variables are the fired ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub label: Scsp,
    pub target: StateId,
}

impl Transition {
    pub fn fired(&self) -> &BTreeSet<Port> {
        self.label.variables()
    }
}

/// A broken invariant found by [`Automaton::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("initial state {0} is not a state")]
    InitialNotAState(StateId),
    #[error("state {0} is declared twice")]
    DuplicateState(StateId),
    #[error("transition {index}: unknown state {state}")]
    UnknownState { index: usize, state: StateId },
    #[error("transition {index}: port `{port}` is not a port of the automaton")]
    UndeclaredPort { index: usize, port: Port },
    #[error("transition {index}: label is over {found}, expected {expected}")]
    LabelSemiring { index: usize, expected: Semiring, found: Semiring },
    #[error("transition {index}: domain of `{port}` differs from the automaton's")]
    LabelDomain { index: usize, port: Port },
    #[error("port `{0}` has no domain")]
    MissingDomain(Port),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("invalid automaton: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("semiring mismatch: {left} vs {right}")]
    SemiringMismatch { left: Semiring, right: Semiring },
    #[error("shared port `{0}` has different domains")]
    DomainMismatch(Port),
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error(transparent)]
    Scsp(#[from] ScspError),
}

/// A soft constraint automaton `⟨Q, V, E, →, q0⟩`.
///
/// States and transitions keep their construction order; execution policies
/// may use transition order as a tiebreak.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    states: Vec<StateId>,
    initial: StateId,
    ports: BTreeSet<Port>,
    semiring: Semiring,
    domains: BTreeMap<Port, Domain>,
    transitions: Vec<Transition>,
}

impl Automaton {
    /// Assembles an automaton without checking it; see [`validate`](Self::validate).
    pub fn from_parts(
        states: Vec<StateId>,
        initial: StateId,
        ports: BTreeSet<Port>,
        semiring: Semiring,
        domains: BTreeMap<Port, Domain>,
        transitions: Vec<Transition>,
    ) -> Self {
        Automaton { states, initial, ports, semiring, domains, transitions }
    }

    /// Assembles and validates. Domains of non-ports are dropped.
    pub fn new(
        states: Vec<StateId>,
        initial: StateId,
        ports: BTreeSet<Port>,
        semiring: Semiring,
        domains: &BTreeMap<Port, Domain>,
        transitions: Vec<Transition>,
    ) -> Result<Self, AutomatonError> {
        let domains = domains.iter().filter(|(k, _)| ports.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        let a = Automaton::from_parts(states, initial, ports, semiring, domains, transitions);
        let violations = a.validate();
        if violations.is_empty() {
            Ok(a)
        } else {
            Err(AutomatonError::Invalid(violations))
        }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn ports(&self) -> &BTreeSet<Port> {
        &self.ports
    }

    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn domains(&self) -> &BTreeMap<Port, Domain> {
        &self.domains
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Whether this is a plain constraint automaton (boolean semiring).
    pub fn is_constraint_automaton(&self) -> bool {
        self.semiring.is_bool()
    }

    /// Indices of the outgoing transitions of every state, in transition order.
    pub fn outgoing(&self) -> HashMap<&StateId, Vec<usize>> {
        let mut out: HashMap<&StateId, Vec<usize>> = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            out.entry(&t.source).or_default().push(i);
        }
        out
    }

    /// Lists every broken structural invariant.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                out.push(Violation::DuplicateState(s.clone()));
            }
        }
        if !seen.contains(&self.initial) {
            out.push(Violation::InitialNotAState(self.initial.clone()));
        }
        for p in &self.ports {
            if !self.domains.contains_key(p) {
                out.push(Violation::MissingDomain(p.clone()));
            }
        }
        for (index, t) in self.transitions.iter().enumerate() {
            for state in [&t.source, &t.target] {
                if !seen.contains(state) {
                    out.push(Violation::UnknownState { index, state: state.clone() });
                }
            }
            if t.label.semiring() != &self.semiring {
                out.push(Violation::LabelSemiring { index, expected: self.semiring.clone(), found: t.label.semiring().clone() });
            }
            for (port, d) in t.label.domains() {
                if !self.ports.contains(port) {
                    out.push(Violation::UndeclaredPort { index, port: port.clone() });
                } else if self.domains.get(port).is_some_and(|own| own != d) {
                    out.push(Violation::LabelDomain { index, port: port.clone() });
                }
            }
        }
        out
    }

    /// `h(A)`: every label mapped through `h`.
    pub fn lift_hom(&self, h: &Homomorphism) -> Result<Automaton, AutomatonError> {
        if h.source() != &self.semiring {
            return Err(AutomatonError::SemiringMismatch { left: h.source().clone(), right: self.semiring.clone() });
        }
        let transitions = self
            .transitions
            .iter()
            .map(|t| Ok(Transition { source: t.source.clone(), label: t.label.apply_hom(h)?, target: t.target.clone() }))
            .collect::<Result<_, ScspError>>()?;
        Ok(Automaton { semiring: h.target().clone(), transitions, ..self.clone() })
    }
}

/// The product `A1 ⊗ A2`, with the default execution strategy.
pub fn product(a1: &Automaton, a2: &Automaton) -> Result<Automaton, AutomatonError> {
    product_with(a1, a2, Exec::default())
}

/// The product `A1 ⊗ A2`.
///
/// Two transitions synchronize when their fired ports agree on the shared
/// alphabet: `U1 ∩ V2 = U2 ∩ V1`. There is no rule for independent moves; a
/// component without a matching transition blocks its partner.
///
/// Composite states are flattened tuples. The parallel strategy splits the
/// work over the states of `a1`.
pub fn product_with(a1: &Automaton, a2: &Automaton, exec: Exec) -> Result<Automaton, AutomatonError> {
    if a1.semiring != a2.semiring {
        return Err(AutomatonError::SemiringMismatch { left: a1.semiring.clone(), right: a2.semiring.clone() });
    }
    let mut domains = a1.domains.clone();
    for (k, d) in &a2.domains {
        match domains.get(k) {
            Some(existing) if existing != d => return Err(AutomatonError::DomainMismatch(k.clone())),
            Some(_) => {}
            None => {
                domains.insert(k.clone(), d.clone());
            }
        }
    }
    // A single-state operand contributes nothing to the composite name.
    let pair = |q1: &StateId, q2: &StateId| match (a1.states.len() == 1, a2.states.len() == 1) {
        (true, false) => q2.clone(),
        (false, true) | (true, true) => q1.clone(),
        (false, false) => StateId::flatten([q1, q2]),
    };
    let states: Vec<StateId> = a1.states.iter().flat_map(|q1| a2.states.iter().map(move |q2| (q1, q2))).map(|(q1, q2)| pair(q1, q2)).collect();
    let initial = pair(&a1.initial, &a2.initial);

    let out1 = a1.outgoing();
    let out2 = a2.outgoing();
    // Fired ports restricted to the partner's alphabet, per transition.
    let shared1: Vec<BTreeSet<&Port>> = a1.transitions.iter().map(|t| t.fired().intersection(&a2.ports).collect()).collect();
    let shared2: Vec<BTreeSet<&Port>> = a2.transitions.iter().map(|t| t.fired().intersection(&a1.ports).collect()).collect();
    let empty = Vec::new();

    let per_state = exec.map(a1.states.iter().collect(), |q1| {
        let mut out = Vec::new();
        let ts1 = out1.get(q1).unwrap_or(&empty);
        for q2 in &a2.states {
            let ts2 = out2.get(q2).unwrap_or(&empty);
            for &i in ts1 {
                for &j in ts2 {
                    if shared1[i] != shared2[j] {
                        continue;
                    }
                    let (t1, t2) = (&a1.transitions[i], &a2.transitions[j]);
                    out.push(Transition {
                        source: pair(&t1.source, &t2.source),
                        label: t1.label.compose(&t2.label)?,
                        target: pair(&t1.target, &t2.target),
                    });
                }
            }
        }
        Ok::<_, ScspError>(out)
    });
    let mut transitions = Vec::new();
    for ts in per_state {
        transitions.extend(ts?);
    }
    let ports = a1.ports.union(&a2.ports).cloned().collect();
    Ok(Automaton { states, initial, ports, semiring: a1.semiring.clone(), domains, transitions })
}

fn composite(a1: &Automaton, a2: &Automaton, kind: CompositeKind) -> Result<Automaton, AutomatonError> {
    let (l, r) = (a1.semiring.clone(), a2.semiring.clone());
    let hl = Homomorphism::canonical_injection(Side::Left, l.clone(), r.clone(), kind)?;
    let hr = Homomorphism::canonical_injection(Side::Right, l, r, kind)?;
    product(&a1.lift_hom(&hl)?, &a2.lift_hom(&hr)?)
}

/// The join composition `A1 ⊙ A2 = h_L(A1) ⊗ h_R(A2)`.
pub fn join_compose(a1: &Automaton, a2: &Automaton) -> Result<Automaton, AutomatonError> {
    composite(a1, a2, CompositeKind::Join)
}

/// The lexicographic composition `A1 ▷ A2 = h_L(A1) ⊗ h_R(A2)`.
pub fn lex_compose(a1: &Automaton, a2: &Automaton) -> Result<Automaton, AutomatonError> {
    composite(a1, a2, CompositeKind::Lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ports;
    use crate::expr::Expr;
    use crate::semiring::Pref;

    fn label(s: &Semiring, fired: &[&str], pred: Expr, value: Pref, doms: &BTreeMap<Port, Domain>) -> Scsp {
        Scsp::binary(ports(fired.iter().copied()), s.clone(), pred, value, doms).unwrap()
    }

    fn doms(names: &[&str]) -> BTreeMap<Port, Domain> {
        names.iter().map(|n| (Port::new(n), Domain::range(0, 2))).collect()
    }

    /// Two states, toggling on `a`, idling on `∅`.
    fn toggle(s: &Semiring, port: &str, value: Pref) -> Automaton {
        let d = doms(&[port]);
        let t = |from: &str, to: &str, fired: &[&str], v: Pref| Transition {
            source: from.into(),
            label: label(s, fired, Expr::True, v, &d),
            target: to.into(),
        };
        let one = s.one();
        Automaton::new(
            vec!["u".into(), "v".into()],
            "u".into(),
            ports([port]),
            s.clone(),
            &d,
            vec![t("u", "v", &[port], value.clone()), t("v", "u", &[port], value), t("u", "u", &[], one.clone()), t("v", "v", &[], one)],
        )
        .unwrap()
    }

    #[test]
    fn validate_reports_violations() {
        let w = Semiring::weighted();
        let d = doms(&["a"]);
        let bad = Automaton::from_parts(
            vec!["u".into()],
            "z".into(),
            ports(["a"]),
            w.clone(),
            d.clone(),
            vec![Transition { source: "u".into(), label: label(&w, &["b"], Expr::True, w.one(), &doms(&["b"])), target: "u".into() }],
        );
        let v = bad.validate();
        assert!(v.contains(&Violation::InitialNotAState("z".into())));
        assert!(v.contains(&Violation::UndeclaredPort { index: 0, port: Port::new("b") }));
        assert!(toggle(&w, "a", Pref::weight(1)).validate().is_empty());
    }

    #[test]
    fn product_shape() {
        let w = Semiring::weighted();
        let a = toggle(&w, "a", Pref::weight(1));
        let b = toggle(&w, "b", Pref::weight(2));
        let p = product(&a, &b).unwrap();
        assert_eq!(p.states().len(), 4);
        assert_eq!(p.initial(), &StateId::Tuple(vec!["u".into(), "u".into()]));
        // Per composite state: a, b, ab, ∅.
        assert_eq!(p.transitions().len(), 16);
        assert_eq!(product_with(&a, &b, Exec::Sequential).unwrap(), p);
        // Shared port: the two sides must move together or idle together.
        let a2 = toggle(&w, "a", Pref::weight(3));
        assert_eq!(product(&a, &a2).unwrap().transitions().len(), 8);
    }

    #[test]
    fn single_state_operand_keeps_partner_names() {
        let w = Semiring::weighted();
        let a = toggle(&w, "a", Pref::weight(1));
        let unit = Automaton::new(
            vec!["e".into()],
            "e".into(),
            BTreeSet::new(),
            w.clone(),
            &BTreeMap::new(),
            vec![Transition { source: "e".into(), label: Scsp::empty(w.clone()), target: "e".into() }],
        )
        .unwrap();
        let p = product(&a, &unit).unwrap();
        assert_eq!(p.states(), a.states());
        assert_eq!(p.transitions().len(), a.transitions().len());
    }

    #[test]
    fn lift_and_composites() {
        let w = Semiring::weighted();
        let a = toggle(&w, "a", Pref::weight(1));
        assert_eq!(a.lift_hom(&Homomorphism::identity(w.clone())).unwrap(), a);
        let b = toggle(&Semiring::boolean(), "b", Pref::Bool(true));
        assert!(b.is_constraint_automaton());
        let lifted = b.lift_hom(&Homomorphism::embed_bool(w.clone())).unwrap();
        assert!(!lifted.is_constraint_automaton());
        let j = join_compose(&a, &lifted).unwrap();
        assert_eq!(j.semiring(), &Semiring::join(w.clone(), w.clone()).unwrap());
        let l = lex_compose(&a, &lifted).unwrap();
        assert_eq!(l.transitions().len(), 16);
        let set = toggle(&Semiring::set(["x", "y"]).unwrap(), "c", Pref::set(["x"]));
        assert!(matches!(join_compose(&set, &a), Err(AutomatonError::Semiring(SemiringError::NotCancellative { .. }))));
        assert!(matches!(product(&a, &b), Err(AutomatonError::SemiringMismatch { .. })));
    }
}
