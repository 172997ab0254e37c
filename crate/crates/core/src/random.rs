//! Random semiring values, problems and automata for property tests and
//! benchmarks. All generators are driven by a caller-supplied RNG.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::automata::{Automaton, StateId, Transition};
use crate::data::{Assignment, DataValue, Port, Symbol};
use crate::expr::{ArithOp, CmpOp, Expr};
use crate::scsp::{Constraint, Domain, Scsp};
use crate::semiring::{Pref, Semiring, SemiringKind, Weight};

/// The semirings the property suites range over.
pub fn standard_semirings() -> Vec<Semiring> {
    let w = Semiring::weighted();
    vec![
        Semiring::boolean(),
        w.clone(),
        Semiring::prob(),
        Semiring::set(["a", "b", "c"]).expect("nonempty"),
        Semiring::product(w.clone(), Semiring::prob()),
        Semiring::join(w.clone(), w.clone()).expect("cancellative"),
        Semiring::lex(w.clone(), w).expect("cancellative"),
    ]
}

/// A carrier element of `s`. Small values repeat often, so ties and equal
/// components show up.
pub fn value<R: Rng + ?Sized>(rng: &mut R, s: &Semiring) -> Pref {
    match s.kind() {
        SemiringKind::Bool => Pref::Bool(rng.random_bool(0.5)),
        SemiringKind::Weighted => {
            if rng.random_bool(0.1) {
                Pref::infinity()
            } else if rng.random_bool(0.2) {
                Pref::Weight(Weight::Finite(BigRational::new(BigInt::from(rng.random_range(0..12)), BigInt::from(2))))
            } else {
                Pref::weight(rng.random_range(0..6))
            }
        }
        SemiringKind::Prob => {
            let den = *[1i64, 2, 4, 5, 10].choose(rng).expect("nonempty");
            Pref::prob(rng.random_range(0..=den), den)
        }
        SemiringKind::Set(alphabet) => Pref::Set(alphabet.iter().filter(|_| rng.random_bool(0.5)).cloned().collect()),
        SemiringKind::Product(l, r) => Pref::pair(value(rng, l), value(rng, r)),
        SemiringKind::Join(l, r) | SemiringKind::Lex(l, r) => {
            if rng.random_bool(0.1) {
                return s.zero();
            }
            for _ in 0..16 {
                let v = Pref::pair(value(rng, l), value(rng, r));
                if s.contains(&v) {
                    return v;
                }
            }
            s.one()
        }
    }
}

/// A carrier element other than zero.
pub fn nonzero_value<R: Rng + ?Sized>(rng: &mut R, s: &Semiring) -> Pref {
    for _ in 0..32 {
        let v = value(rng, s);
        if !s.is_zero(&v) {
            return v;
        }
    }
    s.one()
}

fn port_names(n: usize) -> Vec<Port> {
    (0..n).map(|i| Port::from(format!("v{i}"))).collect()
}

/// A predicate over `scope`, mixing comparisons against constants and
/// between variables.
pub fn predicate<R: Rng + ?Sized>(rng: &mut R, scope: &[Port], max_value: i64) -> Expr {
    if scope.is_empty() {
        return if rng.random_bool(0.8) { Expr::True } else { Expr::False };
    }
    let atom = |rng: &mut R| {
        let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).expect("nonempty");
        let x = Expr::Var(scope.choose(rng).expect("nonempty").clone());
        let rhs = if scope.len() > 1 && rng.random_bool(0.4) {
            let y = Expr::Var(scope.choose(rng).expect("nonempty").clone());
            if rng.random_bool(0.3) {
                Expr::arith(ArithOp::Add, y, Expr::int(rng.random_range(-1..=1)))
            } else {
                y
            }
        } else {
            Expr::int(rng.random_range(0..=max_value))
        };
        Expr::cmp(op, x, rhs)
    };
    let mut e = atom(rng);
    for _ in 0..rng.random_range(0..3) {
        let next = atom(rng);
        e = match rng.random_range(0..3) {
            0 => Expr::and(e, next),
            1 => Expr::or(e, next),
            _ => Expr::and(e, Expr::not(next)),
        };
    }
    e
}

/// Integer domains `0..size` for every port.
pub fn domains(ports: &[Port], size: i64) -> BTreeMap<Port, Domain> {
    ports.iter().map(|p| (p.clone(), Domain::range(0, size - 1))).collect()
}

/// A constraint over `scope`: a guarded constant or a full table.
pub fn constraint<R: Rng + ?Sized>(
    rng: &mut R,
    s: &Semiring,
    scope: &[Port],
    domains: &BTreeMap<Port, Domain>,
) -> Constraint {
    let set: BTreeSet<Port> = scope.iter().cloned().collect();
    let size = scope.iter().map(|p| domains[p].len()).product::<usize>();
    if rng.random_bool(0.6) || size > 64 {
        let max = scope.iter().map(|p| domains[p].len() as i64 - 1).max().unwrap_or(0);
        let v = nonzero_value(rng, s);
        return Constraint::binary(set, s.clone(), predicate(rng, scope, max), v).expect("predicate within scope");
    }
    let vars: Vec<&Port> = set.iter().collect();
    let entries: BTreeMap<Assignment, Pref> = if vars.is_empty() {
        [(Assignment::new(), value(rng, s))].into_iter().collect()
    } else {
        use itertools::Itertools;
        vars.iter()
            .map(|v| domains[*v].values().iter())
            .multi_cartesian_product()
            .map(|vals| {
                let a: Assignment = vars.iter().map(|v| (*v).clone()).zip(vals.into_iter().cloned()).collect();
                (a, value(rng, s))
            })
            .collect()
    };
    Constraint::table(set, s.clone(), entries).expect("keys match the scope")
}

/// A problem with up to `max_vars` variables, domains of up to `max_domain`
/// values and up to `max_constraints` constraints of arity at most two.
pub fn scsp<R: Rng + ?Sized>(rng: &mut R, s: &Semiring, max_vars: usize, max_domain: i64, max_constraints: usize) -> Scsp {
    let n = rng.random_range(1..=max_vars);
    let vars = port_names(n);
    let doms: BTreeMap<Port, Domain> =
        vars.iter().map(|p| (p.clone(), Domain::range(0, rng.random_range(1..=max_domain) - 1))).collect();
    let count = rng.random_range(0..=max_constraints);
    let constraints: Vec<Arc<Constraint>> = (0..count)
        .map(|_| {
            let arity = rng.random_range(1..=n.min(2));
            let scope: Vec<Port> = vars.choose_multiple(rng, arity).cloned().collect();
            Arc::new(constraint(rng, s, &scope, &doms))
        })
        .collect();
    Scsp::new(vars.iter().cloned().collect(), s.clone(), constraints, &doms).expect("well-formed by construction")
}

/// A crisp problem: every constraint maps to true or false.
pub fn csp<R: Rng + ?Sized>(rng: &mut R, vars: &[Port], doms: &BTreeMap<Port, Domain>, max_constraints: usize) -> Scsp {
    let b = Semiring::boolean();
    let constraints: Vec<Arc<Constraint>> = (0..rng.random_range(0..=max_constraints))
        .map(|_| {
            let arity = rng.random_range(1..=vars.len().min(2));
            let scope: Vec<Port> = vars.choose_multiple(rng, arity).cloned().collect();
            let max = scope.iter().map(|p| doms[p].len() as i64 - 1).max().unwrap_or(0);
            let c = Constraint::binary(scope.iter().cloned().collect(), b.clone(), predicate(rng, &scope, max), Pref::Bool(true));
            Arc::new(c.expect("predicate within scope"))
        })
        .collect();
    Scsp::new(vars.iter().cloned().collect(), b, constraints, doms).expect("well-formed by construction")
}

/// Shape bounds for [`automaton`].
#[derive(Debug, Clone, Copy)]
pub struct AutomatonShape {
    pub max_states: usize,
    pub max_transitions: usize,
    pub domain: i64,
    /// Give every state an `(∅, ⊤, 1)` self-loop.
    pub idle_loops: bool,
}

impl Default for AutomatonShape {
    fn default() -> Self {
        AutomatonShape { max_states: 3, max_transitions: 6, domain: 3, idle_loops: false }
    }
}

/// A random automaton over `s` with alphabet `ports`.
pub fn automaton<R: Rng + ?Sized>(rng: &mut R, s: &Semiring, ports: &[&str], shape: AutomatonShape) -> Automaton {
    let ports: Vec<Port> = ports.iter().map(|p| Symbol::new(p)).collect();
    let doms = domains(&ports, shape.domain);
    let n = rng.random_range(1..=shape.max_states);
    let states: Vec<StateId> = (0..n).map(|i| StateId::name(&format!("s{i}"))).collect();
    let mut transitions = Vec::new();
    for _ in 0..rng.random_range(1..=shape.max_transitions) {
        let fired: Vec<Port> = ports.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        let guard = if fired.is_empty() || rng.random_bool(0.3) { Expr::True } else { predicate(rng, &fired, shape.domain - 1) };
        let label = Scsp::binary(fired.iter().cloned().collect(), s.clone(), guard, nonzero_value(rng, s), &doms)
            .expect("well-formed by construction");
        transitions.push(Transition {
            source: states.choose(rng).expect("nonempty").clone(),
            label,
            target: states.choose(rng).expect("nonempty").clone(),
        });
    }
    if shape.idle_loops {
        for q in &states {
            let label = Scsp::binary(BTreeSet::new(), s.clone(), Expr::True, s.one(), &doms).expect("empty scope");
            transitions.push(Transition { source: q.clone(), label, target: q.clone() });
        }
    }
    let initial = states[0].clone();
    Automaton::new(states, initial, ports.into_iter().collect(), s.clone(), &doms, transitions).expect("valid by construction")
}

/// A random word of assignments over subsets of `ports`.
pub fn word<R: Rng + ?Sized>(rng: &mut R, ports: &[&str], domain: i64, len: usize) -> Vec<Assignment> {
    (0..len)
        .map(|_| {
            let mut a = Vec::new();
            for p in ports {
                if rng.random_bool(0.5) {
                    a.push((Port::new(p), DataValue::Int(rng.random_range(0..domain))));
                }
            }
            a.into_iter().collect()
        })
        .collect()
}
