//! Oracles and property checks shared by the integration suites and the
//! acceptance harness. Every check returns `Err` with a readable reason
//! instead of panicking, so the harness can report and carry on.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sca_core::automata::{self, Automaton, StateId};
use sca_core::execution::{self, Explorer};
use sca_core::expr::{ArithOp, CmpOp, Expr};
use sca_core::random::{self, AutomatonShape};
use sca_core::semiring::{CompositeKind, Side};
use sca_core::{
    solve, solve_bruteforce, Assignment, Constraint, DataValue, Domain, Homomorphism, OrderResult, Port, Pref, Scsp,
    Semiring,
};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn op<T>(r: Result<T, impl std::fmt::Display>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- semirings

/// The c-semiring laws on three sampled elements.
pub fn semiring_law_case<R: Rng>(s: &Semiring, rng: &mut R) -> Check {
    let (a, b, c) = (random::value(rng, s), random::value(rng, s), random::value(rng, s));
    let plus = |x: &Pref, y: &Pref| op(s.plus(x, y));
    let times = |x: &Pref, y: &Pref| op(s.times(x, y));
    let (zero, one) = (s.zero(), s.one());
    let ctx = format!("{s} at a={a}, b={b}, c={c}");

    ensure!(plus(&a, &b)? == plus(&b, &a)?, "+ not commutative: {ctx}");
    ensure!(plus(&plus(&a, &b)?, &c)? == plus(&a, &plus(&b, &c)?)?, "+ not associative: {ctx}");
    ensure!(plus(&a, &zero)? == a, "0 not a unit of +: {ctx}");
    ensure!(plus(&a, &one)? == one, "1 not absorbing for +: {ctx}");
    ensure!(plus(&a, &a)? == a, "+ not idempotent: {ctx}");
    ensure!(times(&a, &b)? == times(&b, &a)?, "x not commutative: {ctx}");
    ensure!(times(&times(&a, &b)?, &c)? == times(&a, &times(&b, &c)?)?, "x not associative: {ctx}");
    ensure!(times(&a, &one)? == a, "1 not a unit of x: {ctx}");
    ensure!(times(&a, &zero)? == zero, "0 not absorbing for x: {ctx}");
    ensure!(
        times(&a, &plus(&b, &c)?)? == plus(&times(&a, &b)?, &times(&a, &c)?)?,
        "x does not distribute over +: {ctx}"
    );
    ensure!(plus(&a, &times(&a, &b)?)? == a, "absorption a + a x b = a fails: {ctx}");

    // Flattening: the sum of a union is the sum of the partial sums.
    let all = [a.clone(), b.clone(), c.clone()];
    ensure!(op(s.big_plus(&[]))? == zero, "empty sum is not 0: {s}");
    ensure!(op(s.big_plus(std::slice::from_ref(&a)))? == a, "singleton sum: {ctx}");
    let flat = op(s.big_plus(&all))?;
    ensure!(flat == plus(&plus(&a, &b)?, &c)?, "sum of {{a,b,c}} differs from (a+b)+c: {ctx}");
    ensure!(flat == plus(&op(s.big_plus(&all[..2]))?, &op(s.big_plus(&all[1..]))?)?, "flattening fails: {ctx}");

    // The induced order: a <= b iff a + b = b.
    let ab = plus(&a, &b)?;
    let want = match (a == b, ab == b, ab == a) {
        (true, _, _) => OrderResult::Equal,
        (false, true, _) => OrderResult::Less,
        (false, false, true) => OrderResult::Greater,
        _ => OrderResult::Incomparable,
    };
    ensure!(op(s.compare(&a, &b))? == want, "compare disagrees with a + b: {ctx}");
    Ok(())
}

pub fn semiring_laws(s: &Semiring, cases: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    (0..cases).try_for_each(|_| semiring_law_case(s, &mut r))
}

// ------------------------------------------------------------------ solving

fn grid(p: &Scsp) -> Vec<Assignment> {
    let vars: Vec<&Port> = p.variables().iter().collect();
    if vars.is_empty() {
        return vec![Assignment::new()];
    }
    vars.iter()
        .map(|v| p.domains()[*v].values().iter().cloned())
        .multi_cartesian_product()
        .map(|vals| vars.iter().map(|v| (*v).clone()).zip(vals).collect())
        .collect()
}

/// Preference of `a` as the product of every constraint on its projection.
fn oracle_value(p: &Scsp, a: &Assignment) -> Result<Pref, String> {
    let s = p.semiring();
    let mut acc = s.one();
    for c in p.constraints() {
        let v = op(c.evaluate(&op(a.restrict(c.scope()))?))?;
        acc = op(s.times(&acc, &v))?;
    }
    Ok(acc)
}

/// Nonzero grid points no other grid point strictly beats.
pub fn oracle_solutions(p: &Scsp) -> Result<BTreeSet<(Assignment, Pref)>, String> {
    let s = p.semiring();
    let scored: Vec<(Assignment, Pref)> =
        grid(p).into_iter().map(|a| oracle_value(p, &a).map(|v| (a, v))).collect::<Result<_, _>>()?;
    let mut out = BTreeSet::new();
    for (a, v) in &scored {
        if s.is_zero(v) {
            continue;
        }
        let mut beaten = false;
        for (_, w) in &scored {
            if op(s.compare(v, w))? == OrderResult::Less {
                beaten = true;
                break;
            }
        }
        if !beaten {
            out.insert((a.clone(), v.clone()));
        }
    }
    Ok(out)
}

fn pairs(sols: BTreeSet<sca_core::Solution>) -> BTreeSet<(Assignment, Pref)> {
    sols.into_iter().map(|s| (s.assignment, s.preference)).collect()
}

/// `K` on the grid `{0, 0.5, 1, 1.5, 2}²`: `x < 1` with 0.9 and `x + y = 2`
/// with 0.4.
pub fn problem_k() -> Scsp {
    let p = Semiring::prob();
    let grid = Domain::new(["0", "0.5", "1", "1.5", "2"].map(|t| DataValue::parse_number(t).unwrap()));
    let doms: BTreeMap<Port, Domain> = [("x", grid.clone()), ("y", grid)].into_iter().map(|(k, d)| (Port::new(k), d)).collect();
    let c1 = Constraint::binary(sca_core::data::ports(["x"]), p.clone(), Expr::cmp(CmpOp::Lt, Expr::var("x"), Expr::int(1)), Pref::prob(9, 10));
    let c2 = Constraint::binary(
        sca_core::data::ports(["x", "y"]),
        p.clone(),
        Expr::eq(Expr::arith(ArithOp::Add, Expr::var("x"), Expr::var("y")), Expr::int(2)),
        Pref::prob(2, 5),
    );
    Scsp::new(sca_core::data::ports(["x", "y"]), p, [Arc::new(c1.unwrap()), Arc::new(c2.unwrap())], &doms).unwrap()
}

pub fn worked_problem_k() -> Check {
    let k = problem_k();
    let sols = op(solve(&k))?;
    let best = Pref::prob(36, 100);
    let target = Assignment::from_pairs([
        ("x", DataValue::parse_number("0.5").unwrap()),
        ("y", DataValue::parse_number("1.5").unwrap()),
    ]);
    ensure!(!sols.is_empty(), "K has no solutions");
    ensure!(sols.iter().all(|s| s.preference == best), "K solutions are not all exactly 0.36: {sols:?}");
    ensure!(sols.iter().any(|s| s.assignment == target), "{{x=0.5, y=1.5}} is not a solution of K");
    ensure!(pairs(sols) == oracle_solutions(&k)?, "K differs from the grid scan");
    Ok(())
}

/// The five semirings the solver is checked against.
pub fn solver_semirings() -> Vec<Semiring> {
    let w = Semiring::weighted();
    vec![
        Semiring::boolean(),
        w.clone(),
        Semiring::prob(),
        Semiring::join(w.clone(), w.clone()).unwrap(),
        Semiring::lex(w.clone(), w).unwrap(),
    ]
}

/// `solve`, the library brute force and the grid-scan oracle agree on
/// `per_semiring` random problems for each of the five semirings.
pub fn solver_matches_oracle(per_semiring: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for s in solver_semirings() {
        for i in 0..per_semiring {
            let p = random::scsp(&mut r, &s, 4, 5, 4);
            let fast = pairs(op(solve(&p))?);
            let brute = pairs(op(solve_bruteforce(&p))?);
            let oracle = oracle_solutions(&p)?;
            ensure!(fast == oracle, "solve differs from the oracle on {s} problem #{i}: {fast:?} vs {oracle:?}");
            ensure!(brute == oracle, "solve_bruteforce differs from the oracle on {s} problem #{i}");
        }
    }
    Ok(())
}

/// Over the boolean semiring, every solution of `P1 ⊗ P2` restricts to
/// solutions of both parts.
pub fn boolean_separation(pairs_n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let universe: Vec<Port> = (0..4).map(|i| Port::from(format!("v{i}"))).collect();
    for i in 0..pairs_n {
        let doms: BTreeMap<Port, Domain> = universe.iter().map(|p| (p.clone(), Domain::range(0, r.random_range(1..=3) - 1))).collect();
        let pick = |r: &mut ChaCha8Rng| -> Vec<Port> {
            let k = r.random_range(1..=3);
            rand::seq::IndexedRandom::choose_multiple(universe.as_slice(), r, k).cloned().collect()
        };
        let (v1, v2) = (pick(&mut r), pick(&mut r));
        let p1 = random::csp(&mut r, &v1, &doms, 3);
        let p2 = random::csp(&mut r, &v2, &doms, 3);
        let both = op(p1.compose(&p2))?;
        let s1: BTreeSet<Assignment> = oracle_solutions(&p1)?.into_iter().map(|(a, _)| a).collect();
        let s2: BTreeSet<Assignment> = oracle_solutions(&p2)?.into_iter().map(|(a, _)| a).collect();
        for sol in op(solve(&both))? {
            ensure!(s1.contains(&op(sol.assignment.restrict(p1.variables()))?), "pair #{i}: {} does not restrict into Sol(P1)", sol.assignment);
            ensure!(s2.contains(&op(sol.assignment.restrict(p2.variables()))?), "pair #{i}: {} does not restrict into Sol(P2)", sol.assignment);
        }
    }
    Ok(())
}

/// Two weighted problems over `x ∈ {0, 1}` whose composition picks `x = 1`
/// while the first part alone picks `x = 0`. Returns whether restriction
/// fails, which it should.
pub fn weighted_separation_fails() -> Result<bool, String> {
    let w = Semiring::weighted();
    let doms: BTreeMap<Port, Domain> = [(Port::new("x"), Domain::range(0, 1))].into();
    let table = |c0: i64, c1: i64| {
        let entries = [(0, c0), (1, c1)].map(|(x, c)| (Assignment::from_pairs([("x", x)]), Pref::weight(c)));
        Scsp::new(sca_core::data::ports(["x"]), w.clone(), [Arc::new(Constraint::table(sca_core::data::ports(["x"]), w.clone(), entries.into()).unwrap())], &doms)
            .unwrap()
    };
    let (p1, p2) = (table(0, 1), table(5, 0));
    let s1: BTreeSet<Assignment> = op(solve(&p1))?.into_iter().map(|s| s.assignment).collect();
    let both = op(solve(&op(p1.compose(&p2))?))?;
    ensure!(!both.is_empty(), "the composed problem has no solution");
    Ok(both.iter().any(|s| !s1.contains(&s.assignment)))
}

pub fn separation(pairs_n: usize, seed: u64) -> Check {
    boolean_separation(pairs_n, seed)?;
    ensure!(weighted_separation_fails()?, "the weighted counterexample unexpectedly satisfies separation");
    Ok(())
}

/// Left injections of W into Lex(W,W) and Join(W,W) keep the solutions and
/// map their preferences.
pub fn hom_preserves_solutions(n: usize, seed: u64) -> Check {
    let w = Semiring::weighted();
    let homs = [CompositeKind::Lex, CompositeKind::Join]
        .map(|k| Homomorphism::canonical_injection(Side::Left, w.clone(), w.clone(), k).unwrap());
    let mut r = rng(seed);
    for i in 0..n {
        let p = random::scsp(&mut r, &w, 4, 4, 4);
        let sol = op(solve(&p))?;
        for h in &homs {
            ensure!(h.is_order_reflecting(), "{:?} is not order reflecting", h.kind());
            let hp = op(p.apply_hom(h))?;
            let mapped: BTreeSet<(Assignment, Pref)> =
                sol.iter().map(|s| op(h.apply(&s.preference)).map(|v| (s.assignment.clone(), v))).collect::<Result<_, _>>()?;
            let got = pairs(op(solve(&hp))?);
            ensure!(got == mapped, "problem #{i} into {}: {got:?} vs {mapped:?}", h.target());
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- automata

type Frontier = BTreeSet<StateId>;

/// Letters enabled from a set of states, with the successor set per letter.
fn step(ex: &Explorer<'_>, from: &Frontier) -> Result<BTreeMap<Assignment, Frontier>, String> {
    let a = ex.automaton();
    let mut out: BTreeMap<Assignment, Frontier> = BTreeMap::new();
    for q in from {
        for e in op(ex.enabled(q))? {
            out.entry(e.solution.assignment).or_default().insert(a.transitions()[e.transition].target.clone());
        }
    }
    Ok(out)
}

/// Whether the two automata accept the same words of length at most `depth`,
/// explored on the subset construction of both at once.
pub fn same_prefix_language(a: &Automaton, b: &Automaton, depth: usize) -> Result<bool, String> {
    let (xa, xb) = (Explorer::new(a), Explorer::new(b));
    let start: (Frontier, Frontier) = ([a.initial().clone()].into(), [b.initial().clone()].into());
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some(((fa, fb), d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        let (na, nb) = (step(&xa, &fa)?, step(&xb, &fb)?);
        if !na.keys().eq(nb.keys()) {
            return Ok(false);
        }
        for (letter, ta) in na {
            let next = (ta, nb[&letter].clone());
            if seen.insert(next.clone()) {
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(true)
}

fn small_automaton<R: Rng>(rng: &mut R, s: &Semiring) -> Automaton {
    let names = ["a", "b", "c"];
    let ports: Vec<&str> = rand::seq::IndexedRandom::choose_multiple(names.as_slice(), rng, 2).copied().collect();
    let idle_loops = rng.random_bool(0.5);
    random::automaton(rng, s, &ports, AutomatonShape { max_states: 3, max_transitions: 5, domain: 3, idle_loops })
}

/// Product and join commute, and product, join and lexicographic composition
/// associate, as bounded-prefix languages.
pub fn composition_algebra(triples: usize, depth: usize, seed: u64) -> Check {
    let w = Semiring::weighted();
    let mut r = rng(seed);
    type Op = fn(&Automaton, &Automaton) -> Result<Automaton, automata::AutomatonError>;
    let ops: [(&str, Op); 3] = [("product", automata::product), ("join", automata::join_compose), ("lex", automata::lex_compose)];
    for i in 0..triples {
        let (a1, a2, a3) = (small_automaton(&mut r, &w), small_automaton(&mut r, &w), small_automaton(&mut r, &w));
        for (name, f) in ops {
            if name != "lex" {
                let (l, rr) = (op(f(&a1, &a2))?, op(f(&a2, &a1))?);
                ensure!(same_prefix_language(&l, &rr, depth)?, "{name} is not commutative on triple #{i}");
            }
            let left = op(f(&op(f(&a1, &a2))?, &a3))?;
            let right = op(f(&a1, &op(f(&a2, &a3))?))?;
            ensure!(same_prefix_language(&left, &right, depth)?, "{name} is not associative on triple #{i}");
        }
    }
    Ok(())
}

/// A constraint automaton in the classic style: transitions carry a port
/// set and a data guard.
struct Classic {
    states: Vec<StateId>,
    ports: BTreeSet<Port>,
    domains: BTreeMap<Port, Domain>,
    transitions: Vec<(StateId, BTreeSet<Port>, Vec<Expr>, StateId)>,
}

impl Classic {
    fn from_sca(a: &Automaton) -> Result<Classic, String> {
        let mut transitions = Vec::new();
        for t in a.transitions() {
            let (guard, value) = t.label.as_single_binary().ok_or("label is not a single guarded constraint")?;
            ensure!(value == Pref::Bool(true), "label value is not top");
            transitions.push((t.source.clone(), t.fired().clone(), vec![guard], t.target.clone()));
        }
        Ok(Classic { states: a.states().to_vec(), ports: a.ports().clone(), domains: a.domains().clone(), transitions })
    }

    /// Synchronized moves plus the independent moves of either side.
    fn product(&self, other: &Classic) -> Classic {
        let name = |q1: &StateId, q2: &StateId| match (self.states.len(), other.states.len()) {
            (1, _) if other.states.len() > 1 => q2.clone(),
            (_, 1) => q1.clone(),
            _ => StateId::Tuple(vec![q1.clone(), q2.clone()]),
        };
        let mut transitions = Vec::new();
        for (p1, n1, g1, t1) in &self.transitions {
            for (p2, n2, g2, t2) in &other.transitions {
                let shared1: BTreeSet<_> = n1.intersection(&other.ports).collect();
                let shared2: BTreeSet<_> = n2.intersection(&self.ports).collect();
                if shared1 == shared2 {
                    let guards = g1.iter().chain(g2).cloned().collect();
                    transitions.push((name(p1, p2), n1.union(n2).cloned().collect(), guards, name(t1, t2)));
                }
            }
        }
        for (p1, n1, g1, t1) in &self.transitions {
            if n1.is_disjoint(&other.ports) {
                for q2 in &other.states {
                    transitions.push((name(p1, q2), n1.clone(), g1.clone(), name(t1, q2)));
                }
            }
        }
        for (p2, n2, g2, t2) in &other.transitions {
            if n2.is_disjoint(&self.ports) {
                for q1 in &self.states {
                    transitions.push((name(q1, p2), n2.clone(), g2.clone(), name(q1, t2)));
                }
            }
        }
        let mut domains = self.domains.clone();
        domains.extend(other.domains.clone());
        Classic {
            states: self.states.iter().flat_map(|a| other.states.iter().map(move |b| name(a, b))).collect(),
            ports: self.ports.union(&other.ports).cloned().collect(),
            domains,
            transitions,
        }
    }

    /// Each transition as its source, ports, satisfying data and target.
    fn semantics(&self) -> Result<BTreeSet<(StateId, BTreeSet<Port>, BTreeSet<Assignment>, StateId)>, String> {
        let mut out = BTreeSet::new();
        for (p, n, guards, t) in &self.transitions {
            let vars: Vec<&Port> = n.iter().collect();
            let data: Vec<Assignment> = if vars.is_empty() {
                vec![Assignment::new()]
            } else {
                vars.iter()
                    .map(|v| self.domains[*v].values().iter().cloned())
                    .multi_cartesian_product()
                    .map(|vals| vars.iter().map(|v| (*v).clone()).zip(vals).collect())
                    .collect()
            };
            let mut sat = BTreeSet::new();
            for d in data {
                let mut ok = true;
                for g in guards {
                    ok &= op(g.holds(&d))?;
                }
                if ok {
                    sat.insert(d);
                }
            }
            out.insert((p.clone(), n.clone(), sat, t.clone()));
        }
        Ok(out)
    }
}

fn sca_semantics(a: &Automaton) -> Result<BTreeSet<(StateId, BTreeSet<Port>, BTreeSet<Assignment>, StateId)>, String> {
    let ex = Explorer::new(a);
    let mut out = BTreeSet::new();
    for (i, t) in a.transitions().iter().enumerate() {
        let sat = op(ex.solutions(i))?.iter().map(|s| s.assignment.clone()).collect();
        out.insert((t.source.clone(), t.fired().clone(), sat, t.target.clone()));
    }
    Ok(out)
}

/// With idle loops everywhere, the product matches the classic constraint
/// automaton product transition for transition.
pub fn classic_product_coincides(pairs_n: usize, seed: u64) -> Check {
    let b = Semiring::boolean();
    let mut r = rng(seed);
    let shape = AutomatonShape { max_states: 3, max_transitions: 4, domain: 3, idle_loops: true };
    let names = ["a", "b", "c"];
    for i in 0..pairs_n {
        let p1: Vec<&str> = rand::seq::IndexedRandom::choose_multiple(names.as_slice(), &mut r, 2).copied().collect();
        let p2: Vec<&str> = rand::seq::IndexedRandom::choose_multiple(names.as_slice(), &mut r, 2).copied().collect();
        let (a1, a2) = (random::automaton(&mut r, &b, &p1, shape), random::automaton(&mut r, &b, &p2, shape));
        let ours = sca_semantics(&op(automata::product(&a1, &a2))?)?;
        let classic = Classic::from_sca(&a1)?.product(&Classic::from_sca(&a2)?).semantics()?;
        ensure!(ours == classic, "pair #{i}: product differs from the classic product");
    }
    Ok(())
}

/// Runs of random automata only take steps their labels allow, and the
/// policies refine one another at every visited state.
pub fn policies_refine_and_are_sound(n: usize, seed: u64) -> Check {
    use execution::{candidates, Policy, Tiebreak};
    let w = Semiring::weighted();
    let mut r = rng(seed);
    for i in 0..n {
        let a = random::automaton(&mut r, &w, &["a", "b"], AutomatonShape { max_states: 3, max_transitions: 8, domain: 3, idle_loops: false });
        let ex = Explorer::new(&a);
        for q in a.states() {
            let en = op(ex.enabled(q))?;
            let all: BTreeSet<usize> = candidates(&w, Policy::Nondet { seed: 0 }, &en).into_iter().collect();
            let pareto: BTreeSet<usize> = candidates(&w, Policy::Pareto { seed: 0 }, &en).into_iter().collect();
            ensure!(all.len() == en.len(), "automaton #{i}: nondet does not allow every step");
            ensure!(pareto.is_subset(&all), "automaton #{i}: pareto is not within nondet");
            for tb in [Tiebreak::TransitionOrder, Tiebreak::AssignmentLex, Tiebreak::SeededRandom] {
                let greedy: BTreeSet<usize> = candidates(&w, Policy::GreedyGlobal { tiebreak: tb, seed: 0 }, &en).into_iter().collect();
                ensure!(greedy.is_subset(&pareto), "automaton #{i}: greedy {tb:?} is not within pareto");
                ensure!(en.is_empty() || !greedy.is_empty(), "automaton #{i}: greedy {tb:?} chose nothing");
            }
        }
        for policy in [Policy::Nondet { seed: i as u64 }, Policy::Pareto { seed: i as u64 }, Policy::default()] {
            let trace = op(execution::run(&a, policy, 12))?;
            for s in &trace.steps {
                let t = &a.transitions()[s.transition];
                ensure!(t.source == s.state && t.target == s.next, "automaton #{i}: step does not follow its transition");
                let sol = sca_core::Solution { assignment: s.fired.clone(), preference: s.preference.clone() };
                ensure!(op(solve(&t.label))?.contains(&sol), "automaton #{i}: step {} is not a solution of its label", s.fired);
            }
        }
    }
    Ok(())
}
