//! Running automata: enabled steps, scheduling policies, traces, bounded
//! language membership and reachability.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::automata::{Automaton, AutomatonError, StateId, Transition};
use crate::data::{Assignment, Port};
use crate::par::Exec;
use crate::scsp::{Constraint, Scsp, ScspError, Solution};
use crate::semiring::{OrderResult, Pref, Semiring};
use crate::solve::solve;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("{0} is not a state of the automaton")]
    UnknownState(StateId),
    #[error(transparent)]
    Scsp(#[from] ScspError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// How [`Policy::GreedyGlobal`] picks among equally preferred steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tiebreak {
    /// Earliest transition, then smallest assignment.
    TransitionOrder,
    /// Smallest assignment, then earliest transition.
    AssignmentLex,
    /// Uniformly among the maximal steps.
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Any enabled step.
    Nondet { seed: u64 },
    /// Any step whose preference is maximal among the enabled ones.
    Pareto { seed: u64 },
    /// A maximal step chosen by `tiebreak`.
    GreedyGlobal { tiebreak: Tiebreak, seed: u64 },
}

impl Default for Policy {
    fn default() -> Self {
        Policy::GreedyGlobal { tiebreak: Tiebreak::TransitionOrder, seed: 0 }
    }
}

impl Policy {
    fn seed(self) -> u64 {
        match self {
            Policy::Nondet { seed } | Policy::Pareto { seed } | Policy::GreedyGlobal { seed, .. } => seed,
        }
    }
}

/// An outgoing transition together with one solution of its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Enabled {
    pub transition: usize,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Step {
    pub state: StateId,
    pub transition: usize,
    pub fired: Assignment,
    pub preference: Pref,
    pub next: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Trace {
    pub origin: StateId,
    pub steps: Vec<Step>,
    /// The run stopped because no step was enabled.
    pub deadlocked: bool,
}

impl Trace {
    /// One `step#, state, {port=value,...}, preference` line per step.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "{i}, {}, {}, {}", s.state, s.fired, s.preference);
        }
        if self.deadlocked {
            let _ = writeln!(out, "# deadlock");
        }
        out
    }

    /// The final state.
    pub fn last_state(&self) -> &StateId {
        self.steps.last().map_or(&self.origin, |s| &s.next)
    }
}

/// Solves transition labels on demand and remembers the results.
pub struct Explorer<'a> {
    automaton: &'a Automaton,
    outgoing: HashMap<&'a StateId, Vec<usize>>,
    solutions: Vec<OnceLock<Result<Arc<[Solution]>, ScspError>>>,
    exec: Exec,
}

impl<'a> Explorer<'a> {
    pub fn new(automaton: &'a Automaton) -> Self {
        Self::with_exec(automaton, Exec::default())
    }

    /// The parallel strategy solves the labels of a state's outgoing
    /// transitions concurrently.
    pub fn with_exec(automaton: &'a Automaton, exec: Exec) -> Self {
        Explorer {
            automaton,
            outgoing: automaton.outgoing(),
            solutions: automaton.transitions().iter().map(|_| OnceLock::new()).collect(),
            exec,
        }
    }

    pub fn automaton(&self) -> &'a Automaton {
        self.automaton
    }

    /// The solutions of transition `i`'s label.
    pub fn solutions(&self, i: usize) -> Result<Arc<[Solution]>, ExecError> {
        let cell = self.solutions[i].get_or_init(|| {
            solve(&self.automaton.transitions()[i].label).map(|s| s.into_iter().collect::<Vec<_>>().into())
        });
        cell.clone().map_err(ExecError::from)
    }

    fn outgoing(&self, q: &StateId) -> Result<&[usize], ExecError> {
        match self.outgoing.get(q) {
            Some(v) => Ok(v),
            None if self.automaton.states().contains(q) => Ok(&[]),
            None => Err(ExecError::UnknownState(q.clone())),
        }
    }

    /// All (transition, solution) pairs enabled at `q`, ordered by transition
    /// index and then assignment.
    pub fn enabled(&self, q: &StateId) -> Result<Vec<Enabled>, ExecError> {
        let idx = self.outgoing(q)?;
        let pending: Vec<usize> = idx.iter().copied().filter(|&i| self.solutions[i].get().is_none()).collect();
        if pending.len() > 1 && self.exec.is_parallel() {
            self.exec.map(pending, |i| self.solutions(i).map(|_| ())).into_iter().collect::<Result<(), _>>()?;
        }
        let mut out = Vec::new();
        for &i in idx {
            for sol in self.solutions(i)?.iter() {
                out.push(Enabled { transition: i, solution: sol.clone() });
            }
        }
        Ok(out)
    }
}

/// All (transition, solution) pairs enabled at `q`.
pub fn enabled(a: &Automaton, q: &StateId) -> Result<Vec<Enabled>, ExecError> {
    Explorer::new(a).enabled(q)
}

/// The indices into `enabled` a policy may choose. Deterministic tiebreaks
/// yield a single index.
pub fn candidates(semiring: &Semiring, policy: Policy, enabled: &[Enabled]) -> Vec<usize> {
    match policy {
        Policy::Nondet { .. } => (0..enabled.len()).collect(),
        Policy::Pareto { .. } => maximal(semiring, enabled),
        Policy::GreedyGlobal { tiebreak, .. } => {
            let front = maximal(semiring, enabled);
            let key = |&i: &usize| (enabled[i].transition, &enabled[i].solution.assignment);
            match tiebreak {
                Tiebreak::TransitionOrder => front.into_iter().min_by(|a, b| key(a).cmp(&key(b))).into_iter().collect(),
                Tiebreak::AssignmentLex => front
                    .into_iter()
                    .min_by(|a, b| {
                        let (ta, aa) = key(a);
                        let (tb, ab) = key(b);
                        (aa, ta).cmp(&(ab, tb))
                    })
                    .into_iter()
                    .collect(),
                Tiebreak::SeededRandom => front,
            }
        }
    }
}

fn maximal(semiring: &Semiring, enabled: &[Enabled]) -> Vec<usize> {
    (0..enabled.len())
        .filter(|&i| {
            let v = &enabled[i].solution.preference;
            !enabled.iter().any(|o| semiring.order(v, &o.solution.preference) == OrderResult::Less)
        })
        .collect()
}

/// Runs `a` from its initial state for at most `steps` steps.
pub fn run(a: &Automaton, policy: Policy, steps: usize) -> Result<Trace, ExecError> {
    run_from(&Explorer::new(a), a.initial().clone(), policy, steps)
}

/// [`run`] from an arbitrary state, sharing an explorer's solution cache.
pub fn run_from(ex: &Explorer<'_>, origin: StateId, policy: Policy, steps: usize) -> Result<Trace, ExecError> {
    let a = ex.automaton();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed());
    let mut trace = Trace { origin: origin.clone(), steps: Vec::new(), deadlocked: false };
    let mut q = origin;
    for _ in 0..steps {
        let en = ex.enabled(&q)?;
        let cands = candidates(a.semiring(), policy, &en);
        if cands.is_empty() {
            trace.deadlocked = true;
            break;
        }
        let pick = if cands.len() == 1 { cands[0] } else { cands[rng.random_range(0..cands.len())] };
        let Enabled { transition, solution } = en[pick].clone();
        let next = a.transitions()[transition].target.clone();
        trace.steps.push(Step { state: q, transition, fired: solution.assignment, preference: solution.preference, next: next.clone() });
        q = next;
    }
    Ok(trace)
}

/// Whether some run from the initial state fires exactly `prefix`.
pub fn accepts_prefix(a: &Automaton, prefix: &[Assignment]) -> Result<bool, ExecError> {
    accepts_prefix_with(&Explorer::new(a), prefix)
}

/// [`accepts_prefix`] sharing an explorer's solution cache.
pub fn accepts_prefix_with(ex: &Explorer<'_>, prefix: &[Assignment]) -> Result<bool, ExecError> {
    let a = ex.automaton();
    let mut frontier: BTreeSet<&StateId> = [a.initial()].into();
    for w in prefix {
        let mut next = BTreeSet::new();
        for q in frontier {
            for &i in ex.outgoing(q)? {
                let t = &a.transitions()[i];
                if t.fired().iter().ne(w.variables()) {
                    continue;
                }
                if ex.solutions(i)?.iter().any(|s| &s.assignment == w) {
                    next.insert(&t.target);
                }
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        frontier = next;
    }
    Ok(true)
}

/// The reachable part of an automaton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reach {
    /// In breadth-first discovery order.
    pub states: Vec<StateId>,
    /// Distinct `(source, fired ports, target)` triples of satisfiable transitions.
    pub edges: Vec<(StateId, BTreeSet<Port>, StateId)>,
}

/// Breadth-first closure from the initial state over transitions whose label
/// has at least one solution.
pub fn reachable(a: &Automaton) -> Result<Reach, ExecError> {
    let ex = Explorer::new(a);
    let mut seen: BTreeSet<&StateId> = [a.initial()].into();
    let mut queue = VecDeque::from([a.initial()]);
    let mut states = Vec::new();
    let mut edges = BTreeSet::new();
    while let Some(q) = queue.pop_front() {
        states.push(q.clone());
        let idx = ex.outgoing(q)?;
        if ex.exec.is_parallel() && idx.len() > 1 {
            ex.exec.map(idx.to_vec(), |i| ex.solutions(i).map(|_| ())).into_iter().collect::<Result<(), _>>()?;
        }
        for &i in idx {
            if ex.solutions(i)?.is_empty() {
                continue;
            }
            let t = &a.transitions()[i];
            edges.insert((q.clone(), t.fired().clone(), t.target.clone()));
            if seen.insert(&t.target) {
                queue.push_back(&t.target);
            }
        }
    }
    Ok(Reach { states, edges: edges.into_iter().collect() })
}

/// Graphviz rendering of a reachability result.
pub fn to_dot(reach: &Reach) -> String {
    let mut out = String::from("digraph sca {\n  rankdir=LR;\n");
    let ids: BTreeMap<&StateId, usize> = reach.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    for (i, s) in reach.states.iter().enumerate() {
        let shape = if i == 0 { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  n{i} [label={:?}, shape={shape}];", s.to_string());
    }
    for (src, fired, dst) in &reach.edges {
        let ports: Vec<&str> = fired.iter().map(|p| p.as_str()).collect();
        let _ = writeln!(out, "  n{} -> n{} [label={:?}];", ids[src], ids[dst], format!("{{{}}}", ports.join(", ")));
    }
    out.push_str("}\n");
    out
}

/// The constraint automaton with the same language: each label becomes a
/// crisp table holding exactly its solutions.
pub fn boolean_collapse(a: &Automaton) -> Result<Automaton, ExecError> {
    let ex = Explorer::new(a);
    let b = Semiring::boolean();
    let mut transitions = Vec::new();
    for (i, t) in a.transitions().iter().enumerate() {
        let entries = ex.solutions(i)?.iter().map(|s| (s.assignment.clone(), Pref::Bool(true))).collect();
        let c = Constraint::table(t.fired().clone(), b.clone(), entries)?;
        let label = Scsp::new(t.fired().clone(), b.clone(), [Arc::new(c)], t.label.domains())?;
        transitions.push(Transition { source: t.source.clone(), label, target: t.target.clone() });
    }
    Ok(Automaton::new(a.states().to_vec(), a.initial().clone(), a.ports().clone(), b, a.domains(), transitions)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ports, DataValue};
    use crate::expr::{CmpOp, Expr};
    use crate::scsp::Domain;

    /// The two-state example over the probabilistic semiring.
    fn fig1() -> Automaton {
        let p = Semiring::prob();
        let doms: BTreeMap<Port, Domain> =
            [(Port::new("V1"), Domain::range(4, 6)), (Port::new("V2"), Domain::range(2, 3))].into();
        let t = |from: &str, to: &str, fired: &[&str], pred: Expr, v: Pref| Transition {
            source: from.into(),
            label: Scsp::binary(ports(fired.iter().copied()), p.clone(), pred, v, &doms).unwrap(),
            target: to.into(),
        };
        let v = |name: &str| Expr::var(name);
        Automaton::new(
            vec!["q0".into(), "q1".into()],
            "q0".into(),
            ports(["V1", "V2"]),
            p.clone(),
            &doms,
            vec![
                t("q0", "q1", &["V1"], Expr::cmp(CmpOp::Ge, v("V1"), Expr::int(5)), Pref::prob(1, 2)),
                t("q1", "q0", &["V1", "V2"], Expr::member(v("V2"), vec![2.into(), 3.into()]), Pref::prob(4, 5)),
                t("q0", "q0", &["V1"], Expr::port_eq("V1", 4), Pref::prob(1, 10)),
                t("q1", "q1", &["V1", "V2"], Expr::cmp(CmpOp::Ne, v("V1"), v("V2")), Pref::prob(9, 10)),
            ],
        )
        .unwrap()
    }

    fn v1(i: i64) -> Assignment {
        Assignment::from_pairs([("V1", DataValue::Int(i))])
    }

    fn v12(a: i64, b: i64) -> Assignment {
        Assignment::from_pairs([("V1", DataValue::Int(a)), ("V2", DataValue::Int(b))])
    }

    #[test]
    fn enabled_at_initial_state() {
        let a = fig1();
        let en = enabled(&a, &"q0".into()).unwrap();
        let got: Vec<(usize, Assignment, Pref)> =
            en.into_iter().map(|e| (e.transition, e.solution.assignment, e.solution.preference)).collect();
        assert_eq!(
            got,
            vec![(0, v1(5), Pref::prob(1, 2)), (0, v1(6), Pref::prob(1, 2)), (2, v1(4), Pref::prob(1, 10))]
        );
        assert!(matches!(enabled(&a, &"nope".into()), Err(ExecError::UnknownState(_))));
    }

    #[test]
    fn runs_and_policies() {
        let a = fig1();
        assert!(run(&a, Policy::default(), 0).unwrap().steps.is_empty());
        let t = run(&a, Policy::default(), 4).unwrap();
        assert_eq!(t.steps[0].fired, v1(5));
        // At q1 the self-loop (0.9) beats returning (0.8).
        assert_eq!(t.steps[1].fired, v12(4, 2));
        assert_eq!(t.steps[1].next, "q1".into());
        assert!(!t.deadlocked);
        let lex = run(&a, Policy::GreedyGlobal { tiebreak: Tiebreak::AssignmentLex, seed: 0 }, 1).unwrap();
        assert_eq!(lex.steps[0].fired, v1(5));
        let n1 = run(&a, Policy::Nondet { seed: 7 }, 20).unwrap();
        assert_eq!(n1, run(&a, Policy::Nondet { seed: 7 }, 20).unwrap());
        assert!(t.to_lines().starts_with("0, q0, {V1=5}, 0.5\n"));
    }

    #[test]
    fn prefixes_and_reachability() {
        let a = fig1();
        assert!(accepts_prefix(&a, &[]).unwrap());
        assert!(accepts_prefix(&a, &[v1(4), v1(6), v12(6, 3)]).unwrap());
        assert!(!accepts_prefix(&a, &[v1(6), v1(6)]).unwrap());
        let r = reachable(&a).unwrap();
        assert_eq!(r.states, vec!["q0".into(), "q1".into()]);
        assert_eq!(r.edges.len(), 4);
        assert!(to_dot(&r).contains("n0 -> n1 [label=\"{V1}\"]"));
        let crisp = boolean_collapse(&a).unwrap();
        assert!(crisp.is_constraint_automaton());
        assert!(accepts_prefix(&crisp, &[v1(4), v1(6), v12(6, 3)]).unwrap());
        assert!(!accepts_prefix(&crisp, &[v1(6), v1(6)]).unwrap());
    }
}
