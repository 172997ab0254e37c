//! Finding the Pareto-maximal assignments of an SCSP.

use std::collections::BTreeSet;

use crate::data::{Assignment, DataValue, Port};
use crate::par::Exec;
use crate::scsp::{Constraint, Scsp, ScspError, Solution};
use crate::semiring::{OrderResult, Pref, Semiring};

/// Grids smaller than this are always solved on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

/// All nonzero, Pareto-maximal assignments of `p`.
pub fn solve(p: &Scsp) -> Result<BTreeSet<Solution>, ScspError> {
    let exec = if p.grid_size() >= PARALLEL_THRESHOLD { Exec::default() } else { Exec::Sequential };
    solve_with(p, exec)
}

/// [`solve`] with an explicit execution strategy. The parallel strategy splits
/// the search on the values of the first variable.
pub fn solve_with(p: &Scsp, exec: Exec) -> Result<BTreeSet<Solution>, ScspError> {
    let plan = Plan::new(p);
    let Some(start) = plan.start()? else {
        return Ok(BTreeSet::new());
    };
    if !exec.is_parallel() || plan.vars.is_empty() {
        let mut front = Front::default();
        plan.dfs(0, start, &mut Assignment::new(), &mut front)?;
        return Ok(front.into_set());
    }
    let branches = exec.map(plan.doms[0].iter().collect(), |v| {
        let mut front = Front::default();
        let mut a = Assignment::new();
        plan.branch(0, v, &start, &mut a, &mut front)?;
        Ok::<_, ScspError>(front.groups)
    });
    let mut front = Front::default();
    for groups in branches {
        for (pref, group) in groups? {
            front.insert(p.semiring(), pref, group);
        }
    }
    Ok(front.into_set())
}

/// The reference solver: scores every grid point, then keeps the undominated
/// nonzero ones using [`Semiring::compare`].
pub fn solve_bruteforce(p: &Scsp) -> Result<BTreeSet<Solution>, ScspError> {
    let s = p.semiring();
    let mut scored = Vec::new();
    for a in p.assignments() {
        let v = p.preference_of(&a)?;
        if !s.is_zero(&v) {
            scored.push(Solution { assignment: a, preference: v });
        }
    }
    let mut out = BTreeSet::new();
    'outer: for x in &scored {
        for y in &scored {
            if s.compare(&x.preference, &y.preference)? == OrderResult::Less {
                continue 'outer;
            }
        }
        out.insert(x.clone());
    }
    Ok(out)
}

struct Plan<'a> {
    semiring: &'a Semiring,
    vars: Vec<&'a Port>,
    doms: Vec<&'a [DataValue]>,
    /// Constraints with an empty scope.
    pre: Vec<&'a Constraint>,
    /// `at[k]`: constraints whose last scope variable is `vars[k]`.
    at: Vec<Vec<&'a Constraint>>,
    total: bool,
}

impl<'a> Plan<'a> {
    fn new(p: &'a Scsp) -> Self {
        let vars: Vec<&Port> = p.variables().iter().collect();
        let doms = vars.iter().map(|v| p.domains()[*v].values()).collect();
        let mut pre = Vec::new();
        let mut at = vec![Vec::new(); vars.len()];
        for c in p.constraints() {
            match c.scope().iter().next_back() {
                // Variables are sorted, so the last scope element is assigned last.
                Some(last) => at[vars.binary_search(&last).expect("scope checked at construction")].push(&**c),
                None => pre.push(&**c),
            }
        }
        Plan { semiring: p.semiring(), vars, doms, pre, at, total: p.semiring().is_total() }
    }

    /// The product of the empty-scope constraints, or `None` if it is zero.
    fn start(&self) -> Result<Option<Pref>, ScspError> {
        let empty = Assignment::new();
        let mut acc = self.semiring.one();
        for c in &self.pre {
            acc = self.semiring.mul(&acc, &c.evaluate(&empty)?);
        }
        Ok((!self.semiring.is_zero(&acc)).then_some(acc))
    }

    fn dfs(&self, depth: usize, acc: Pref, a: &mut Assignment, front: &mut Front) -> Result<(), ScspError> {
        if depth == self.vars.len() {
            front.insert(self.semiring, acc, [a.clone()]);
            return Ok(());
        }
        for v in self.doms[depth] {
            self.branch(depth, v, &acc, a, front)?;
        }
        a.remove(self.vars[depth]);
        Ok(())
    }

    fn branch(&self, depth: usize, v: &DataValue, acc: &Pref, a: &mut Assignment, front: &mut Front) -> Result<(), ScspError> {
        a.insert(self.vars[depth].clone(), v.clone());
        let mut val = acc.clone();
        for c in &self.at[depth] {
            val = self.semiring.mul(&val, &c.evaluate(a)?);
            if self.semiring.is_zero(&val) {
                return Ok(());
            }
        }
        // a ⊗ b ≤ a: a partial product strictly below the front can only get
        // worse. Under partial orders only zero prunes.
        if self.total && front.dominates(self.semiring, &val) {
            return Ok(());
        }
        self.dfs(depth + 1, val, a, front)
    }
}

/// The current undominated solutions, grouped by preference so that ties
/// cost one comparison per distinct value.
#[derive(Default)]
struct Front {
    groups: Vec<(Pref, Vec<Assignment>)>,
}

impl Front {
    fn dominates(&self, s: &Semiring, v: &Pref) -> bool {
        self.groups.iter().any(|(b, _)| s.order(v, b) == OrderResult::Less)
    }

    fn insert(&mut self, s: &Semiring, pref: Pref, assignments: impl IntoIterator<Item = Assignment>) {
        if let Some((_, group)) = self.groups.iter_mut().find(|(b, _)| *b == pref) {
            group.extend(assignments);
            return;
        }
        if self.dominates(s, &pref) {
            return;
        }
        self.groups.retain(|(b, _)| s.order(b, &pref) != OrderResult::Less);
        self.groups.push((pref, assignments.into_iter().collect()));
    }

    fn into_set(self) -> BTreeSet<Solution> {
        self.groups
            .into_iter()
            .flat_map(|(preference, group)| group.into_iter().map(move |assignment| Solution { assignment, preference: preference.clone() }))
            .collect()
    }
}
