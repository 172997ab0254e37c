//! Soft data constraints and soft constraint satisfaction problems.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use thiserror::Error;

use crate::data::{Assignment, AssignmentError, DataValue, Port};
use crate::expr::{EvalError, Expr};
use crate::semiring::{Homomorphism, Pref, Semiring, SemiringError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScspError {
    #[error("variable `{0}` is not a variable of the problem")]
    UnknownVariable(Port),
    #[error("variable `{0}` is not assigned")]
    Unassigned(Port),
    #[error("value {value} is outside the domain of `{port}`")]
    DomainViolation { port: Port, value: DataValue },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("semiring mismatch: {left} vs {right}")]
    SemiringMismatch { left: Semiring, right: Semiring },
    #[error("`{0}` is declared with different domains")]
    DomainMismatch(Port),
    #[error("no domain declared for `{0}`")]
    MissingDomain(Port),
    #[error("domain of `{0}` is empty")]
    EmptyDomain(Port),
    #[error("constraint mentions `{0}` outside its scope")]
    OutOfScope(Port),
    #[error("table entry binds {0}, expected exactly the scope")]
    TableKey(Assignment),
    #[error(transparent)]
    Semiring(#[from] SemiringError),
}

impl From<AssignmentError> for ScspError {
    fn from(e: AssignmentError) -> Self {
        match e {
            AssignmentError::UnknownVariable(p) => ScspError::Unassigned(p),
            AssignmentError::Conflict(p) => ScspError::DomainMismatch(p),
        }
    }
}

/// A finite, sorted, duplicate-free set of data values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Domain(Arc<[DataValue]>);

impl Domain {
    pub fn new(values: impl IntoIterator<Item = DataValue>) -> Self {
        let mut v: Vec<DataValue> = values.into_iter().collect();
        v.sort();
        v.dedup();
        Domain(v.into())
    }

    /// Integers `lo..=hi`.
    pub fn range(lo: i64, hi: i64) -> Self {
        Domain((lo..=hi).map(DataValue::Int).collect::<Vec<_>>().into())
    }

    pub fn values(&self) -> &[DataValue] {
        &self.0
    }

    pub fn contains(&self, v: &DataValue) -> bool {
        self.0.binary_search(v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the values are exactly the integers `lo..=hi` for some bounds.
    pub fn as_int_range(&self) -> Option<(i64, i64)> {
        let ints: Vec<i64> = self
            .0
            .iter()
            .map(|d| match d {
                DataValue::Int(i) => Some(*i),
                _ => None,
            })
            .collect::<Option<_>>()?;
        let (lo, hi) = (*ints.first()?, *ints.last()?);
        (ints.len() > 1 && hi - lo + 1 == ints.len() as i64).then_some((lo, hi))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(", "))
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// How a constraint values assignments of its scope.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    /// `value` where `predicate` holds, zero elsewhere.
    Binary { predicate: Expr, value: Pref },
    /// Explicit values; assignments absent from the table are valued zero.
    Table(BTreeMap<Assignment, Pref>),
}

/// A soft data constraint `⟨U, E, [·]⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    scope: BTreeSet<Port>,
    semiring: Semiring,
    valuation: Valuation,
}

impl Constraint {
    /// The abbreviated binary form `⟨U, φ, e⟩`.
    pub fn binary(scope: BTreeSet<Port>, semiring: Semiring, predicate: Expr, value: Pref) -> Result<Self, ScspError> {
        if let Some(v) = predicate.vars().into_iter().find(|v| !scope.contains(v)) {
            return Err(ScspError::OutOfScope(v));
        }
        semiring.check(&value)?;
        Ok(Constraint { scope, semiring, valuation: Valuation::Binary { predicate, value } })
    }

    pub fn table(scope: BTreeSet<Port>, semiring: Semiring, entries: BTreeMap<Assignment, Pref>) -> Result<Self, ScspError> {
        for (k, v) in &entries {
            if k.variables().ne(scope.iter()) {
                return Err(ScspError::TableKey(k.clone()));
            }
            semiring.check(v)?;
        }
        Ok(Constraint { scope, semiring, valuation: Valuation::Table(entries) })
    }

    pub fn scope(&self) -> &BTreeSet<Port> {
        &self.scope
    }

    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    /// Whether this is the trivial `⟨∅, ⊤, 1⟩` constraint.
    pub fn is_trivial(&self) -> bool {
        matches!(&self.valuation, Valuation::Binary { predicate: Expr::True, value } if *value == self.semiring.one())
    }

    /// `[α↾U]` for an assignment binding at least the scope.
    pub fn evaluate(&self, a: &Assignment) -> Result<Pref, ScspError> {
        match &self.valuation {
            Valuation::Binary { predicate, value } => {
                Ok(if predicate.holds(a)? { value.clone() } else { self.semiring.zero() })
            }
            Valuation::Table(entries) => {
                let key = a.restrict(&self.scope)?;
                Ok(entries.get(&key).cloned().unwrap_or_else(|| self.semiring.zero()))
            }
        }
    }

    /// Post-composes the valuation with `h`.
    pub fn map_hom(&self, h: &Homomorphism) -> Result<Constraint, ScspError> {
        if h.source() != &self.semiring {
            return Err(ScspError::SemiringMismatch { left: h.source().clone(), right: self.semiring.clone() });
        }
        let valuation = match &self.valuation {
            Valuation::Binary { predicate, value } => {
                Valuation::Binary { predicate: predicate.clone(), value: h.apply(value)? }
            }
            Valuation::Table(entries) => Valuation::Table(
                entries
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), h.apply(v)?)))
                    .collect::<Result<_, ScspError>>()?,
            ),
        };
        Ok(Constraint { scope: self.scope.clone(), semiring: h.target().clone(), valuation })
    }
}

fn cmp_shared(a: &Arc<Constraint>, b: &Arc<Constraint>) -> Ordering {
    if Arc::ptr_eq(a, b) {
        Ordering::Equal
    } else {
        a.cmp(b)
    }
}

/// A soft constraint satisfaction problem over finite domains.
///
/// Constraints are kept as a sorted set; structurally equal constraints
/// collapse.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scsp {
    variables: BTreeSet<Port>,
    semiring: Semiring,
    constraints: Vec<Arc<Constraint>>,
    domains: BTreeMap<Port, Domain>,
}

impl Scsp {
    /// Builds a problem. Domains for non-variables are dropped.
    pub fn new(
        variables: BTreeSet<Port>,
        semiring: Semiring,
        constraints: impl IntoIterator<Item = Arc<Constraint>>,
        domains: &BTreeMap<Port, Domain>,
    ) -> Result<Self, ScspError> {
        let mut cs: Vec<Arc<Constraint>> = constraints.into_iter().collect();
        for c in &cs {
            if c.semiring() != &semiring {
                return Err(ScspError::SemiringMismatch { left: semiring, right: c.semiring().clone() });
            }
            if let Some(v) = c.scope().iter().find(|v| !variables.contains(*v)) {
                return Err(ScspError::UnknownVariable(v.clone()));
            }
        }
        let mut doms = BTreeMap::new();
        for v in &variables {
            let d = domains.get(v).ok_or_else(|| ScspError::MissingDomain(v.clone()))?;
            if d.is_empty() {
                return Err(ScspError::EmptyDomain(v.clone()));
            }
            doms.insert(v.clone(), d.clone());
        }
        cs.sort_by(cmp_shared);
        cs.dedup_by(|a, b| cmp_shared(a, b) == Ordering::Equal);
        Ok(Scsp { variables, semiring, constraints: cs, domains: doms })
    }

    /// The problem with no variables and no constraints.
    pub fn empty(semiring: Semiring) -> Self {
        Scsp { variables: BTreeSet::new(), semiring, constraints: Vec::new(), domains: BTreeMap::new() }
    }

    /// A single binary constraint whose scope is the variable set.
    pub fn binary(
        scope: BTreeSet<Port>,
        semiring: Semiring,
        predicate: Expr,
        value: Pref,
        domains: &BTreeMap<Port, Domain>,
    ) -> Result<Self, ScspError> {
        let c = Constraint::binary(scope.clone(), semiring.clone(), predicate, value)?;
        Scsp::new(scope, semiring, [Arc::new(c)], domains)
    }

    pub fn variables(&self) -> &BTreeSet<Port> {
        &self.variables
    }

    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn constraints(&self) -> &[Arc<Constraint>] {
        &self.constraints
    }

    pub fn domains(&self) -> &BTreeMap<Port, Domain> {
        &self.domains
    }

    pub fn domain(&self, v: &str) -> Option<&Domain> {
        self.domains.get(v)
    }

    /// Number of complete assignments.
    pub fn grid_size(&self) -> usize {
        self.domains.values().map(Domain::len).product()
    }

    /// Checks that `a` assigns exactly the variables, within their domains.
    pub fn check_assignment(&self, a: &Assignment) -> Result<(), ScspError> {
        if let Some(v) = a.variables().find(|v| !self.variables.contains(*v)) {
            return Err(ScspError::UnknownVariable(v.clone()));
        }
        for v in &self.variables {
            let value = a.get(v).ok_or_else(|| ScspError::Unassigned(v.clone()))?;
            if !self.domains[v].contains(value) {
                return Err(ScspError::DomainViolation { port: v.clone(), value: value.clone() });
            }
        }
        Ok(())
    }

    /// The preference function `[α]_P`: the product of all constraint values.
    pub fn preference_of(&self, a: &Assignment) -> Result<Pref, ScspError> {
        self.check_assignment(a)?;
        self.constraints.iter().try_fold(self.semiring.one(), |acc, c| {
            let v = c.evaluate(a)?;
            Ok(self.semiring.mul(&acc, &v))
        })
    }

    /// All complete assignments in lexicographic grid order.
    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        let vars: Vec<&Port> = self.variables.iter().collect();
        self.domains
            .values()
            .map(|d| d.values().iter())
            .multi_cartesian_product()
            .map(move |vals| vars.iter().map(|v| (*v).clone()).zip(vals.into_iter().cloned()).collect())
    }

    /// `P1 ⊗ P2`: union of variables, constraints and domains.
    pub fn compose(&self, other: &Scsp) -> Result<Scsp, ScspError> {
        if self.semiring != other.semiring {
            return Err(ScspError::SemiringMismatch { left: self.semiring.clone(), right: other.semiring.clone() });
        }
        let mut domains = self.domains.clone();
        for (k, d) in &other.domains {
            match domains.get(k) {
                Some(existing) if existing != d => return Err(ScspError::DomainMismatch(k.clone())),
                Some(_) => {}
                None => {
                    domains.insert(k.clone(), d.clone());
                }
            }
        }
        let variables = self.variables.union(&other.variables).cloned().collect();
        let constraints = self
            .constraints
            .iter()
            .merge_by(other.constraints.iter(), |a, b| cmp_shared(a, b) != Ordering::Greater)
            .dedup_by(|a, b| cmp_shared(a, b) == Ordering::Equal)
            .cloned()
            .collect();
        Ok(Scsp { variables, semiring: self.semiring.clone(), constraints, domains })
    }

    /// `h(P)`: every valuation post-composed with `h`.
    pub fn apply_hom(&self, h: &Homomorphism) -> Result<Scsp, ScspError> {
        if h.source() != &self.semiring {
            return Err(ScspError::SemiringMismatch { left: h.source().clone(), right: self.semiring.clone() });
        }
        let constraints = self
            .constraints
            .iter()
            .map(|c| c.map_hom(h).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        Scsp::new(self.variables.clone(), h.target().clone(), constraints, &self.domains)
    }

    /// The equivalent problem with a single table constraint over all variables.
    pub fn to_single_table(&self) -> Result<Scsp, ScspError> {
        let mut entries = BTreeMap::new();
        for a in self.assignments() {
            let v = self.preference_of(&a)?;
            entries.insert(a, v);
        }
        let c = Constraint::table(self.variables.clone(), self.semiring.clone(), entries)?;
        Scsp::new(self.variables.clone(), self.semiring.clone(), [Arc::new(c)], &self.domains)
    }

    /// Merges all binary constraints into one `⟨V, ∧φ, ⊗e⟩`, if there are no
    /// table constraints. Preferences are unchanged because zero absorbs.
    pub fn as_single_binary(&self) -> Option<(Expr, Pref)> {
        let mut preds = Vec::new();
        let mut value = self.semiring.one();
        for c in &self.constraints {
            match c.valuation() {
                Valuation::Binary { predicate, value: v } => {
                    if *predicate != Expr::True {
                        preds.push(predicate.clone());
                    }
                    value = self.semiring.mul(&value, v);
                }
                Valuation::Table(_) => return None,
            }
        }
        Some((Expr::all(preds), value))
    }
}

/// A nonzero assignment with its preference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Solution {
    pub assignment: Assignment,
    pub preference: Pref,
}
