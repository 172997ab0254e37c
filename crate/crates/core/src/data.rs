//! Symbols, data values and assignments.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// An interned-ish identifier. Cloning is a reference-count bump.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

/// Port symbols name the variables of soft constraints and automata.
pub type Port = Symbol;

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Symbol {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Builds a sorted port set from string slices.
pub fn ports<'a>(names: impl IntoIterator<Item = &'a str>) -> BTreeSet<Port> {
    names.into_iter().map(Symbol::new).collect()
}

/// Formats a rational as an integer, a terminating decimal, or `n/d`.
pub fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        return write!(f, "{}", r.numer());
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut digits = 0usize;
    while (&d % &two).is_zero() {
        d /= &two;
        digits += 1;
    }
    let mut fives = 0usize;
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return write!(f, "{}/{}", r.numer(), r.denom());
    }
    let places = digits.max(fives);
    let scaled = r * BigRational::from_integer(BigInt::from(10).pow(places as u32));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    write!(f, "{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// Renders a rational with [`fmt_rational`].
pub fn rational_to_string(r: &BigRational) -> String {
    struct D<'a>(&'a BigRational);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_rational(self.0, f)
        }
    }
    D(r).to_string()
}

/// Parses `3`, `-2`, `0.36`, `1/3`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        BigRational::new(n, d)
    } else if let Some((int, frac)) = body.split_once('.') {
        if int.is_empty() || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = format!("{int}{frac}").parse().ok()?;
        BigRational::new(n, BigInt::from(10).pow(frac.len() as u32))
    } else {
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        BigRational::from_integer(body.parse().ok()?)
    };
    Some(if neg { -value } else { value })
}

/// A value a port can carry.
///
/// Rationals with denominator one are always stored as `Int`, so structural
/// equality coincides with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum DataValue {
    Int(i64),
    Rat(BigRational),
    Atom(Symbol),
}

impl DataValue {
    pub fn atom(name: &str) -> Self {
        DataValue::Atom(Symbol::new(name))
    }

    /// Normalizing constructor for rationals.
    pub fn rational(r: BigRational) -> Self {
        if r.is_integer() {
            if let Some(i) = r.numer().to_i64() {
                return DataValue::Int(i);
            }
        }
        DataValue::Rat(r)
    }

    /// Parses a decimal/fraction literal into a normalized value.
    pub fn parse_number(text: &str) -> Option<Self> {
        parse_rational(text).map(DataValue::rational)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            DataValue::Int(i) => Some(BigRational::from_integer(BigInt::from(*i))),
            DataValue::Rat(r) => Some(r.clone()),
            DataValue::Atom(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, DataValue::Atom(_))
    }
}

impl From<i64> for DataValue {
    fn from(i: i64) -> Self {
        DataValue::Int(i)
    }
}

impl Ord for DataValue {
    /// Numbers order numerically and precede atoms; atoms order by name.
    fn cmp(&self, other: &Self) -> Ordering {
        use DataValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Atom(a), Atom(b)) => a.cmp(b),
            (Atom(_), _) => Ordering::Greater,
            (_, Atom(_)) => Ordering::Less,
            (a, b) => a.as_rational().cmp(&b.as_rational()),
        }
    }
}

impl PartialOrd for DataValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataValue::Int(i) => write!(f, "{i}"),
            DataValue::Rat(r) => fmt_rational(r, f),
            DataValue::Atom(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Debug for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for DataValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DataValue::Int(i) => s.serialize_i64(*i),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("variable `{0}` is not bound by the assignment")]
    UnknownVariable(Port),
    #[error("assignments disagree on `{0}`")]
    Conflict(Port),
}

/// A finite map from ports to data values.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<Port, DataValue>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<P: Into<Port>, V: Into<DataValue>>(pairs: impl IntoIterator<Item = (P, V)>) -> Self {
        Assignment(pairs.into_iter().map(|(p, v)| (p.into(), v.into())).collect())
    }

    pub fn get(&self, port: &str) -> Option<&DataValue> {
        self.0.get(port)
    }

    pub fn insert(&mut self, port: Port, value: DataValue) -> Option<DataValue> {
        self.0.insert(port, value)
    }

    pub fn remove(&mut self, port: &str) -> Option<DataValue> {
        self.0.remove(port)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Port, &DataValue)> {
        self.0.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Port> {
        self.0.keys()
    }

    pub fn variable_set(&self) -> BTreeSet<Port> {
        self.0.keys().cloned().collect()
    }

    /// The unique assignment of `vars` agreeing with `self`.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Port>) -> Result<Assignment, AssignmentError> {
        let mut out = BTreeMap::new();
        for v in vars {
            let value = self.0.get(v).ok_or_else(|| AssignmentError::UnknownVariable(v.clone()))?;
            out.insert(v.clone(), value.clone());
        }
        Ok(Assignment(out))
    }

    /// `α + β`: the assignment of the union of both variable sets.
    pub fn merge(&self, other: &Assignment) -> Result<Assignment, AssignmentError> {
        let mut out = self.0.clone();
        for (k, v) in &other.0 {
            match out.get(k) {
                Some(existing) if existing != v => return Err(AssignmentError::Conflict(k.clone())),
                Some(_) => {}
                None => {
                    out.insert(k.clone(), v.clone());
                }
            }
        }
        Ok(Assignment(out))
    }
}

impl FromIterator<(Port, DataValue)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Port, DataValue)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}
