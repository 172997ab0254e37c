//! Constraint semirings, their induced order, and homomorphisms between them.
//!
//! A [`Semiring`] is a closed description of a preference domain: one of the
//! four base semirings (boolean, weighted, probabilistic, set) or a product,
//! join or lexicographic combination of two others. Values live in
//! [`Pref`]; every operation checks carrier membership at the public
//! boundary.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::data::{fmt_rational, Symbol};

/// A weight of the tropical semiring: a nonnegative rational or infinity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Weight {
    Finite(BigRational),
    Infinite,
}

impl Weight {
    pub fn int(n: i64) -> Self {
        Weight::Finite(BigRational::from_integer(BigInt::from(n)))
    }
}

impl Ord for Weight {
    /// Numeric order with infinity on top (not the semiring order).
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Weight::Finite(a), Weight::Finite(b)) => a.cmp(b),
            (Weight::Finite(_), Weight::Infinite) => Ordering::Less,
            (Weight::Infinite, Weight::Finite(_)) => Ordering::Greater,
            (Weight::Infinite, Weight::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of some semiring carrier.
///
/// The derived `Ord` is a structural order for use in sets and maps; the
/// preference order is [`Semiring::compare`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pref {
    Bool(bool),
    Weight(Weight),
    Prob(BigRational),
    Set(BTreeSet<Symbol>),
    Pair(Box<Pref>, Box<Pref>),
}

impl Pref {
    pub fn weight(n: i64) -> Self {
        Pref::Weight(Weight::int(n))
    }

    pub fn infinity() -> Self {
        Pref::Weight(Weight::Infinite)
    }

    /// A probability `num/den`.
    pub fn prob(num: i64, den: i64) -> Self {
        Pref::Prob(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn set<'a>(atoms: impl IntoIterator<Item = &'a str>) -> Self {
        Pref::Set(atoms.into_iter().map(Symbol::new).collect())
    }

    pub fn pair(left: Pref, right: Pref) -> Self {
        Pref::Pair(Box::new(left), Box::new(right))
    }

    pub fn split(&self) -> Option<(&Pref, &Pref)> {
        match self {
            Pref::Pair(l, r) => Some((l, r)),
            _ => None,
        }
    }
}

impl fmt::Display for Pref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pref::Bool(true) => f.write_str("top"),
            Pref::Bool(false) => f.write_str("bot"),
            Pref::Weight(Weight::Infinite) => f.write_str("inf"),
            Pref::Weight(Weight::Finite(r)) | Pref::Prob(r) => fmt_rational(r, f),
            Pref::Set(atoms) => {
                f.write_str("{")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")
            }
            Pref::Pair(l, r) => write!(f, "<{l}, {r}>"),
        }
    }
}

impl fmt::Debug for Pref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Pref {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Outcome of comparing two preferences in the induced order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OrderResult {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl OrderResult {
    pub fn reverse(self) -> Self {
        match self {
            OrderResult::Less => OrderResult::Greater,
            OrderResult::Greater => OrderResult::Less,
            other => other,
        }
    }

    /// `a <= b` holds.
    pub fn is_le(self) -> bool {
        matches!(self, OrderResult::Less | OrderResult::Equal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Which cancellative composite a canonical injection targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositeKind {
    Join,
    Lex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemiringError {
    #[error("{value} is not in the carrier of {semiring}")]
    CarrierViolation { value: Pref, semiring: Semiring },
    #[error("{side} operand {semiring} is not a cancellative c-semiring")]
    NotCancellative { side: Side, semiring: Semiring },
    #[error("set semiring needs a nonempty alphabet")]
    EmptyAlphabet,
    #[error("expected semiring {expected}, found {found}")]
    Mismatch { expected: Semiring, found: Semiring },
    #[error("map does not preserve units: {0}")]
    NotHomomorphism(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemiringKind {
    Bool,
    Weighted,
    Prob,
    Set(BTreeSet<Symbol>),
    Product(Semiring, Semiring),
    Join(Semiring, Semiring),
    Lex(Semiring, Semiring),
}

/// A c-semiring instance. Cheap to clone; immutable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Semiring(Arc<SemiringKind>);

impl Semiring {
    pub fn boolean() -> Self {
        Semiring(Arc::new(SemiringKind::Bool))
    }

    pub fn weighted() -> Self {
        Semiring(Arc::new(SemiringKind::Weighted))
    }

    pub fn prob() -> Self {
        Semiring(Arc::new(SemiringKind::Prob))
    }

    pub fn set<'a>(alphabet: impl IntoIterator<Item = &'a str>) -> Result<Self, SemiringError> {
        Self::set_of(alphabet.into_iter().map(Symbol::new).collect())
    }

    pub fn set_of(alphabet: BTreeSet<Symbol>) -> Result<Self, SemiringError> {
        if alphabet.is_empty() {
            return Err(SemiringError::EmptyAlphabet);
        }
        Ok(Semiring(Arc::new(SemiringKind::Set(alphabet))))
    }

    /// The full Cartesian product with componentwise operations.
    pub fn product(l: Semiring, r: Semiring) -> Self {
        Semiring(Arc::new(SemiringKind::Product(l, r)))
    }

    /// The join semiring: cancellative pairs plus the zero pair.
    pub fn join(l: Semiring, r: Semiring) -> Result<Self, SemiringError> {
        Self::require_cancellative(&l, &r)?;
        Ok(Semiring(Arc::new(SemiringKind::Join(l, r))))
    }

    /// The lexicographic product; `l` is the more significant component.
    pub fn lex(l: Semiring, r: Semiring) -> Result<Self, SemiringError> {
        Self::require_cancellative(&l, &r)?;
        Ok(Semiring(Arc::new(SemiringKind::Lex(l, r))))
    }

    fn require_cancellative(l: &Semiring, r: &Semiring) -> Result<(), SemiringError> {
        if !l.is_cancellative_semiring() {
            return Err(SemiringError::NotCancellative { side: Side::Left, semiring: l.clone() });
        }
        if !r.is_cancellative_semiring() {
            return Err(SemiringError::NotCancellative { side: Side::Right, semiring: r.clone() });
        }
        Ok(())
    }

    pub fn kind(&self) -> &SemiringKind {
        &self.0
    }

    pub fn is_bool(&self) -> bool {
        matches!(*self.0, SemiringKind::Bool)
    }

    /// The two operands of a composite semiring.
    pub fn operands(&self) -> Option<(&Semiring, &Semiring)> {
        match &*self.0 {
            SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn zero(&self) -> Pref {
        match &*self.0 {
            SemiringKind::Bool => Pref::Bool(false),
            SemiringKind::Weighted => Pref::Weight(Weight::Infinite),
            SemiringKind::Prob => Pref::Prob(BigRational::zero()),
            SemiringKind::Set(_) => Pref::Set(BTreeSet::new()),
            SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r) => {
                Pref::pair(l.zero(), r.zero())
            }
        }
    }

    pub fn one(&self) -> Pref {
        match &*self.0 {
            SemiringKind::Bool => Pref::Bool(true),
            SemiringKind::Weighted => Pref::Weight(Weight::Finite(BigRational::zero())),
            SemiringKind::Prob => Pref::Prob(BigRational::one()),
            SemiringKind::Set(alphabet) => Pref::Set(alphabet.clone()),
            SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r) => {
                Pref::pair(l.one(), r.one())
            }
        }
    }

    pub fn is_zero(&self, a: &Pref) -> bool {
        match (&*self.0, a) {
            (SemiringKind::Bool, Pref::Bool(b)) => !b,
            (SemiringKind::Weighted, Pref::Weight(w)) => *w == Weight::Infinite,
            (SemiringKind::Prob, Pref::Prob(p)) => p.is_zero(),
            (SemiringKind::Set(_), Pref::Set(s)) => s.is_empty(),
            (
                SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r),
                Pref::Pair(a, b),
            ) => l.is_zero(a) && r.is_zero(b),
            _ => false,
        }
    }

    /// Carrier membership.
    pub fn contains(&self, a: &Pref) -> bool {
        match (&*self.0, a) {
            (SemiringKind::Bool, Pref::Bool(_)) => true,
            (SemiringKind::Weighted, Pref::Weight(Weight::Infinite)) => true,
            (SemiringKind::Weighted, Pref::Weight(Weight::Finite(w))) => !w.is_negative(),
            (SemiringKind::Prob, Pref::Prob(p)) => !p.is_negative() && *p <= BigRational::one(),
            (SemiringKind::Set(alphabet), Pref::Set(s)) => s.is_subset(alphabet),
            (SemiringKind::Product(l, r), Pref::Pair(a, b)) => l.contains(a) && r.contains(b),
            (SemiringKind::Join(l, r), Pref::Pair(a, b)) => {
                if !(l.contains(a) && r.contains(b)) {
                    return false;
                }
                (l.cancellative(a) && r.cancellative(b)) || (l.is_zero(a) && r.is_zero(b))
            }
            (SemiringKind::Lex(l, r), Pref::Pair(a, b)) => {
                if !(l.contains(a) && r.contains(b)) {
                    return false;
                }
                l.cancellative(a) || r.is_zero(b)
            }
            _ => false,
        }
    }

    pub fn check(&self, a: &Pref) -> Result<(), SemiringError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(SemiringError::CarrierViolation { value: a.clone(), semiring: self.clone() })
        }
    }

    /// Whether `a` is a cancellative element.
    pub fn is_cancellative(&self, a: &Pref) -> Result<bool, SemiringError> {
        self.check(a)?;
        Ok(self.cancellative(a))
    }

    /// Analytic per-kind cancellativity rule; assumes carrier membership.
    pub(crate) fn cancellative(&self, a: &Pref) -> bool {
        match (&*self.0, a) {
            (SemiringKind::Bool, Pref::Bool(b)) => *b,
            (SemiringKind::Weighted, Pref::Weight(w)) => *w != Weight::Infinite,
            (SemiringKind::Prob, Pref::Prob(p)) => !p.is_zero(),
            (SemiringKind::Set(alphabet), Pref::Set(s)) => s == alphabet,
            (
                SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r),
                Pref::Pair(a, b),
            ) => l.cancellative(a) && r.cancellative(b),
            _ => false,
        }
    }

    /// The cancellative-c-semiring predicate `C(E) ∪ {0} = E`, decided per kind.
    ///
    /// Lex composites are accepted whenever both operands are cancellative,
    /// so that lexicographic chains can themselves be composed.
    pub fn is_cancellative_semiring(&self) -> bool {
        match &*self.0 {
            SemiringKind::Bool | SemiringKind::Weighted | SemiringKind::Prob => true,
            SemiringKind::Set(alphabet) => alphabet.len() == 1,
            SemiringKind::Product(..) => false,
            SemiringKind::Join(..) => true,
            SemiringKind::Lex(l, r) => l.is_cancellative_semiring() && r.is_cancellative_semiring(),
        }
    }

    /// Whether the induced order is total.
    pub fn is_total(&self) -> bool {
        match &*self.0 {
            SemiringKind::Bool | SemiringKind::Weighted | SemiringKind::Prob => true,
            SemiringKind::Set(alphabet) => alphabet.len() == 1,
            SemiringKind::Product(..) | SemiringKind::Join(..) => false,
            SemiringKind::Lex(l, r) => l.is_total() && r.is_total(),
        }
    }

    /// `⊕` of a finite set of values.
    pub fn big_plus<'a>(&self, values: impl IntoIterator<Item = &'a Pref>) -> Result<Pref, SemiringError> {
        let values: Vec<&Pref> = values.into_iter().collect();
        for v in &values {
            self.check(v)?;
        }
        Ok(self.sum(&values))
    }

    /// Binary `⊕`.
    pub fn plus(&self, a: &Pref, b: &Pref) -> Result<Pref, SemiringError> {
        self.big_plus([a, b])
    }

    pub(crate) fn sum(&self, values: &[&Pref]) -> Pref {
        match &*self.0 {
            SemiringKind::Bool => Pref::Bool(values.iter().any(|v| matches!(v, Pref::Bool(true)))),
            SemiringKind::Weighted => values
                .iter()
                .filter_map(|v| match v {
                    Pref::Weight(w) => Some(w),
                    _ => None,
                })
                .min()
                .cloned()
                .map(Pref::Weight)
                .unwrap_or_else(|| self.zero()),
            SemiringKind::Prob => values
                .iter()
                .filter_map(|v| match v {
                    Pref::Prob(p) => Some(p),
                    _ => None,
                })
                .max()
                .cloned()
                .map(Pref::Prob)
                .unwrap_or_else(|| self.zero()),
            SemiringKind::Set(_) => {
                let mut out = BTreeSet::new();
                for v in values {
                    if let Pref::Set(s) = v {
                        out.extend(s.iter().cloned());
                    }
                }
                Pref::Set(out)
            }
            SemiringKind::Product(l, r) | SemiringKind::Join(l, r) => {
                let (firsts, seconds) = unzip_pairs(values);
                Pref::pair(l.sum(&firsts), r.sum(&seconds))
            }
            SemiringKind::Lex(l, r) => {
                let (firsts, _) = unzip_pairs(values);
                let best = l.sum(&firsts);
                // m(E'): second components co-occurring with the best first one.
                let m: Vec<&Pref> = values
                    .iter()
                    .filter_map(|v| v.split())
                    .filter(|(a, _)| *a == &best)
                    .map(|(_, b)| b)
                    .collect();
                let second = r.sum(&m);
                Pref::pair(best, second)
            }
        }
    }

    /// `a ⊗ b`.
    pub fn times(&self, a: &Pref, b: &Pref) -> Result<Pref, SemiringError> {
        self.check(a)?;
        self.check(b)?;
        let out = self.mul(a, b);
        // Closure of the restricted carriers under ⊗.
        self.check(&out)?;
        Ok(out)
    }

    pub(crate) fn mul(&self, a: &Pref, b: &Pref) -> Pref {
        match (&*self.0, a, b) {
            (SemiringKind::Bool, Pref::Bool(x), Pref::Bool(y)) => Pref::Bool(*x && *y),
            (SemiringKind::Weighted, Pref::Weight(x), Pref::Weight(y)) => Pref::Weight(match (x, y) {
                (Weight::Finite(x), Weight::Finite(y)) => Weight::Finite(x + y),
                _ => Weight::Infinite,
            }),
            (SemiringKind::Prob, Pref::Prob(x), Pref::Prob(y)) => Pref::Prob(x * y),
            (SemiringKind::Set(_), Pref::Set(x), Pref::Set(y)) => Pref::Set(x.intersection(y).cloned().collect()),
            (
                SemiringKind::Product(l, r) | SemiringKind::Join(l, r) | SemiringKind::Lex(l, r),
                Pref::Pair(a1, a2),
                Pref::Pair(b1, b2),
            ) => Pref::pair(l.mul(a1, b1), r.mul(a2, b2)),
            _ => panic!("operands {a} and {b} are not in the carrier of {self}"),
        }
    }

    /// Compares `a` and `b` in the induced order, using only `⊕` and equality.
    pub fn compare(&self, a: &Pref, b: &Pref) -> Result<OrderResult, SemiringError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Ok(OrderResult::Equal);
        }
        let s = self.sum(&[a, b]);
        Ok(if &s == b {
            OrderResult::Less
        } else if &s == a {
            OrderResult::Greater
        } else {
            OrderResult::Incomparable
        })
    }

    /// Structural comparator, equivalent to [`compare`](Self::compare) on
    /// carrier elements but without allocating sums.
    pub(crate) fn order(&self, a: &Pref, b: &Pref) -> OrderResult {
        use OrderResult::*;
        match (&*self.0, a, b) {
            (SemiringKind::Bool, Pref::Bool(x), Pref::Bool(y)) => from_ordering(x.cmp(y)),
            (SemiringKind::Weighted, Pref::Weight(x), Pref::Weight(y)) => from_ordering(y.cmp(x)),
            (SemiringKind::Prob, Pref::Prob(x), Pref::Prob(y)) => from_ordering(x.cmp(y)),
            (SemiringKind::Set(_), Pref::Set(x), Pref::Set(y)) => {
                if x == y {
                    Equal
                } else if x.is_subset(y) {
                    Less
                } else if y.is_subset(x) {
                    Greater
                } else {
                    Incomparable
                }
            }
            (SemiringKind::Product(l, r) | SemiringKind::Join(l, r), Pref::Pair(a1, a2), Pref::Pair(b1, b2)) => {
                match (l.order(a1, b1), r.order(a2, b2)) {
                    (Equal, o) | (o, Equal) => o,
                    (Less, Less) => Less,
                    (Greater, Greater) => Greater,
                    _ => Incomparable,
                }
            }
            (SemiringKind::Lex(l, r), Pref::Pair(a1, a2), Pref::Pair(b1, b2)) => match l.order(a1, b1) {
                Equal => r.order(a2, b2),
                o => o,
            },
            _ => panic!("operands {a} and {b} are not in the carrier of {self}"),
        }
    }
}

fn from_ordering(o: Ordering) -> OrderResult {
    match o {
        Ordering::Less => OrderResult::Less,
        Ordering::Equal => OrderResult::Equal,
        Ordering::Greater => OrderResult::Greater,
    }
}

fn unzip_pairs<'a>(values: &[&'a Pref]) -> (Vec<&'a Pref>, Vec<&'a Pref>) {
    values.iter().filter_map(|v| v.split()).unzip()
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            SemiringKind::Bool => f.write_str("bool"),
            SemiringKind::Weighted => f.write_str("weighted"),
            SemiringKind::Prob => f.write_str("prob"),
            SemiringKind::Set(alphabet) => {
                f.write_str("set{")?;
                for (i, a) in alphabet.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")
            }
            SemiringKind::Product(l, r) => write!(f, "prod({l},{r})"),
            SemiringKind::Join(l, r) => write!(f, "join({l},{r})"),
            SemiringKind::Lex(l, r) => write!(f, "lex({l},{r})"),
        }
    }
}

impl fmt::Debug for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Semiring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The maps this crate knows how to build between semirings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HomKind {
    Identity,
    /// `⊤ ↦ 1`, `⊥ ↦ 0` from the boolean semiring.
    EmbedBool,
    /// `h_L`: `e ↦ ⟨e, 1⟩`, zero to the zero pair.
    InjectLeft,
    /// `h_R`: `e ↦ ⟨1, e⟩`, zero to the zero pair.
    InjectRight,
    /// The inclusion of a join semiring into the full product.
    JoinToProduct,
}

/// A c-semiring homomorphism. Units are checked at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    source: Semiring,
    target: Semiring,
    kind: HomKind,
    order_reflecting: bool,
}

impl Homomorphism {
    fn new(source: Semiring, target: Semiring, kind: HomKind, order_reflecting: bool) -> Result<Self, SemiringError> {
        let h = Homomorphism { source, target, kind, order_reflecting };
        if h.map(&h.source.zero()) != h.target.zero() {
            return Err(SemiringError::NotHomomorphism(format!("zero of {} not mapped to zero", h.source)));
        }
        if h.map(&h.source.one()) != h.target.one() {
            return Err(SemiringError::NotHomomorphism(format!("one of {} not mapped to one", h.source)));
        }
        Ok(h)
    }

    pub fn identity(s: Semiring) -> Self {
        Self::new(s.clone(), s, HomKind::Identity, true).expect("identity preserves units")
    }

    /// The trivial embedding of the boolean semiring into `target`.
    pub fn embed_bool(target: Semiring) -> Self {
        Self::new(Semiring::boolean(), target, HomKind::EmbedBool, true).expect("embedding maps units to units")
    }

    /// `h_L` or `h_R` into `Join(l, r)` or `Lex(l, r)`.
    pub fn canonical_injection(side: Side, l: Semiring, r: Semiring, kind: CompositeKind) -> Result<Self, SemiringError> {
        let target = match kind {
            CompositeKind::Join => Semiring::join(l.clone(), r.clone())?,
            CompositeKind::Lex => Semiring::lex(l.clone(), r.clone())?,
        };
        let (source, hk) = match side {
            Side::Left => (l, HomKind::InjectLeft),
            Side::Right => (r, HomKind::InjectRight),
        };
        Self::new(source, target, hk, true)
    }

    /// The inclusion `Join(l, r) → Product(l, r)`.
    pub fn join_to_product(l: Semiring, r: Semiring) -> Result<Self, SemiringError> {
        let source = Semiring::join(l.clone(), r.clone())?;
        Self::new(source, Semiring::product(l, r), HomKind::JoinToProduct, true)
    }

    pub fn source(&self) -> &Semiring {
        &self.source
    }

    pub fn target(&self) -> &Semiring {
        &self.target
    }

    pub fn kind(&self) -> HomKind {
        self.kind
    }

    pub fn is_order_reflecting(&self) -> bool {
        self.order_reflecting
    }

    /// Applies the map to a source carrier element.
    pub fn apply(&self, a: &Pref) -> Result<Pref, SemiringError> {
        self.source.check(a)?;
        let out = self.map(a);
        self.target.check(&out)?;
        Ok(out)
    }

    pub(crate) fn map(&self, a: &Pref) -> Pref {
        match self.kind {
            HomKind::Identity | HomKind::JoinToProduct => a.clone(),
            HomKind::EmbedBool => match a {
                Pref::Bool(true) => self.target.one(),
                _ => self.target.zero(),
            },
            HomKind::InjectLeft => {
                let (_, r) = self.target.operands().expect("composite target");
                if self.source.is_zero(a) {
                    self.target.zero()
                } else {
                    Pref::pair(a.clone(), r.one())
                }
            }
            HomKind::InjectRight => {
                let (l, _) = self.target.operands().expect("composite target");
                if self.source.is_zero(a) {
                    self.target.zero()
                } else {
                    Pref::pair(l.one(), a.clone())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_rational;

    fn w(n: i64) -> Pref {
        Pref::weight(n)
    }

    fn p(text: &str) -> Pref {
        Pref::Prob(parse_rational(text).unwrap())
    }

    fn ww() -> (Semiring, Semiring) {
        (Semiring::weighted(), Semiring::weighted())
    }

    #[test]
    fn big_plus_examples() {
        let wsr = Semiring::weighted();
        assert_eq!(wsr.big_plus([&w(3), &w(5)]).unwrap(), w(3));
        let prob = Semiring::prob();
        assert_eq!(prob.big_plus([]).unwrap(), prob.zero());
        let lex = Semiring::lex(wsr.clone(), wsr.clone()).unwrap();
        let vals = [Pref::pair(w(1), w(7)), Pref::pair(w(2), w(0)), Pref::pair(w(1), w(4))];
        assert_eq!(lex.big_plus(vals.iter()).unwrap(), Pref::pair(w(1), w(4)));
        let vals = [Pref::pair(w(1), w(9)), Pref::pair(w(2), w(0))];
        assert_eq!(lex.big_plus(vals.iter()).unwrap(), Pref::pair(w(1), w(9)));
    }

    #[test]
    fn times_examples() {
        assert_eq!(Semiring::prob().times(&p("0.9"), &p("0.4")).unwrap(), p("0.36"));
        let wsr = Semiring::weighted();
        assert_eq!(wsr.times(&w(2), &wsr.zero()).unwrap(), Pref::infinity());
        let s = Semiring::set(["a", "b", "c"]).unwrap();
        assert_eq!(s.times(&Pref::set(["a", "b"]), &Pref::set(["b", "c"])).unwrap(), Pref::set(["b"]));
    }

    #[test]
    fn carrier_violations_are_reported() {
        let s = Semiring::set(["a", "b"]).unwrap();
        assert!(matches!(s.times(&Pref::set(["z"]), &Pref::set(["a"])), Err(SemiringError::CarrierViolation { .. })));
        assert!(Semiring::prob().check(&p("1.5")).is_err());
        assert!(Semiring::weighted().check(&w(-1)).is_err());
        assert!(Semiring::weighted().check(&Pref::Bool(true)).is_err());
    }

    #[test]
    fn compare_examples() {
        let s = Semiring::set(["a", "b"]).unwrap();
        assert_eq!(s.compare(&Pref::set(["a"]), &Pref::set(["b"])).unwrap(), OrderResult::Incomparable);
        assert_eq!(Semiring::weighted().compare(&w(5), &w(3)).unwrap(), OrderResult::Less);
        let (l, r) = ww();
        let join = Semiring::join(l, r).unwrap();
        assert_eq!(
            join.compare(&Pref::pair(w(1), w(5)), &Pref::pair(w(2), w(3))).unwrap(),
            OrderResult::Incomparable
        );
    }

    #[test]
    fn cancellativity_examples() {
        assert!(!Semiring::weighted().is_cancellative(&Pref::infinity()).unwrap());
        assert!(Semiring::prob().is_cancellative(&p("0.5")).unwrap());
        let s = Semiring::set(["a", "b"]).unwrap();
        assert!(!s.is_cancellative(&Pref::set(["a"])).unwrap());
        assert!(s.is_cancellative(&Pref::set(["a", "b"])).unwrap());
    }

    #[test]
    fn join_construction() {
        let (l, r) = ww();
        let join = Semiring::join(l, r).unwrap();
        assert_eq!(join.zero(), Pref::pair(Pref::infinity(), Pref::infinity()));
        assert_eq!(join.one(), Pref::pair(w(0), w(0)));

        let pw = Semiring::join(Semiring::prob(), Semiring::weighted()).unwrap();
        assert!(!pw.contains(&Pref::pair(p("0.5"), Pref::infinity())));
        assert!(pw.contains(&Pref::pair(p("0.5"), w(2))));

        let err = Semiring::join(Semiring::set(["a", "b"]).unwrap(), Semiring::weighted()).unwrap_err();
        assert!(matches!(err, SemiringError::NotCancellative { side: Side::Left, .. }));
        let err = Semiring::lex(Semiring::weighted(), Semiring::product(Semiring::prob(), Semiring::prob())).unwrap_err();
        assert!(matches!(err, SemiringError::NotCancellative { side: Side::Right, .. }));
    }

    #[test]
    fn lex_order() {
        let (l, r) = ww();
        let lex = Semiring::lex(l, r).unwrap();
        assert_eq!(lex.compare(&Pref::pair(w(2), w(5)), &Pref::pair(w(2), w(3))).unwrap(), OrderResult::Less);
        assert_eq!(lex.compare(&Pref::pair(w(1), w(9)), &Pref::pair(w(2), w(0))).unwrap(), OrderResult::Greater);
        // the restricted carrier: a non-cancellative first component forces zero
        assert!(lex.contains(&Pref::pair(Pref::infinity(), Pref::infinity())));
        assert!(!lex.contains(&Pref::pair(Pref::infinity(), w(3))));
        assert!(lex.contains(&Pref::pair(w(3), Pref::infinity())));
    }

    #[test]
    fn product_examples() {
        let pw = Semiring::product(Semiring::prob(), Semiring::weighted());
        assert_eq!(
            pw.times(&Pref::pair(p("0.5"), w(2)), &Pref::pair(p("0.5"), w(3))).unwrap(),
            Pref::pair(p("0.25"), w(5))
        );
        let bb = Semiring::product(Semiring::boolean(), Semiring::boolean());
        assert_eq!(
            bb.compare(&Pref::pair(Pref::Bool(true), Pref::Bool(false)), &Pref::pair(Pref::Bool(false), Pref::Bool(true)))
                .unwrap(),
            OrderResult::Incomparable
        );
        let wp = Semiring::product(Semiring::weighted(), Semiring::prob());
        assert_eq!(wp.one(), Pref::pair(w(0), p("1")));
        assert!(!wp.is_cancellative_semiring());
    }

    #[test]
    fn canonical_injections() {
        let (l, r) = ww();
        let hl = Homomorphism::canonical_injection(Side::Left, l.clone(), r.clone(), CompositeKind::Join).unwrap();
        assert_eq!(hl.apply(&w(3)).unwrap(), Pref::pair(w(3), w(0)));
        let hr = Homomorphism::canonical_injection(Side::Right, l, r, CompositeKind::Lex).unwrap();
        assert_eq!(hr.apply(&Pref::infinity()).unwrap(), Pref::pair(Pref::infinity(), Pref::infinity()));
        let hl =
            Homomorphism::canonical_injection(Side::Left, Semiring::prob(), Semiring::weighted(), CompositeKind::Lex)
                .unwrap();
        assert_eq!(hl.apply(&p("0.9")).unwrap(), Pref::pair(p("0.9"), w(0)));
        assert!(hl.is_order_reflecting());
        assert!(Homomorphism::canonical_injection(
            Side::Left,
            Semiring::set(["a", "b"]).unwrap(),
            Semiring::weighted(),
            CompositeKind::Join
        )
        .is_err());
    }

    #[test]
    fn apply_hom_examples() {
        let id = Homomorphism::identity(Semiring::weighted());
        assert_eq!(id.apply(&w(7)).unwrap(), w(7));
        let emb = Homomorphism::embed_bool(Semiring::weighted());
        assert_eq!(emb.apply(&Pref::Bool(true)).unwrap(), w(0));
        assert_eq!(emb.apply(&Pref::Bool(false)).unwrap(), Pref::infinity());
        let (l, r) = ww();
        let jp = Homomorphism::join_to_product(l, r).unwrap();
        assert_eq!(jp.apply(&Pref::pair(w(2), w(3))).unwrap(), Pref::pair(w(2), w(3)));
        assert!(matches!(emb.apply(&w(1)), Err(SemiringError::CarrierViolation { .. })));
    }

    #[test]
    fn totality() {
        let (l, r) = ww();
        assert!(Semiring::lex(l.clone(), r.clone()).unwrap().is_total());
        assert!(!Semiring::join(l, r).unwrap().is_total());
        assert!(!Semiring::set(["a", "b"]).unwrap().is_total());
    }
}
