//! Predicate expressions used by binary soft constraints.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::data::{Assignment, DataValue, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

/// A first-order expression over port variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    True,
    False,
    Const(DataValue),
    Var(Port),
    Neg(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    /// Membership in a literal value set.
    In(Box<Expr>, Vec<DataValue>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is unbound")]
    Unbound(Port),
    #[error("domain violation: {0}")]
    DomainViolation(String),
}

/// Result of evaluating a subexpression.
#[derive(Debug, Clone, PartialEq)]
enum Value {
    Data(DataValue),
    Truth(bool),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Port::new(name))
    }

    pub fn int(i: i64) -> Expr {
        Expr::Const(DataValue::Int(i))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
        Expr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }

    pub fn member(a: Expr, values: Vec<DataValue>) -> Expr {
        Expr::In(Box::new(a), values)
    }

    /// `port = value`.
    pub fn port_eq(port: &str, value: impl Into<DataValue>) -> Expr {
        Expr::eq(Expr::var(port), Expr::Const(value.into()))
    }

    /// Conjunction of all `exprs`; `True` when empty.
    pub fn all(exprs: impl IntoIterator<Item = Expr>) -> Expr {
        exprs
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::True)
    }

    /// Free variables.
    pub fn vars(&self) -> BTreeSet<Port> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Port>) {
        match self {
            Expr::True | Expr::False | Expr::Const(_) => {}
            Expr::Var(p) => {
                out.insert(p.clone());
            }
            Expr::Neg(a) | Expr::Not(a) | Expr::In(a, _) => a.collect_vars(out),
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates the expression as a formula.
    pub fn holds(&self, env: &Assignment) -> Result<bool, EvalError> {
        match self.eval(env)? {
            Value::Truth(b) => Ok(b),
            Value::Data(d) => Err(EvalError::DomainViolation(format!("`{self}` evaluates to the value {d}, not a truth value"))),
        }
    }

    fn data(&self, env: &Assignment) -> Result<DataValue, EvalError> {
        match self.eval(env)? {
            Value::Data(d) => Ok(d),
            Value::Truth(_) => Err(EvalError::DomainViolation(format!("`{self}` is a formula, not a value"))),
        }
    }

    fn number(&self, env: &Assignment) -> Result<BigRational, EvalError> {
        let d = self.data(env)?;
        d.as_rational()
            .ok_or_else(|| EvalError::DomainViolation(format!("arithmetic on atom `{d}`")))
    }

    fn eval(&self, env: &Assignment) -> Result<Value, EvalError> {
        Ok(match self {
            Expr::True => Value::Truth(true),
            Expr::False => Value::Truth(false),
            Expr::Const(d) => Value::Data(d.clone()),
            Expr::Var(p) => Value::Data(env.get(p).cloned().ok_or_else(|| EvalError::Unbound(p.clone()))?),
            Expr::Neg(a) => match a.data(env)? {
                DataValue::Int(i) => Value::Data(match i.checked_neg() {
                    Some(n) => DataValue::Int(n),
                    None => DataValue::rational(-BigRational::from_integer(i.into())),
                }),
                other => Value::Data(DataValue::rational(-a_number(&other)?)),
            },
            Expr::Arith(op, a, b) => {
                let (x, y) = (a.number(env)?, b.number(env)?);
                Value::Data(DataValue::rational(match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                }))
            }
            Expr::Cmp(op, a, b) => {
                let (x, y) = (a.data(env)?, b.data(env)?);
                let ordering_needed = !matches!(op, CmpOp::Eq | CmpOp::Ne);
                if ordering_needed && (!x.is_numeric() || !y.is_numeric()) {
                    return Err(EvalError::DomainViolation(format!("ordering comparison `{self}` on an atom")));
                }
                Value::Truth(match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Ge => x >= y,
                    CmpOp::Gt => x > y,
                })
            }
            Expr::In(a, set) => {
                let x = a.data(env)?;
                Value::Truth(set.contains(&x))
            }
            Expr::Not(a) => Value::Truth(!a.holds(env)?),
            Expr::And(a, b) => Value::Truth(a.holds(env)? && b.holds(env)?),
            Expr::Or(a, b) => Value::Truth(a.holds(env)? || b.holds(env)?),
        })
    }

    /// Binding strength used by the printer and the DSL parser.
    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(..) => 3,
            Expr::Cmp(..) | Expr::In(..) => 4,
            Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 5,
            Expr::Arith(ArithOp::Mul, ..) => 6,
            Expr::Neg(..) => 7,
            Expr::True | Expr::False | Expr::Const(_) | Expr::Var(_) => 8,
        }
    }
}

fn a_number(d: &DataValue) -> Result<BigRational, EvalError> {
    d.as_rational()
        .ok_or_else(|| EvalError::DomainViolation(format!("arithmetic on atom `{d}`")))
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
    if child.precedence() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Writes a data value so the DSL lexer reads it back unchanged.
pub fn write_value(f: &mut fmt::Formatter<'_>, d: &DataValue) -> fmt::Result {
    match d {
        DataValue::Atom(a) => write_quoted(f, a, '"'),
        other => write!(f, "{other}"),
    }
}

/// Writes `s` between `quote` characters, escaping backslashes, the quote and newlines.
pub fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str, quote: char) -> fmt::Result {
    use fmt::Write;
    f.write_char(quote)?;
    for c in s.chars() {
        match c {
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c if c == quote => {
                f.write_char('\\')?;
                f.write_char(c)?;
            }
            c => f.write_char(c)?,
        }
    }
    f.write_char(quote)
}

/// Writes an identifier, in backticks unless it is plain.
pub fn write_ident(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_ident(s) {
        f.write_str(s)
    } else {
        write_quoted(f, s, '`')
    }
}

/// Identifiers the DSL accepts without backticks.
pub fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !crate::dsl::is_keyword(s)
}

impl fmt::Display for Expr {
    /// Prints with the minimal parentheses needed to parse back to the same tree:
    /// binary operators are left-associative, comparisons non-associative.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expr::True => f.write_str("true"),
            Expr::False => f.write_str("false"),
            Expr::Const(d) => match d {
                DataValue::Int(i) if *i < 0 => write!(f, "({i})"),
                DataValue::Rat(r) if r < &BigRational::from_integer(0.into()) => write!(f, "({d})"),
                _ => write_value(f, d),
            },
            Expr::Var(v) => write_ident(f, v),
            Expr::Neg(a) => {
                f.write_str("-")?;
                if matches!(**a, Expr::Const(_)) {
                    write!(f, "({a})")
                } else {
                    write_child(f, a, p)
                }
            }
            Expr::Not(a) => {
                f.write_str("!")?;
                write_child(f, a, 8)
            }
            Expr::Arith(op, a, b) => {
                write_child(f, a, p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, p + 1)
            }
            Expr::Cmp(op, a, b) => {
                write_child(f, a, p + 1)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, p + 1)
            }
            Expr::In(a, set) => {
                write_child(f, a, p + 1)?;
                f.write_str(" in {")?;
                for (i, d) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_value(f, d)?;
                }
                f.write_str("}")
            }
            Expr::And(a, b) => {
                write_child(f, a, p)?;
                f.write_str(" && ")?;
                write_child(f, b, p + 1)
            }
            Expr::Or(a, b) => {
                write_child(f, a, p)?;
                f.write_str(" || ")?;
                write_child(f, b, p + 1)
            }
        }
    }
}
