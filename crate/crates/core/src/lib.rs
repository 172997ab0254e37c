//! Soft constraint automata.
//!
//! The crate is layered bottom-up: [`semiring`] defines preference domains,
//! [`scsp`] and [`solve`] soft constraint problems over them, [`automata`]
//! the automata whose transitions carry such problems, and [`execution`]
//! their runs. [`dsl`] reads and writes the textual model format and
//! [`patrol`] builds the patrolling-agent model.

pub mod data;
pub mod automata;
pub mod dsl;
pub mod execution;
pub mod expr;
pub mod par;
pub mod patrol;
pub mod random;
pub mod scsp;
pub mod semiring;
pub mod solve;

pub use data::{Assignment, DataValue, Port, Symbol};
pub use par::Exec;
pub use scsp::{Constraint, Domain, Scsp, ScspError, Solution};
pub use semiring::{Homomorphism, OrderResult, Pref, Semiring, SemiringError};
pub use solve::{solve, solve_bruteforce, solve_with};
