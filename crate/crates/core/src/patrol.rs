//! The patrolling-agent model: an agent walking a path of `K` positions,
//! straying up to `L` steps sideways, and recharging a battery of capacity
//! `M` at a station once its energy drops below `ell`.
//!
//! Every builder returns a validated automaton. Constraint automata are built
//! over the boolean semiring and lifted with `embed_bool` when composed.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::automata::{self, Automaton, AutomatonError, StateId, Transition};
use crate::data::{Port, Symbol};
use crate::dsl::{
    self, CompExpr, CompOp, ComposeDecl, Document, DomainDecl, HomDecl, HomExpr, SemiringDecl, SemiringExpr,
    SemiringExprKind,
};
use crate::expr::{CmpOp, Expr};
use crate::scsp::{Domain, Scsp, ScspError};
use crate::semiring::{Homomorphism, OrderResult, Pref, Semiring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatrolError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("invalid preferences: {0}")]
    Preferences(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Scsp(#[from] ScspError),
}

/// Size of the world and position of the charging station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatrolParams {
    /// Path length, at least 2.
    pub k: i64,
    /// Maximal deviation from the path, at least 1.
    pub l: i64,
    /// Battery capacity, at least 1.
    pub m: i64,
    /// Recharge threshold, in `1..=m`.
    pub ell: i64,
    /// Path position of the charger, in `1..=k`.
    pub cx: i64,
    /// Lateral offset of the charger, in `-l..=l`.
    pub cy: i64,
    /// Only allow turning while on the path.
    pub turn_on_path: bool,
}

impl PatrolParams {
    pub fn new(k: i64, l: i64, m: i64, ell: i64, cx: i64, cy: i64) -> Result<Self, PatrolError> {
        let p = PatrolParams { k, l, m, ell, cx, cy, turn_on_path: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PatrolError> {
        let bad = |msg: String| Err(PatrolError::Params(msg));
        if self.k < 2 {
            return bad(format!("K = {} must be at least 2", self.k));
        }
        if self.l < 1 {
            return bad(format!("L = {} must be at least 1", self.l));
        }
        if self.m < 1 {
            return bad(format!("M = {} must be at least 1", self.m));
        }
        if !(1..=self.m).contains(&self.ell) {
            return bad(format!("ell = {} must lie in 1..={}", self.ell, self.m));
        }
        if !(1..=self.k).contains(&self.cx) {
            return bad(format!("cx = {} must lie in 1..={}", self.cx, self.k));
        }
        if !(-self.l..=self.l).contains(&self.cy) {
            return bad(format!("cy = {} must lie in {}..={}", self.cy, -self.l, self.l));
        }
        Ok(())
    }

    /// Number of states of the full agent, before any reachability pruning.
    pub fn agent_state_count(&self) -> u64 {
        54 * self.k as u64 * (2 * self.l as u64 + 1) * (self.m as u64 + 1)
    }

    /// Domain of a model port.
    pub fn domain(&self, port: &str) -> Domain {
        match port {
            "forward" | "backward" | "stay_P" | "turn" => Domain::range(1, self.k),
            "left" | "right" | "stay_D" => Domain::range(-self.l, self.l),
            _ => Domain::range(0, self.m),
        }
    }

    fn domains(&self) -> BTreeMap<Port, Domain> {
        ALL_PORTS.iter().map(|p| (Port::new(p), self.domain(p))).collect()
    }
}

impl Default for PatrolParams {
    fn default() -> Self {
        PatrolParams { k: 3, l: 1, m: 4, ell: 2, cx: 2, cy: 1, turn_on_path: false }
    }
}

const ALL_PORTS: &[&str] = &[
    "backward", "charge", "discharge", "energy", "forward", "left", "rest", "right", "stay_D", "stay_P", "turn",
];

/// Costs in the weighted semiring; a smaller cost is preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferenceConfig {
    pub turn: i64,
    pub progress: i64,
    pub stay_p: i64,
    pub backtrack: i64,
    pub converge: i64,
    pub stay_d: i64,
    pub diverge: i64,
    pub toward: i64,
    pub stay_r: i64,
    pub away: i64,
}

impl Default for PreferenceConfig {
    fn default() -> Self {
        PreferenceConfig {
            turn: 1,
            progress: 1,
            stay_p: 3,
            backtrack: 5,
            converge: 1,
            stay_d: 2,
            diverge: 3,
            toward: 1,
            stay_r: 2,
            away: 3,
        }
    }
}

impl PreferenceConfig {
    /// Checks the orderings the model relies on, in the semiring order.
    pub fn validate(&self) -> Result<(), PatrolError> {
        let w = Semiring::weighted();
        if let Some((name, _)) = [
            ("turn", self.turn),
            ("progress", self.progress),
            ("stay_P", self.stay_p),
            ("backtrack", self.backtrack),
            ("converge", self.converge),
            ("stay_D", self.stay_d),
            ("diverge", self.diverge),
            ("toward", self.toward),
            ("stay_R", self.stay_r),
            ("away", self.away),
        ]
        .iter()
        .find(|(_, v)| *v < 0)
        {
            return Err(PatrolError::Preferences(format!("cost of {name} is negative")));
        }
        let below = |a: i64, b: i64, what: &str| -> Result<(), PatrolError> {
            match w.compare(&Pref::weight(a), &Pref::weight(b)) {
                Ok(OrderResult::Less) => Ok(()),
                _ => Err(PatrolError::Preferences(format!("{what} must hold"))),
            }
        };
        below(self.backtrack, self.stay_p, "backtrack < stay_P")?;
        below(self.stay_p, self.turn, "stay_P < turn")?;
        below(self.stay_p, self.progress, "stay_P < progress")?;
        below(self.diverge, self.stay_d, "diverge < stay_D")?;
        below(self.stay_d, self.converge, "stay_D < converge")?;
        below(2 * self.stay_d, self.diverge, "stay_D * stay_D < diverge")?;
        below(self.away, self.stay_r, "away < stay_R")?;
        below(self.stay_r, self.toward, "stay_R < toward")?;
        Ok(())
    }
}

/// The lexicographic semiring of the movement preferences.
pub fn patrol_semiring() -> Semiring {
    Semiring::lex(Semiring::weighted(), Semiring::weighted()).expect("weighted is cancellative")
}

/// The semiring of the full agent: return costs paired with patrol preferences.
pub fn agent_semiring() -> Semiring {
    Semiring::product(Semiring::weighted(), patrol_semiring())
}

struct Builder<'p> {
    params: &'p PatrolParams,
    semiring: Semiring,
    states: Vec<StateId>,
    ports: BTreeSet<Port>,
    transitions: Vec<(String, String, BTreeSet<Port>, Expr, Pref)>,
}

impl<'p> Builder<'p> {
    fn new(params: &'p PatrolParams, semiring: Semiring) -> Self {
        Builder { params, semiring, states: Vec::new(), ports: BTreeSet::new(), transitions: Vec::new() }
    }

    fn crisp(params: &'p PatrolParams) -> Self {
        Self::new(params, Semiring::boolean())
    }

    fn state(&mut self, name: &str) -> &mut Self {
        self.states.push(StateId::name(name));
        self
    }

    fn trans(&mut self, from: &str, to: &str, fired: &[&str], guard: Expr, value: Pref) -> &mut Self {
        let fired: BTreeSet<Port> = fired.iter().map(|p| Port::new(p)).collect();
        self.ports.extend(fired.iter().cloned());
        self.transitions.push((from.into(), to.into(), fired, guard, value));
        self
    }

    /// A crisp transition.
    fn on(&mut self, from: &str, to: &str, fired: &[&str], guard: Expr) -> &mut Self {
        let top = self.semiring.one();
        self.trans(from, to, fired, guard, top)
    }

    fn finish(&mut self, init: &str) -> Result<Automaton, PatrolError> {
        let domains = self.params.domains();
        let transitions = self
            .transitions
            .drain(..)
            .map(|(from, to, fired, guard, value)| {
                Ok(Transition {
                    source: StateId::name(&from),
                    label: Scsp::binary(fired, self.semiring.clone(), guard, value, &domains)?,
                    target: StateId::name(&to),
                })
            })
            .collect::<Result<Vec<_>, ScspError>>()?;
        Ok(Automaton::new(
            std::mem::take(&mut self.states),
            StateId::name(init),
            std::mem::take(&mut self.ports),
            self.semiring.clone(),
            &domains,
            transitions,
        )?)
    }
}

fn eq(port: &str, v: i64) -> Expr {
    Expr::port_eq(port, v)
}

fn cmp(port: &str, op: CmpOp, v: i64) -> Expr {
    Expr::cmp(op, Expr::var(port), Expr::int(v))
}

fn w(n: i64) -> Pref {
    Pref::weight(n)
}

fn p(i: i64) -> String {
    format!("p{i}")
}

fn r(i: i64) -> String {
    format!("r_{i}")
}

fn t(i: i64) -> String {
    format!("t_{i}")
}

/// The positions along the path.
pub fn build_path(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let k = params.k;
    let mut b = Builder::crisp(params);
    for i in 1..=k {
        b.state(&p(i));
    }
    for i in 1..=k {
        if i < k {
            b.on(&p(i), &p(i + 1), &["forward"], eq("forward", i + 1));
        }
        if i > 1 {
            b.on(&p(i), &p(i - 1), &["backward"], eq("backward", i - 1));
        }
        b.on(&p(i), &p(i), &["stay_P"], eq("stay_P", i));
    }
    b.finish("p1")
}

/// Turning points at both ends of the path; turning requires staying put.
pub fn build_turn_p(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let k = params.k;
    Builder::crisp(params)
        .state("e")
        .on("e", "e", &["stay_P", "turn"], Expr::and(eq("turn", 1), eq("stay_P", 1)))
        .on("e", "e", &["stay_P", "turn"], Expr::and(eq("turn", k), eq("stay_P", k)))
        .on("e", "e", &["stay_P"], Expr::True)
        .on("e", "e", &[], Expr::True)
        .finish("e")
}

/// Patrolling preferences: progress in the current direction, turn at the end.
///
/// Turning fires `stay_P` together with `turn`, the only combination the
/// turning-point automaton admits.
pub fn build_patrol(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    Builder::new(params, Semiring::weighted())
        .state("q_F")
        .state("q_B")
        .trans("q_F", "q_B", &["stay_P", "turn"], eq("turn", params.k), w(cfg.turn))
        .trans("q_F", "q_F", &["stay_P"], Expr::True, w(cfg.stay_p))
        .trans("q_F", "q_F", &["forward"], Expr::True, w(cfg.progress))
        .trans("q_F", "q_F", &["backward"], Expr::True, w(cfg.backtrack))
        .trans("q_B", "q_F", &["stay_P", "turn"], eq("turn", 1), w(cfg.turn))
        .trans("q_B", "q_B", &["stay_P"], Expr::True, w(cfg.stay_p))
        .trans("q_B", "q_B", &["forward"], Expr::True, w(cfg.backtrack))
        .trans("q_B", "q_B", &["backward"], Expr::True, w(cfg.progress))
        .finish("q_F")
}

/// Lateral offsets `r_-L … r_L` from the path.
pub fn build_stray(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let l = params.l;
    let mut b = Builder::crisp(params);
    for i in -l..=l {
        b.state(&r(i));
    }
    for i in -l..=l {
        if i < l {
            b.on(&r(i), &r(i + 1), &["right"], eq("right", i + 1));
        }
        if i > -l {
            b.on(&r(i), &r(i - 1), &["left"], eq("left", i - 1));
        }
        b.on(&r(i), &r(i), &["stay_D"], eq("stay_D", i));
    }
    b.finish("r_0")
}

/// Forbids turning while moving sideways.
pub fn build_turn_d(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let guard = if params.turn_on_path { eq("stay_D", 0) } else { Expr::True };
    Builder::crisp(params)
        .state("e")
        .on("e", "e", &["stay_D", "turn"], guard)
        .on("e", "e", &["stay_D"], Expr::True)
        .on("e", "e", &[], Expr::True)
        .finish("e")
}

/// Preference to stay on, or return to, the path.
pub fn build_center(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    let (conv, stay, div) = (w(cfg.converge), w(cfg.stay_d), w(cfg.diverge));
    Builder::new(params, Semiring::weighted())
        .state("s_L")
        .state("s_T")
        .state("s_R")
        .trans("s_L", "s_L", &["left"], Expr::True, div.clone())
        .trans("s_L", "s_L", &["right"], cmp("right", CmpOp::Lt, 0), conv.clone())
        .trans("s_L", "s_T", &["right"], eq("right", 0), conv.clone())
        .trans("s_L", "s_L", &["stay_D"], Expr::True, stay.clone())
        .trans("s_T", "s_R", &["right"], eq("right", 1), div.clone())
        .trans("s_T", "s_L", &["left"], eq("left", -1), div.clone())
        .trans("s_T", "s_T", &["stay_D"], Expr::True, stay.clone())
        .trans("s_R", "s_R", &["left"], cmp("left", CmpOp::Gt, 0), conv.clone())
        .trans("s_R", "s_T", &["left"], eq("left", 0), conv)
        .trans("s_R", "s_R", &["right"], Expr::True, div)
        .trans("s_R", "s_R", &["stay_D"], Expr::True, stay)
        .finish("s_T")
}

/// Penalizes standing still on both axes at once.
pub fn build_drive(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    let s = Semiring::weighted();
    let one = s.one();
    Builder::new(params, s)
        .state("e")
        .trans("e", "e", &["stay_P", "stay_D"], Expr::True, w(cfg.stay_d))
        .trans("e", "e", &["stay_P"], Expr::True, one.clone())
        .trans("e", "e", &["stay_D"], Expr::True, one.clone())
        .trans("e", "e", &[], Expr::True, one)
        .finish("e")
}

/// Energy levels `t_0 … t_M`, starting full.
pub fn build_battery(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let m = params.m;
    let mut b = Builder::crisp(params);
    for i in 0..=m {
        b.state(&t(i));
    }
    for i in 0..=m {
        if i < m {
            b.on(&t(i), &t(i + 1), &["charge"], eq("charge", i + 1));
        }
        if i > 0 {
            b.on(&t(i), &t(i - 1), &["discharge"], eq("discharge", i - 1));
        }
        b.on(&t(i), &t(i), &["rest"], eq("rest", i));
    }
    b.finish(&t(m))
}

/// Every move costs one unit of energy.
pub fn build_usage(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let mut b = Builder::crisp(params);
    b.state("e");
    for fired in [
        &["forward", "discharge"][..],
        &["backward", "discharge"],
        &["right", "discharge"],
        &["left", "discharge"],
        &["right", "forward", "discharge"],
        &["right", "backward", "discharge"],
        &["left", "forward", "discharge"],
        &["left", "backward", "discharge"],
        &["turn", "discharge"],
        &[],
    ] {
        b.on("e", "e", fired, Expr::True);
    }
    b.finish("e")
}

/// The charging station at `(cx, cy)`.
pub fn build_charge(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let at = Expr::and(eq("stay_P", params.cx), eq("stay_D", params.cy));
    Builder::crisp(params)
        .state("e")
        .on("e", "e", &["stay_P", "stay_D", "charge"], at)
        .on("e", "e", &["stay_P", "stay_D"], Expr::True)
        .on("e", "e", &["stay_P"], Expr::True)
        .on("e", "e", &["stay_D"], Expr::True)
        .on("e", "e", &[], Expr::True)
        .finish("e")
}

/// Publishes the new energy level on `energy`.
pub fn build_energy(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let same = |a: &str| Expr::eq(Expr::var("energy"), Expr::var(a));
    Builder::crisp(params)
        .state("e")
        .on("e", "e", &["energy", "charge"], same("charge"))
        .on("e", "e", &["energy", "discharge"], same("discharge"))
        .on("e", "e", &["energy", "rest"], same("rest"))
        .on("e", "e", &[], Expr::True)
        .finish("e")
}

/// One axis of the way back to the charger: whether the agent is below, at
/// or above `target`, moving up along `up` and down along `down`.
/// Transitions toward the target come first, then staying, then moving away.
fn return_axis(
    params: &PatrolParams,
    cfg: &PreferenceConfig,
    prefix: &str,
    (down, stay, up): (&str, &str, &str),
    target: i64,
    start: i64,
) -> Result<Automaton, PatrolError> {
    let (lo, at, hi) = (format!("{prefix}_lo"), format!("{prefix}_at"), format!("{prefix}_hi"));
    let (toward, still, away) = (w(cfg.toward), w(cfg.stay_r), w(cfg.away));
    let init = match start.cmp(&target) {
        std::cmp::Ordering::Less => &lo,
        std::cmp::Ordering::Equal => &at,
        std::cmp::Ordering::Greater => &hi,
    };
    Builder::new(params, Semiring::weighted())
        .state(&lo)
        .state(&at)
        .state(&hi)
        .trans(&lo, &lo, &[up], cmp(up, CmpOp::Lt, target), toward.clone())
        .trans(&lo, &at, &[up], eq(up, target), toward.clone())
        .trans(&lo, &lo, &[stay], Expr::True, still.clone())
        .trans(&lo, &lo, &[down], Expr::True, away.clone())
        .trans(&at, &at, &[stay], Expr::True, still.clone())
        .trans(&at, &hi, &[up], Expr::True, away.clone())
        .trans(&at, &lo, &[down], Expr::True, away.clone())
        .trans(&hi, &hi, &[down], cmp(down, CmpOp::Gt, target), toward.clone())
        .trans(&hi, &at, &[down], eq(down, target), toward)
        .trans(&hi, &hi, &[stay], Expr::True, still)
        .trans(&hi, &hi, &[up], Expr::True, away)
        .finish(init)
}

/// Preferences for heading to the charger: one three-state automaton per axis.
pub fn build_return(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    Ok(automata::product(&build_return_x(params, cfg)?, &build_return_y(params, cfg)?)?)
}

/// The path axis of [`build_return`].
pub fn build_return_x(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    return_axis(params, cfg, "x", ("backward", "stay_P", "forward"), params.cx, 1)
}

/// The lateral axis of [`build_return`].
pub fn build_return_y(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    return_axis(params, cfg, "y", ("left", "stay_D", "right"), params.cy, 0)
}

/// Chooses the preference regime from the energy level after each step.
pub fn build_select(params: &PatrolParams) -> Result<Automaton, PatrolError> {
    let s = agent_semiring();
    let (ret, pat) = (Semiring::weighted(), patrol_semiring());
    let one = s.one();
    Builder::new(params, s)
        .state("e")
        .trans("e", "e", &["energy"], cmp("energy", CmpOp::Ge, params.ell), Pref::pair(ret.zero(), pat.one()))
        .trans("e", "e", &["energy"], cmp("energy", CmpOp::Lt, params.ell), Pref::pair(ret.one(), pat.zero()))
        .trans("e", "e", &[], Expr::True, one)
        .finish("e")
}

/// The named pieces of the agent, in a fixed order.
pub fn leaf_automata(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Vec<(&'static str, Automaton)>, PatrolError> {
    params.validate()?;
    cfg.validate()?;
    Ok(vec![
        ("Path", build_path(params)?),
        ("TurnP", build_turn_p(params)?),
        ("Patrol", build_patrol(params, cfg)?),
        ("Stray", build_stray(params)?),
        ("TurnD", build_turn_d(params)?),
        ("Center", build_center(params, cfg)?),
        ("Drive", build_drive(params, cfg)?),
        ("ReturnX", build_return_x(params, cfg)?),
        ("ReturnY", build_return_y(params, cfg)?),
        ("Battery", build_battery(params)?),
        ("Usage", build_usage(params)?),
        ("Charge", build_charge(params)?),
        ("Energy", build_energy(params)?),
        ("Select", build_select(params)?),
    ])
}

/// The composition expressions, in dependency order.
pub fn compositions() -> Vec<(&'static str, CompExpr)> {
    let n = CompExpr::name;
    let bw = |a: &str| CompExpr::apply("bw", n(a));
    vec![
        ("Move", CompExpr::op(CompOp::Product, vec![bw("Path"), bw("TurnP"), n("Patrol")])),
        ("Deviate", CompExpr::op(CompOp::Product, vec![bw("Stray"), bw("TurnD"), n("Center"), n("Drive")])),
        ("Return", CompExpr::op(CompOp::Product, vec![n("ReturnX"), n("ReturnY")])),
        (
            "Resources",
            CompExpr::op(CompOp::Product, vec![n("Return"), bw("Battery"), bw("Usage"), bw("Charge"), bw("Energy")]),
        ),
        ("Steer", CompExpr::op(CompOp::Lex, vec![n("Move"), n("Deviate")])),
        ("Position", CompExpr::op(CompOp::Join, vec![n("Resources"), n("Steer")])),
        // The selector goes last: it has one state, so only the transition
        // order changes, and that order lets the per-axis preferences of the
        // way back break ties between the two regimes.
        ("Agent", CompExpr::op(CompOp::Product, vec![CompExpr::apply("h", n("Position")), n("Select")])),
    ]
}

/// All automata of the model, leaves and compositions, by name.
pub struct PatrolModel {
    pub automata: BTreeMap<&'static str, Automaton>,
}

impl PatrolModel {
    pub fn build(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Self, PatrolError> {
        let mut automata: BTreeMap<&'static str, Automaton> = leaf_automata(params, cfg)?.into_iter().collect();
        let w = Semiring::weighted();
        let bw = Homomorphism::embed_bool(w.clone());
        let h = Homomorphism::join_to_product(w, patrol_semiring()).expect("both sides cancellative");
        for (name, expr) in compositions() {
            let a = eval(&automata, &bw, &h, &expr)?;
            automata.insert(name, a);
        }
        Ok(PatrolModel { automata })
    }

    pub fn get(&self, name: &str) -> &Automaton {
        &self.automata[name]
    }
}

fn eval(env: &BTreeMap<&str, Automaton>, bw: &Homomorphism, h: &Homomorphism, e: &CompExpr) -> Result<Automaton, PatrolError> {
    use crate::dsl::CompExprKind;
    Ok(match &e.kind {
        CompExprKind::Ref(n) => env[n.as_str()].clone(),
        CompExprKind::Apply(f, arg) => {
            let hom = if f.as_str() == "bw" { bw } else { h };
            eval(env, bw, h, arg)?.lift_hom(hom)?
        }
        CompExprKind::Op(op, args) => {
            let mut acc = eval(env, bw, h, &args[0])?;
            for arg in &args[1..] {
                let next = eval(env, bw, h, arg)?;
                acc = match op {
                    CompOp::Product => automata::product(&acc, &next)?,
                    CompOp::Join => automata::join_compose(&acc, &next)?,
                    CompOp::Lex => automata::lex_compose(&acc, &next)?,
                };
            }
            acc
        }
    })
}

/// `Path ⊗ TurnP ⊗ Patrol`, over the weighted semiring.
pub fn build_move(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    let bw = Homomorphism::embed_bool(Semiring::weighted());
    let a = automata::product(&build_path(params)?.lift_hom(&bw)?, &build_turn_p(params)?.lift_hom(&bw)?)?;
    Ok(automata::product(&a, &build_patrol(params, cfg)?)?)
}

/// `Stray ⊗ TurnD ⊗ Center ⊗ Drive`, over the weighted semiring.
pub fn build_deviate(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    let bw = Homomorphism::embed_bool(Semiring::weighted());
    let a = automata::product(&build_stray(params)?.lift_hom(&bw)?, &build_turn_d(params)?.lift_hom(&bw)?)?;
    let a = automata::product(&a, &build_center(params, cfg)?)?;
    Ok(automata::product(&a, &build_drive(params, cfg)?)?)
}

/// The full agent.
pub fn build_agent(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Automaton, PatrolError> {
    let mut model = PatrolModel::build(params, cfg)?;
    Ok(model.automata.remove("Agent").expect("agent is composed last"))
}

/// The whole model as a document: leaf automata written out, compositions
/// as expressions. Elaborating `Agent` gives [`build_agent`].
pub fn patrol_document(params: &PatrolParams, cfg: &PreferenceConfig) -> Result<Document, PatrolError> {
    let mut doc = Document::default();
    let named = |n: &str| SemiringExpr::new(SemiringExprKind::Named(Symbol::new(n)));
    let weighted = SemiringExpr::new(SemiringExprKind::Weighted);
    let lex = SemiringExpr::new(SemiringExprKind::Lex(Box::new(named("W")), Box::new(named("W"))));
    let sel = SemiringExpr::new(SemiringExprKind::Prod(Box::new(named("W")), Box::new(named("LW"))));
    for (name, expr) in [("W", weighted), ("LW", lex), ("Sel", sel)] {
        doc.semirings.insert(Symbol::new(name), SemiringDecl { name: Symbol::new(name), expr, span: Default::default() });
    }
    for (name, expr) in [("bw", HomExpr::EmbedBool(named("W"))), ("h", HomExpr::JoinToProduct(named("W"), named("LW")))] {
        doc.homs.insert(Symbol::new(name), HomDecl { name: Symbol::new(name), expr, span: Default::default() });
    }
    for (port, values) in params.domains() {
        doc.domains.insert(port.clone(), DomainDecl { port, values, span: Default::default() });
    }
    let (w, s) = (Semiring::weighted(), agent_semiring());
    for (name, a) in leaf_automata(params, cfg)? {
        let mut decl = dsl::automaton_decl(name, &a).map_err(|d| PatrolError::Params(d.to_string()))?;
        decl.domains.clear();
        if a.semiring() == &w {
            decl.semiring = named("W");
        } else if a.semiring() == &s {
            decl.semiring = named("Sel");
        }
        doc.automata.insert(decl.name.clone(), decl);
    }
    for (name, expr) in compositions() {
        doc.compositions.insert(Symbol::new(name), ComposeDecl { name: Symbol::new(name), expr, span: Default::default() });
    }
    Ok(doc)
}
