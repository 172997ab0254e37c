//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use common::Check;
use sca_core::automata::{self, StateId};
use sca_core::dsl;
use sca_core::execution::{self, Policy, Tiebreak};
use sca_core::patrol::{self, PatrolParams, PreferenceConfig};
use sca_core::random::standard_semirings;
use sca_core::{Assignment, OrderResult, Port, Pref, Semiring};

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn semiring_laws() -> Check {
    for (i, s) in standard_semirings().iter().enumerate() {
        common::semiring_laws(s, 1000, 100 + i as u64)?;
    }
    Ok(())
}

fn state_counts() -> Check {
    for k in [2, 3, 4] {
        for l in [1, 2] {
            for m in [1, 2] {
                let p = PatrolParams::new(k, l, m, 1, 1, 0).map_err(err)?;
                let a = patrol::build_agent(&p, &PreferenceConfig::default()).map_err(err)?;
                let want = 54 * (k * (2 * l + 1) * (m + 1)) as usize;
                ensure!(a.states().len() == want, "K={k} L={l} M={m}: {} states, expected {want}", a.states().len());
            }
        }
    }
    Ok(())
}

fn move_kind(fired: &Assignment) -> &'static str {
    ["turn", "forward", "backward"].into_iter().find(|p| fired.get(p).is_some()).unwrap_or("stay")
}

/// The unique preference of `A_move ▷ A_deviate` leaving `source` by firing
/// exactly `fired`.
fn steer_pref(params: &PatrolParams, source: &[&str], fired: &[&str]) -> Result<Pref, String> {
    let cfg = PreferenceConfig::default();
    let a = automata::lex_compose(
        &patrol::build_move(params, &cfg).map_err(err)?,
        &patrol::build_deviate(params, &cfg).map_err(err)?,
    )
    .map_err(err)?;
    let from = StateId::Tuple(source.iter().map(|s| StateId::name(s)).collect());
    let fired: BTreeSet<Port> = fired.iter().map(|p| Port::new(p)).collect();
    let mut prefs = BTreeSet::new();
    for t in a.transitions().iter().filter(|t| t.source == from && *t.fired() == fired) {
        prefs.extend(sca_core::solve(&t.label).map_err(err)?.into_iter().map(|s| s.preference));
    }
    ensure!(prefs.len() == 1, "{from} firing {fired:?}: expected one preference, got {prefs:?}");
    Ok(prefs.pop_first().unwrap())
}

fn patrol_behavior() -> Check {
    let cfg = PreferenceConfig::default();
    let greedy = Policy::GreedyGlobal { tiebreak: Tiebreak::TransitionOrder, seed: 0 };
    for k in [3i64, 4, 5] {
        let params = PatrolParams::new(k, 1, 1, 1, 1, 0).map_err(err)?;
        let a = patrol::build_move(&params, &cfg).map_err(err)?;
        let trace = execution::run(&a, greedy, 4 * k as usize).map_err(err)?;
        let kinds: Vec<&str> = trace.steps.iter().map(|s| move_kind(&s.fired)).collect();
        let mut lap = vec!["forward"; k as usize - 1];
        lap.push("turn");
        lap.extend(vec!["backward"; k as usize - 1]);
        lap.push("turn");
        ensure!(lap.len() == 2 * k as usize, "lap length");
        let want: Vec<&str> = lap.iter().cycle().take(kinds.len()).copied().collect();
        ensure!(!trace.deadlocked && kinds == want, "K={k}: move trace {kinds:?}");
    }

    let lex = Semiring::lex(Semiring::weighted(), Semiring::weighted()).map_err(err)?;
    let params = PatrolParams::new(3, 1, 1, 1, 1, 0).map_err(err)?;
    let one = steer_pref(&params, &["p1", "q_F", "r_-1", "s_L"], &["forward", "right"])?;
    let two = steer_pref(&params, &["p1", "q_F", "r_-1", "s_L"], &["forward", "stay_D"])?;
    ensure!(lex.compare(&two, &one).map_err(err)? == OrderResult::Less, "(1) {one} is not preferred over (2) {two}");
    let three = steer_pref(&params, &["p2", "q_B", "r_0", "s_T"], &["stay_P", "right"])?;
    let four = steer_pref(&params, &["p2", "q_B", "r_0", "s_T"], &["stay_P", "stay_D"])?;
    ensure!(lex.compare(&four, &three).map_err(err)? == OrderResult::Less, "(3) {three} is not preferred over (4) {four}");

    let params = PatrolParams::new(3, 1, 4, 2, 2, 1).map_err(err)?;
    let agent = patrol::build_agent(&params, &cfg).map_err(err)?;
    let trace = execution::run(&agent, greedy, 200).map_err(err)?;
    ensure!(!trace.deadlocked && trace.steps.len() == 200, "agent deadlocked after {} steps", trace.steps.len());
    let charges = trace.steps.iter().filter(|s| s.fired.get("charge").is_some()).count();
    ensure!(charges >= 1, "agent never charged");
    Ok(())
}

fn dsl_round_trip() -> Check {
    let params = PatrolParams::new(3, 1, 4, 2, 2, 1).map_err(err)?;
    let doc = patrol::patrol_document(&params, &PreferenceConfig::default()).map_err(err)?;
    let text = dsl::serialize(&doc);
    let back = dsl::parse(&text).map_err(|d| format!("{d:?}"))?;
    ensure!(back == doc, "patrol document changed in a round trip");

    let fig1 = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/fig1.sca")).map_err(err)?;
    let doc = dsl::parse(&fig1).map_err(|d| format!("{d:?}"))?;
    ensure!(dsl::parse(&dsl::serialize(&doc)).map_err(|d| format!("{d:?}"))? == doc, "fig1 changed in a round trip");

    let dir = tempfile::tempdir().map_err(err)?;
    let model = dir.path().join("patrol.sca");
    let trace = dir.path().join("trace.txt");
    let sca = |args: &[&std::ffi::OsStr]| -> Check {
        let out = Command::new(env!("CARGO_BIN_EXE_sca")).args(args).output().map_err(err)?;
        ensure!(out.status.success(), "sca {args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr));
        Ok(())
    };
    sca(&["patrol-gen".as_ref(), "--out".as_ref(), model.as_os_str()])?;
    sca(&["validate".as_ref(), model.as_os_str()])?;
    sca(&["simulate".as_ref(), model.as_os_str(), "--steps".as_ref(), "30".as_ref(), "-q".as_ref(), "--trace-out".as_ref(), trace.as_os_str()])?;
    let lines = std::fs::read_to_string(&trace).map_err(err)?;
    ensure!(lines.lines().count() == 30, "trace has {} lines", lines.lines().count());
    Ok(())
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("semiring laws, 1000 cases per semiring", Box::new(semiring_laws)),
        ("worked problem K peaks at exactly 0.36", Box::new(common::worked_problem_k)),
        ("solver equals the brute-force oracle on 500 problems", Box::new(|| common::solver_matches_oracle(100, 200))),
        ("boolean separation on 200 pairs, weighted counterexample", Box::new(|| common::separation(200, 300))),
        ("injections preserve solutions on 100 problems", Box::new(|| common::hom_preserves_solutions(100, 400))),
        ("composition algebra on 50 triples, prefixes up to 5", Box::new(|| common::composition_algebra(50, 5, 500))),
        ("product matches the classic product on 50 pairs", Box::new(|| common::classic_product_coincides(50, 600))),
        ("agent state count 54K(2L+1)(M+1)", Box::new(state_counts)),
        ("patrol laps, steering order and recharging", Box::new(patrol_behavior)),
        ("DSL round trips and CLI pipeline", Box::new(dsl_round_trip)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("PASS  {name} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
