//! Sequential against rayon-backed execution for the data-parallel kernels:
//! solving, product construction and exploring the patrol agent.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sca_core::automata::{self, Automaton};
use sca_core::execution::{self, Explorer};
use sca_core::patrol::{self, PatrolParams, PreferenceConfig};
use sca_core::random;
use sca_core::{solve_with, Exec, Semiring};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_solve(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lex = Semiring::lex(Semiring::weighted(), Semiring::weighted()).unwrap();
    // Dense problems: every variable has six values, so the grid has 6^6 points.
    let problems: Vec<_> = std::iter::repeat_with(|| random::scsp(&mut rng, &lex, 6, 6, 6))
        .filter(|p| p.variables().len() == 6 && p.domains().values().all(|d| d.len() >= 4))
        .take(4)
        .collect();
    let mut g = c.benchmark_group("solve");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| problems.iter().map(|p| solve_with(p, exec).unwrap().len()).sum::<usize>())
        });
    }
    g.finish();
}

fn patrol_operands() -> (Automaton, Automaton) {
    let params = PatrolParams::new(4, 2, 3, 2, 2, 1).unwrap();
    let cfg = PreferenceConfig::default();
    let m = patrol::PatrolModel::build(&params, &cfg).unwrap();
    (m.get("Resources").clone(), m.get("Steer").clone())
}

fn bench_product(c: &mut Criterion) {
    let (res, steer) = patrol_operands();
    let j = Semiring::join(res.semiring().clone(), steer.semiring().clone()).unwrap();
    let hl = sca_core::Homomorphism::canonical_injection(sca_core::semiring::Side::Left, res.semiring().clone(), steer.semiring().clone(), sca_core::semiring::CompositeKind::Join).unwrap();
    let hr = sca_core::Homomorphism::canonical_injection(sca_core::semiring::Side::Right, res.semiring().clone(), steer.semiring().clone(), sca_core::semiring::CompositeKind::Join).unwrap();
    let (l, r) = (res.lift_hom(&hl).unwrap(), steer.lift_hom(&hr).unwrap());
    assert_eq!(l.semiring(), &j);
    let mut g = c.benchmark_group("product");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| automata::product_with(&l, &r, exec).unwrap().transitions().len())
        });
    }
    g.finish();
}

fn bench_enabled(c: &mut Criterion) {
    let params = PatrolParams::new(3, 1, 4, 2, 2, 1).unwrap();
    let agent = patrol::build_agent(&params, &PreferenceConfig::default()).unwrap();
    let states: Vec<_> = execution::reachable(&agent).unwrap().states.into_iter().take(30).collect();
    let mut g = c.benchmark_group("enabled");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                // A fresh explorer each time so every label is solved again.
                let ex = Explorer::with_exec(&agent, exec);
                states.iter().map(|q| ex.enabled(q).unwrap().len()).sum::<usize>()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_solve, bench_product, bench_enabled);
criterion_main!(benches);
