use criterion::{criterion_group, criterion_main, Criterion};
use noether_bench::{expansion_input, henon_heiles, lifted_rotation};
use noether_core::dynamics::{euler_lagrange, integrate, SimulationSetup};
use noether_core::expr::{normalize, parse, ZeroTestConfig};
use noether_core::noether::verify;
use noether_core::solver::solve;
use noether_core::AnsatzSpec;

fn bench_normalize(c: &mut Criterion) {
    let l = henon_heiles();
    let e = expansion_input(l.ctx());
    c.bench_function("normalize/expansion", |b| b.iter(|| normalize(&e).unwrap()));
}

fn bench_verify(c: &mut Criterion) {
    let l = henon_heiles();
    let g = lifted_rotation(&l);
    let cfg = ZeroTestConfig::default();
    c.bench_function("verify/henon_heiles_rotation", |b| b.iter(|| verify(&l, &g, 1e-10, &cfg).unwrap()));
}

fn bench_solve(c: &mut Criterion) {
    let l = henon_heiles();
    let basis = ["1", "sin(t)", "cos(t)"].iter().map(|s| parse(s, l.ctx()).unwrap()).collect();
    let spec = AnsatzSpec::new(basis, 1);
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("henon_heiles_trig", |b| b.iter(|| solve(&l, &spec).unwrap()));
    group.finish();
}

fn bench_rk4(c: &mut Criterion) {
    let l = henon_heiles();
    let eom = euler_lagrange(&l);
    let setup = SimulationSetup { initial: vec![0.1, 0.1, 0.0, 0.0], t_start: 0.0, t_end: 10.0, dt: 1e-3 };
    c.bench_function("rk4/henon_heiles_10k_steps", |b| b.iter(|| integrate(&eom, &setup, 0.01).unwrap()));
}

criterion_group!(benches, bench_normalize, bench_verify, bench_solve, bench_rk4);
criterion_main!(benches);
