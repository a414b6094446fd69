use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dicke_rap::{
    dicke_protocol, ess_for_contrast, initial_state, propagate_to_end, wigner_grid,
    IntegratorSettings, SpinSystem,
};

fn passage(c: &mut Criterion) {
    let system = SpinSystem::new(10).unwrap();
    let schedule = dicke_protocol(&system, 0.1, 0.88, 0).unwrap();
    let psi0 = initial_state(&system);
    let settings = IntegratorSettings::default();
    c.bench_function("dicke passage N=10", |b| {
        b.iter(|| propagate_to_end(&system, black_box(&schedule), &psi0, &settings).unwrap())
    });
}

fn ess_target(c: &mut Criterion) {
    let system = SpinSystem::new(100).unwrap();
    c.bench_function("ess target N=100", |b| {
        b.iter(|| ess_for_contrast(&system, black_box(25.0)).unwrap())
    });
}

fn wigner(c: &mut Criterion) {
    let system = SpinSystem::new(10).unwrap();
    let target = ess_for_contrast(&system, 2.5).unwrap();
    c.bench_function("wigner grid N=10 64x128", |b| {
        b.iter(|| wigner_grid(black_box(&target.state), 64, 128).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = passage, ess_target, wigner
}
criterion_main!(kernels);
