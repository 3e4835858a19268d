//! Rayon's global pool against a single-thread pool running the same code.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use swapnet::dynamics::{integrate, DensityState, IntegratorOptions};
use swapnet::graph::{InteractionGraph, SwitchingSchedule};
use swapnet::induced::{max_degree, verify_diagonal_strong_regularity};
use swapnet::laplacian::QuantumLaplacian;
use swapnet::operators::HamiltonianSpec;

fn single_thread() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
}

fn compare<F: Fn() + Sync>(c: &mut Criterion, group: &str, label: usize, work: F) {
    let pool = single_thread();
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", label), &label, |b, _| b.iter(&work));
    g.bench_with_input(BenchmarkId::new("sequential", label), &label, |b, _| {
        b.iter(|| pool.install(&work))
    });
    g.finish();
}

fn lambda2(c: &mut Criterion) {
    for n in [5, 6] {
        let g = InteractionGraph::complete(n).unwrap();
        let lap = QuantumLaplacian::build(&g).unwrap();
        compare(c, "lambda2", n, || {
            std::hint::black_box(lap.lambda2().unwrap());
        });
    }
}

fn degree_scan(c: &mut Criterion) {
    for n in [7, 8] {
        let g = InteractionGraph::complete(n).unwrap();
        compare(c, "max_degree", n, || {
            std::hint::black_box(max_degree(&g).unwrap());
        });
    }
}

fn diagonal_pairs(c: &mut Criterion) {
    compare(c, "diagonal_regularity", 8, || {
        std::hint::black_box(verify_diagonal_strong_regularity(8).unwrap());
    });
}

fn exact_evolution(c: &mut Criterion) {
    let n = 5;
    let rho = DensityState::basis_projector("10110".parse().unwrap()).unwrap();
    let sched = SwitchingSchedule::constant(InteractionGraph::path(n).unwrap());
    let opts = IntegratorOptions::default();
    compare(c, "exact_evolution", n, || {
        std::hint::black_box(integrate(&rho, &sched, &HamiltonianSpec::Zero, 2.0, 0.5, &opts).unwrap());
    });
}

criterion_group!(benches, lambda2, degree_scan, diagonal_pairs, exact_evolution);
criterion_main!(benches);
