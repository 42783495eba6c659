use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nogam::graph::sample_er;
use nogam::ordering::nogam_order;
use nogam::regression::estimate_residuals;
use nogam::scm::generate_dataset;
use nogam::{prune, stein_score, Dataset, NoiseKind, Ordering, PruneConfig, RegressorConfig, ScmSpec, SteinConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simulated(d: usize, n: usize) -> (Dataset, Ordering) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let graph = sample_er(d, 1, &mut rng).unwrap();
    let order = nogam::graph::topological_sort(&graph).unwrap();
    let spec = ScmSpec::gp(graph, NoiseKind::Gumbel.default_spec(), 1.0);
    (generate_dataset(&spec, n, &mut rng).unwrap().0, order)
}

fn stein(c: &mut Criterion) {
    let mut g = c.benchmark_group("stein_score");
    g.sample_size(10);
    for n in [250, 500, 1000] {
        let (x, _) = simulated(5, n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| stein_score(black_box(x), &SteinConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn residuals(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_residuals");
    g.sample_size(10);
    for n in [250, 500] {
        let (x, _) = simulated(5, n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| estimate_residuals(black_box(x), &RegressorConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn pruning(c: &mut Criterion) {
    let (x, order) = simulated(10, 1000);
    let mut g = c.benchmark_group("prune");
    g.sample_size(10);
    g.bench_function("d10_n1000", |b| {
        b.iter(|| prune(black_box(&x), &order, &PruneConfig::default()).unwrap())
    });
    g.finish();
}

fn ordering(c: &mut Criterion) {
    let (x, _) = simulated(5, 300);
    let mut g = c.benchmark_group("nogam_order");
    g.sample_size(10);
    g.bench_function("d5_n300", |b| {
        b.iter(|| nogam_order(black_box(&x), &RegressorConfig::default(), &SteinConfig::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, stein, residuals, pruning, ordering);
criterion_main!(benches);
