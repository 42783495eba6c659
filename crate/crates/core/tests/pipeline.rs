//! End-to-end behaviour of ordering, pruning and discovery on simulated data.

use ndarray::{Array2, Axis};
use nogam::harness::{discover, example1_data, run_experiment, Example1Setup, ExperimentConfig, Method};
use nogam::ordering::{jacobian_variances, leaf_mse_from_scores, nogam_order, score_order};
use nogam::pruning::prune;
use nogam::regression::estimate_residuals;
use nogam::scm::{generate_dataset, AnalyticScmOracle, analytic_score, Mechanism, TestFunction};
use nogam::{
    Dag, Dataset, DiscoveryConfig, Error, NoiseKind, Ordering, PruneConfig, RegressorConfig, ScmSpec, SteinConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CUBIC: TestFunction = TestFunction::Cubic { coef: 1.0 };
const SIN: TestFunction = TestFunction::Sin { coef: 2.0 };
const TANH: TestFunction = TestFunction::Tanh { coef: 2.0 };

fn additive(graph: Dag, terms: &[Option<TestFunction>], noise: NoiseKind) -> ScmSpec {
    let mechanisms = terms
        .iter()
        .enumerate()
        .map(|(j, t)| match t {
            None => Mechanism::NoiseOnly,
            Some(f) => Mechanism::Additive {
                terms: vec![*f; graph.parents(j).len()],
            },
        })
        .collect();
    ScmSpec {
        noise: vec![noise.default_spec(); graph.n_nodes()],
        graph,
        mechanisms,
    }
}

fn cubic_pair(noise: NoiseKind) -> ScmSpec {
    additive(
        Dag::from_edges(2, &[(0, 1)]).unwrap(),
        &[None, Some(CUBIC)],
        noise,
    )
}

fn sample(spec: &ScmSpec, n: usize, seed: u64) -> (Dataset, Array2<f64>) {
    generate_dataset(spec, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn corr(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let (ma, mb) = (a.mean().unwrap(), b.mean().unwrap());
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn leaf_residual_recovers_its_noise() {
    let spec = cubic_pair(NoiseKind::Normal);
    for seed in 0..3 {
        let (x, noise) = sample(&spec, 1000, seed);
        let r = estimate_residuals(&x, &RegressorConfig::default()).unwrap();
        let c = corr(r.column(1), noise.column(1));
        assert!(c >= 0.9, "seed {seed}: corr {c}");
        for j in 0..2 {
            let col = r.column(j);
            let sd = col.std(1.0);
            assert!(col.mean().unwrap().abs() <= 0.05 * sd, "seed {seed} column {j}");
        }
    }
}

#[test]
fn exact_scores_single_out_the_leaf() {
    let spec = cubic_pair(NoiseKind::Normal);
    let oracle = AnalyticScmOracle::new(&spec).unwrap();
    let mut wins = 0;
    for seed in 0..10 {
        let (x, _) = sample(&spec, 1000, seed);
        let s = analytic_score(&oracle, &x).unwrap();
        let mse = leaf_mse_from_scores(&x, s.s.view(), &RegressorConfig::default()).unwrap();
        wins += usize::from(mse[1] < mse[0]);
    }
    assert!(wins >= 9, "{wins}/10");
}

#[test]
fn nogam_orders_cubic_pair_with_uniform_noise() {
    let spec = cubic_pair(NoiseKind::Uniform);
    let mut hits = 0;
    for seed in 0..10 {
        let (x, _) = sample(&spec, 1000, seed);
        let r = nogam_order(&x, &RegressorConfig::default(), &SteinConfig::default()).unwrap();
        hits += usize::from(r.order.as_slice() == [0, 1]);
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn score_baseline_orders_gaussian_pair() {
    let spec = additive(
        Dag::from_edges(2, &[(0, 1)]).unwrap(),
        &[None, Some(SIN)],
        NoiseKind::Normal,
    );
    let mut hits = 0;
    for seed in 0..10 {
        let (x, _) = sample(&spec, 1000, seed);
        hits += usize::from(score_order(&x, &SteinConfig::default()).unwrap().order.as_slice() == [0, 1]);
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn gaussian_chain_leaf_has_smallest_jacobian_variance() {
    let spec = additive(
        Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
        &[None, Some(SIN), Some(SIN)],
        NoiseKind::Normal,
    );
    let mut hits = 0;
    for seed in 0..10 {
        let (x, _) = sample(&spec, 1000, seed);
        let v = jacobian_variances(&x, &SteinConfig::default()).unwrap();
        hits += usize::from(v[2] < v[0] && v[2] < v[1]);
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn independent_extra_node_is_a_valid_leaf() {
    // Node 2 is isolated with the same noise law as the leaf; it is a sink of
    // some consistent DAG, so picking it is as correct as picking node 1.
    let spec = additive(
        Dag::from_edges(3, &[(0, 1)]).unwrap(),
        &[None, Some(CUBIC), None],
        NoiseKind::Laplace,
    );
    let mut hits = 0;
    for seed in 0..10 {
        let (x, _) = sample(&spec, 1000, seed);
        let r = nogam_order(&x, &RegressorConfig::default(), &SteinConfig::default()).unwrap();
        hits += usize::from(r.iterations[0].chosen != 0);
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn ordering_follows_column_permutation() {
    let spec = additive(
        Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap(),
        &[None, Some(TANH), Some(CUBIC), Some(SIN)],
        NoiseKind::Gumbel,
    );
    let (x, _) = sample(&spec, 300, 11);
    let reg = RegressorConfig::default();
    let stein = SteinConfig::default();
    let base = nogam_order(&x, &reg, &stein).unwrap();
    let perm = [2, 0, 3, 1];
    let permuted = x.select_columns(&perm);
    let r = nogam_order(&permuted, &reg, &stein).unwrap();
    let mapped: Vec<usize> = r.order.as_slice().iter().map(|&k| perm[k]).collect();
    assert_eq!(mapped, base.order.as_slice());
}

#[test]
fn pruning_controls_false_positives_under_the_null() {
    let d = 5;
    let cfg = PruneConfig::default();
    let mut spurious = 0;
    for seed in 0..10 {
        let spec = additive(Dag::empty(d), &vec![None; d], NoiseKind::Normal);
        let (x, _) = sample(&spec, 1000, seed);
        spurious += prune(&x, &Ordering::identity(d), &cfg).unwrap().edge_count();
    }
    let bound = (cfg.cutoff * (d * (d - 1) / 2) as f64 * 10.0).ceil() as usize;
    assert!(spurious <= bound, "{spurious} > {bound}");
}

#[test]
fn pruned_graph_respects_the_order() {
    let spec = additive(
        Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap(),
        &[None, Some(TANH), Some(CUBIC), Some(SIN)],
        NoiseKind::Normal,
    );
    let (x, _) = sample(&spec, 500, 2);
    for perm in [vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![1, 3, 0, 2]] {
        let order = Ordering::new(perm).unwrap();
        let g = prune(&x, &order, &PruneConfig::default()).unwrap();
        assert!(g.is_subgraph_of(&nogam::graph::full_dag_from_ordering(&order)));
    }
}

#[test]
fn discovery_on_uniform_noise_pairs() {
    let mut hits = 0;
    for seed in 0..10 {
        let (x, y) = example1_data(Example1Setup::Linear, seed);
        let data = Dataset::new(ndarray::stack(Axis(1), &[x.view(), y.view()]).unwrap()).unwrap();
        let found = discover(&data, Method::Nogam, &DiscoveryConfig::default()).unwrap();
        hits += usize::from(found.ordering.order.as_slice() == [0, 1]);
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn discovery_on_a_single_column() {
    let data = Dataset::read_csv("1.5\n2.0\n0.3\n4.1\n2.2\n3.3\n".as_bytes(), false).unwrap();
    let found = discover(&data, Method::Nogam, &DiscoveryConfig::default()).unwrap();
    assert_eq!(found.graph.edge_count(), 0);
    assert_eq!(found.ordering.order.as_slice(), [0]);
}

#[test]
fn malformed_csv_names_the_cell() {
    let err = Dataset::read_csv("1,2\n3,oops\n".as_bytes(), false).unwrap_err();
    match &err {
        Error::Parse { row, col, .. } => assert_eq!((*row, *col), (2, 2)),
        other => panic!("unexpected error {other:?}"),
    }
    assert!(err.to_string().contains("oops"));
}

#[test]
fn sweep_csv_is_reproducible() {
    let cfg = ExperimentConfig {
        d: 4,
        n: 120,
        seeds: vec![0, 1, 2],
        methods: vec![Method::Nogam, Method::ScoreBaseline],
        noise: NoiseKind::Gumbel,
        ..Default::default()
    };
    let a = run_experiment(&cfg, 1).unwrap().to_csv();
    let b = run_experiment(&cfg, 3).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 3 * 2);
}
