//! Experiment plumbing: seeded benchmark sweeps, discovery on user data,
//! the bivariate entropy demonstration and synthetic dataset export.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::entropy::{gaussian_entropy, fit_both_directions, DirectionVerdict, EntropyMode};
use crate::error::{invalid, Error, Result};
use crate::graph::{sample_er, sample_sf, Dag};
use crate::metrics::{evaluate, EvalReport, REPORT_COLUMNS};
use crate::ordering::{nogam_order, score_order, OrderingResult};
use crate::pruning::{prune, PruneConfig};
use crate::regression::RegressorConfig;
use crate::scm::{generate_dataset, NoiseKind, ScmSpec};
use crate::stein::SteinConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphType {
    #[serde(alias = "er")]
    ER,
    #[serde(alias = "sf")]
    SF,
}

impl GraphType {
    pub fn name(self) -> &'static str {
        match self {
            GraphType::ER => "ER",
            GraphType::SF => "SF",
        }
    }

    /// Random DAG with `d` nodes and expected edge count about `density * d`.
    pub fn sample<R: Rng + ?Sized>(self, d: usize, density: usize, rng: &mut R) -> Result<Dag> {
        match self {
            GraphType::ER => sample_er(d, density, rng),
            GraphType::SF => sample_sf(d, density, rng),
        }
    }
}

impl FromStr for GraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ER" => Ok(GraphType::ER),
            "SF" => Ok(GraphType::SF),
            _ => Err(invalid(format!("unknown graph type '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "nogam")]
    Nogam,
    #[serde(rename = "score-baseline")]
    ScoreBaseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nogam => "nogam",
            Method::ScoreBaseline => "score-baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nogam" => Ok(Method::Nogam),
            "score-baseline" | "score" => Ok(Method::ScoreBaseline),
            _ => Err(invalid(format!("unknown method '{s}'"))),
        }
    }
}

/// Ordering plus pruning settings shared by sweeps and one-off discovery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    pub regressor: RegressorConfig,
    pub stein: SteinConfig,
    pub prune: PruneConfig,
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        self.regressor.validate()?;
        self.stein.validate()?;
        self.prune.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    pub graph: Dag,
    pub ordering: OrderingResult,
}

/// Infers an ordering with `method`, then prunes the implied complete DAG.
pub fn discover(x: &Dataset, method: Method, cfg: &DiscoveryConfig) -> Result<Discovery> {
    cfg.validate()?;
    let ordering = match method {
        Method::Nogam => nogam_order(x, &cfg.regressor, &cfg.stein)?,
        Method::ScoreBaseline => score_order(x, &cfg.stein)?,
    };
    let graph = prune(x, &ordering.order, &cfg.prune)?;
    Ok(Discovery { graph, ordering })
}

/// Writes `graph.txt` (edge list) and `ordering.json` into `dir`.
pub fn write_discovery(d: &Discovery, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let graph = dir.join("graph.txt");
    let ordering = dir.join("ordering.json");
    fs::write(&graph, d.graph.to_edge_list())?;
    fs::write(&ordering, d.ordering.to_json())?;
    Ok((graph, ordering))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphType,
    pub d: usize,
    pub density: usize,
    pub noise: NoiseKind,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// RBF bandwidth of the GP mechanisms.
    pub gp_bandwidth: f64,
    pub regressor: RegressorConfig,
    pub stein: SteinConfig,
    pub prune: PruneConfig,
    /// Fill `wall_ms`. Off by default so results files are reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: GraphType::ER,
            d: 10,
            density: 1,
            noise: NoiseKind::Normal,
            n: 1000,
            seeds: (0..10).collect(),
            methods: vec![Method::Nogam],
            gp_bandwidth: 1.0,
            regressor: RegressorConfig::default(),
            stein: SteinConfig::default(),
            prune: PruneConfig::default(),
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d must be positive".to_string()));
        }
        if self.density == 0 {
            return Err(invalid("density must be positive".to_string()));
        }
        if self.n < 2 {
            return Err(invalid(format!("n must be at least 2, got {}", self.n)));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds must be nonempty".to_string()));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods must be nonempty".to_string()));
        }
        if !(self.gp_bandwidth > 0.0 && self.gp_bandwidth.is_finite()) {
            return Err(invalid(format!("gp_bandwidth must be positive, got {}", self.gp_bandwidth)));
        }
        self.discovery().validate()
    }

    pub fn discovery(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            regressor: self.regressor,
            stein: self.stein,
            prune: self.prune,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Short SHA-256 digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex_prefix(&Sha256::digest(json.as_bytes()), 8)
    }
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes.iter().take(n).map(|b| format!("{b:02x}")).collect()
}

/// Ground truth and samples for one seed of a sweep.
pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<(Dag, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = cfg.graph.sample(cfg.d, cfg.density, &mut rng)?;
    let spec = ScmSpec::gp(graph.clone(), cfg.noise.default_spec(), cfg.gp_bandwidth);
    let (data, _) = generate_dataset(&spec, cfg.n, &mut rng)?;
    Ok((graph, data))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResults {
    pub rows: Vec<EvalReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl fmt::Display for MetricSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1} ± {:.1}", self.mean, self.std)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub runs: usize,
    pub failures: usize,
    pub shd: Option<MetricSummary>,
    pub sid: Option<MetricSummary>,
    pub d_top: Option<MetricSummary>,
}

fn summarize(values: &[usize]) -> Option<MetricSummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<usize>() as f64 / n;
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    Some(MetricSummary { mean, std: var.sqrt() })
}

impl ExperimentResults {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_COLUMNS).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.csv_record()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Mean and population standard deviation per method, over successful
    /// rows, in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut methods: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        methods
            .into_iter()
            .map(|m| {
                let rows: Vec<&EvalReport> = self.rows.iter().filter(|r| r.method == m).collect();
                let ok: Vec<&&EvalReport> = rows.iter().filter(|r| r.error.is_none()).collect();
                let pick = |f: fn(&EvalReport) -> Option<usize>| -> Vec<usize> {
                    ok.iter().filter_map(|r| f(r)).collect()
                };
                SummaryRow {
                    method: m.to_string(),
                    runs: rows.len(),
                    failures: rows.len() - ok.len(),
                    shd: summarize(&pick(|r| r.shd)),
                    sid: summarize(&pick(|r| r.sid)),
                    d_top: summarize(&pick(|r| r.d_top)),
                }
            })
            .collect()
    }

    pub fn summary_table(&self) -> String {
        let fmt = |m: &Option<MetricSummary>| m.as_ref().map_or("-".to_string(), |s| s.to_string());
        let mut out = format!("{:<16} {:>5} {:>14} {:>14} {:>14}\n", "method", "runs", "SHD", "SID", "D_top");
        for s in self.summary() {
            let runs = if s.failures > 0 {
                format!("{}!{}", s.runs, s.failures)
            } else {
                s.runs.to_string()
            };
            out.push_str(&format!(
                "{:<16} {:>5} {:>14} {:>14} {:>14}\n",
                s.method,
                runs,
                fmt(&s.shd),
                fmt(&s.sid),
                fmt(&s.d_top)
            ));
        }
        out
    }

    pub fn mean_of(&self, method: Method, metric: fn(&EvalReport) -> Option<usize>) -> Option<f64> {
        let vals: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.method == method.name())
            .filter_map(metric)
            .collect();
        summarize(&vals).map(|s| s.mean)
    }
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, hash: &str) -> Vec<EvalReport> {
    let base = |method: Method| EvalReport {
        seed,
        method: method.name().to_string(),
        graph_type: cfg.graph.name().to_string(),
        d: cfg.d,
        noise: cfg.noise.name().to_string(),
        shd: None,
        sid: None,
        d_top: None,
        wall_ms: None,
        config_hash: hash.to_string(),
        error: None,
    };
    let simulated = simulate(cfg, seed);
    cfg.methods
        .iter()
        .map(|&method| {
            let mut row = base(method);
            let (truth, data) = match &simulated {
                Ok(v) => v,
                Err(e) => {
                    row.error = Some(format!("simulate: {e}"));
                    return row;
                }
            };
            let start = Instant::now();
            let outcome = discover(data, method, &cfg.discovery())
                .and_then(|found| evaluate(truth, &found.graph, &found.ordering.order));
            if cfg.record_wall_time {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            match outcome {
                Ok(s) => {
                    row.shd = Some(s.shd);
                    row.sid = Some(s.sid);
                    row.d_top = Some(s.d_top);
                }
                Err(e) => {
                    log::warn!("seed {seed} {method}: {e}");
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect()
}

/// Runs every `(seed, method)` cell. Seeds run on `jobs` worker threads
/// (0 = rayon default); rows come back in `(seed, method)` config order and
/// failed cells are kept with an error message.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResults> {
    cfg.validate()?;
    let hash = cfg.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let per_seed: Vec<Vec<EvalReport>> =
        pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s, &hash)).collect());
    Ok(ExperimentResults {
        rows: per_seed.into_iter().flatten().collect(),
    })
}

/// The two bivariate setups: `y = x + n` and `y = x^(1 + delta) + n`, with
/// `x ~ U[0, 5]` and `n ~ U[1, 4]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setup", rename_all = "snake_case")]
pub enum Example1Setup {
    Linear,
    Nonlinear { delta: f64 },
}

impl Example1Setup {
    pub const X_RANGE: (f64, f64) = (0.0, 5.0);
    pub const NOISE_RANGE: (f64, f64) = (1.0, 4.0);

    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> (Array1<f64>, Array1<f64>) {
        let (xl, xh) = Self::X_RANGE;
        let (nl, nh) = Self::NOISE_RANGE;
        let x: Array1<f64> = (0..n).map(|_| rng.random_range(xl..xh)).collect();
        let y = x.mapv(|v| match self {
            Example1Setup::Linear => v,
            Example1Setup::Nonlinear { delta } => v.powf(1.0 + delta),
        }) + (0..n).map(|_| rng.random_range(nl..nh)).collect::<Array1<f64>>();
        (x, y)
    }

    /// Entropy of the true noise, exact under either mode.
    pub fn noise_entropy(mode: EntropyMode) -> f64 {
        let width = Self::NOISE_RANGE.1 - Self::NOISE_RANGE.0;
        match mode {
            EntropyMode::Nonparametric => width.ln(),
            EntropyMode::GaussianAssumption => {
                gaussian_entropy(width * width / 12.0).expect("positive variance")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example1Case {
    #[serde(flatten)]
    pub setup: Example1Setup,
    #[serde(flatten)]
    pub verdict: DirectionVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example1Report {
    pub seed: u64,
    pub n: usize,
    pub cases: Vec<Example1Case>,
}

impl Example1Report {
    pub fn case(&self, setup: Example1Setup, mode: EntropyMode) -> Option<&Example1Case> {
        self.cases
            .iter()
            .find(|c| c.setup == setup && c.verdict.mode == mode)
    }
}

/// Sample size of the bivariate demonstration.
pub const EXAMPLE1_N: usize = 2000;
/// Exponent offset of the nonlinear setup.
pub const EXAMPLE1_DELTA: f64 = 0.1;

/// Compares both directions on one sample. The forward total uses the exact
/// entropy of the known noise; everything else is estimated, with the reverse
/// residual from out-of-fold kernel ridge.
pub fn example1_case(
    setup: Example1Setup,
    x: &Array1<f64>,
    y: &Array1<f64>,
    mode: EntropyMode,
    reg: &RegressorConfig,
) -> Result<Example1Case> {
    let fit = fit_both_directions(x.view(), y.view(), reg)?;
    let forward = mode.entropy(x.view())? + Example1Setup::noise_entropy(mode);
    let reverse = mode.entropy(y.view())? + mode.entropy(fit.residual_reverse.view())?;
    Ok(Example1Case {
        setup,
        verdict: DirectionVerdict::from_totals(forward, reverse, mode),
    })
}

/// Both setups of the demonstration, with the default nonlinearity.
pub const EXAMPLE1_SETUPS: [Example1Setup; 2] = [
    Example1Setup::Linear,
    Example1Setup::Nonlinear {
        delta: EXAMPLE1_DELTA,
    },
];

/// The sample `run_example1` uses for `setup`. Each setup draws from its own
/// stream of the seeded generator.
pub fn example1_data(setup: Example1Setup, seed: u64) -> (Array1<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match setup {
        Example1Setup::Linear => 0,
        Example1Setup::Nonlinear { .. } => 1,
    });
    setup.sample(EXAMPLE1_N, &mut rng)
}

/// Linear and nonlinear setups under both entropy modes.
pub fn run_example1(seed: u64, reg: &RegressorConfig) -> Result<Example1Report> {
    reg.validate()?;
    let mut cases = Vec::new();
    for setup in EXAMPLE1_SETUPS {
        let (x, y) = example1_data(setup, seed);
        for mode in EntropyMode::ALL {
            cases.push(example1_case(setup, &x, &y, mode, reg)?);
        }
    }
    Ok(Example1Report {
        seed,
        n: EXAMPLE1_N,
        cases,
    })
}

/// Synthetic dataset description for export. Either a full `scm`, or a
/// random graph with GP mechanisms built from the remaining fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub graph: GraphType,
    pub d: usize,
    pub density: usize,
    pub noise: NoiseKind,
    pub gp_bandwidth: f64,
    pub n: usize,
    pub seed: u64,
    pub scm: Option<ScmSpec>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            graph: GraphType::ER,
            d: 10,
            density: 1,
            noise: NoiseKind::Normal,
            gp_bandwidth: 1.0,
            n: 1000,
            seed: 0,
            scm: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: ScmSpec,
    pub data: Dataset,
    pub seed: u64,
}

pub fn generate(cfg: &GenConfig) -> Result<Generated> {
    if cfg.n == 0 {
        return Err(invalid("n must be positive".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spec = match &cfg.scm {
        Some(spec) => spec.clone(),
        None => {
            if cfg.d == 0 {
                return Err(invalid("d must be positive".to_string()));
            }
            let graph = cfg.graph.sample(cfg.d, cfg.density, &mut rng)?;
            ScmSpec::gp(graph, cfg.noise.default_spec(), cfg.gp_bandwidth)
        }
    };
    spec.validate()?;
    let (data, _) = generate_dataset(&spec, cfg.n, &mut rng)?;
    Ok(Generated {
        spec,
        data,
        seed: cfg.seed,
    })
}

impl Generated {
    /// Writes `data.csv`, `graph.txt`, `adjacency.csv` and `meta.json`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.data.write_csv(fs::File::create(dir.join("data.csv"))?)?;
        fs::write(dir.join("graph.txt"), self.spec.graph.to_edge_list())?;
        fs::write(dir.join("adjacency.csv"), self.spec.graph.to_adjacency_csv())?;
        let meta = serde_json::json!({
            "seed": self.seed,
            "n": self.data.n(),
            "d": self.data.d(),
            "scm": self.spec,
        });
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(d: usize, seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            d,
            n: 80,
            seeds,
            methods: vec![Method::Nogam, Method::ScoreBaseline],
            ..Default::default()
        }
    }

    #[test]
    fn single_node_sweep_is_perfect() {
        let res = run_experiment(&tiny(1, vec![0]), 1).unwrap();
        assert_eq!(res.rows.len(), 2);
        for r in &res.rows {
            assert_eq!((r.shd, r.sid, r.d_top), (Some(0), Some(0), Some(0)), "{r:?}");
        }
    }

    #[test]
    fn rows_follow_config_order() {
        let cfg = tiny(3, vec![5, 1, 3]);
        let res = run_experiment(&cfg, 2).unwrap();
        let keys: Vec<(u64, String)> = res.rows.iter().map(|r| (r.seed, r.method.clone())).collect();
        let want: Vec<(u64, String)> = [5, 1, 3]
            .iter()
            .flat_map(|&s| ["nogam", "score-baseline"].map(|m| (s, m.to_string())))
            .collect();
        assert_eq!(keys, want);
        assert!(res.rows.iter().all(|r| r.wall_ms.is_none()));
    }

    #[test]
    fn failures_are_recorded_per_row() {
        // Fewer samples than folds: every discovery fails, rows survive.
        let mut cfg = tiny(3, vec![0, 1]);
        cfg.n = 4;
        cfg.methods = vec![Method::Nogam];
        let res = run_experiment(&cfg, 1).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows.iter().all(|r| r.error.is_some() && r.shd.is_none()));
        let s = res.summary();
        assert_eq!(s[0].failures, 2);
        assert!(s[0].shd.is_none());
    }

    #[test]
    fn config_json_round_trip_and_hash() {
        let cfg = ExperimentConfig::from_json(
            r#"{"graph":"SF","d":5,"noise":"gumbel","seeds":[1,2],"methods":["nogam","score-baseline"],
                "prune":{"cutoff":0.01}}"#,
        )
        .unwrap();
        assert_eq!(cfg.graph, GraphType::SF);
        assert_eq!(cfg.prune.basis_size, 10);
        assert_eq!(cfg.n, 1000);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 16);
        let mut other = cfg.clone();
        other.n = 999;
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"seeds":[]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"methods":["ges"]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"stein":{"eta":-1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn summary_statistics() {
        let mk = |shd| EvalReport {
            seed: 0,
            method: "nogam".into(),
            graph_type: "ER".into(),
            d: 2,
            noise: "normal".into(),
            shd: Some(shd),
            sid: Some(0),
            d_top: Some(0),
            wall_ms: None,
            config_hash: String::new(),
            error: None,
        };
        let res = ExperimentResults {
            rows: vec![mk(0), mk(1), mk(0), mk(1)],
        };
        let s = &res.summary()[0];
        assert_eq!(s.shd.as_ref().unwrap().to_string(), "0.5 ± 0.5");
        assert!(res.summary_table().contains("0.5 ± 0.5"));
        assert_eq!(res.mean_of(Method::Nogam, |r| r.shd), Some(0.5));
        assert_eq!(res.mean_of(Method::ScoreBaseline, |r| r.shd), None);
        let csv = res.to_csv();
        assert_eq!(csv.lines().next().unwrap(), REPORT_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn example1_noise_entropies() {
        assert!((Example1Setup::noise_entropy(EntropyMode::Nonparametric) - 3f64.ln()).abs() < 1e-15);
        let g = Example1Setup::noise_entropy(EntropyMode::GaussianAssumption);
        assert!((g - gaussian_entropy(0.75).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn example1_sample_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (x, y) = Example1Setup::Linear.sample(500, &mut rng);
        assert!(x.iter().all(|&v| (0.0..5.0).contains(&v)));
        let n = &y - &x;
        assert!(n.iter().all(|&v| (1.0..4.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn generate_and_write() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig {
            d: 4,
            n: 30,
            seed: 9,
            ..Default::default()
        };
        let g = generate(&cfg).unwrap();
        g.write_to(dir.path()).unwrap();
        let back = Dataset::read_csv_path(dir.path().join("data.csv"), false).unwrap();
        assert_eq!(back, g.data);
        let graph = Dag::from_edge_list(&fs::read_to_string(dir.path().join("graph.txt")).unwrap()).unwrap();
        assert_eq!(graph, g.spec.graph);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
        let spec: ScmSpec = serde_json::from_value(meta["scm"].clone()).unwrap();
        assert_eq!(spec, g.spec);
        assert_eq!(generate(&cfg).unwrap().data, g.data);
    }

    #[test]
    fn generate_from_explicit_scm() {
        let graph = Dag::from_edges(2, &[(0, 1)]).unwrap();
        let spec = ScmSpec::gp(graph, NoiseKind::Laplace.default_spec(), 1.0);
        let cfg = GenConfig {
            scm: Some(spec.clone()),
            n: 10,
            ..Default::default()
        };
        let g = generate(&cfg).unwrap();
        assert_eq!(g.spec, spec);
        assert_eq!(g.data.d(), 2);
    }
}
