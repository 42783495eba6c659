//! Additive noise structural causal models: noise families, GP-sampled
//! mechanisms, dataset generation and a closed-form score oracle.
//!
//! Every variable follows `X_i = f_i(parents) + N_i` with independent noise.
//! Non-root GP mechanisms are realized as one joint Gaussian-process draw over
//! the observed parent rows, so they exist only at the sampled points.

use std::f64::consts::{E, PI};

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, Gumbel, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use statrs::function::{beta::ln_beta, gamma::ln_gamma};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::graph::{topological_sort, Dag};
use crate::linalg::{sq_dists_self, Cholesky};
use crate::stein::ScoreEstimate;

/// Diagonal jitter added to GP Gram matrices before factorization.
pub const GP_JITTER: f64 = 1e-6;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Parametric noise distribution before centering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NoiseFamily {
    Normal { std: f64 },
    Beta { a: f64, b: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Gumbel { scale: f64 },
    Laplace { scale: f64 },
    Uniform { low: f64, high: f64 },
}

impl NoiseFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseFamily::Normal { std } => std > 0.0,
            NoiseFamily::Beta { a, b } => a > 0.0 && b > 0.0,
            NoiseFamily::Exponential { rate } => rate > 0.0,
            NoiseFamily::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
            NoiseFamily::Gumbel { scale } | NoiseFamily::Laplace { scale } => scale > 0.0,
            NoiseFamily::Uniform { low, high } => low.is_finite() && high.is_finite() && high > low,
        };
        let finite = match *self {
            NoiseFamily::Normal { std: p }
            | NoiseFamily::Exponential { rate: p }
            | NoiseFamily::Gumbel { scale: p }
            | NoiseFamily::Laplace { scale: p } => p.is_finite(),
            NoiseFamily::Beta { a, b } => a.is_finite() && b.is_finite(),
            NoiseFamily::Gamma { shape, scale } => shape.is_finite() && scale.is_finite(),
            NoiseFamily::Uniform { .. } => true,
        };
        if ok && finite {
            Ok(())
        } else {
            Err(invalid(format!("invalid noise parameters {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseFamily::Normal { .. } | NoiseFamily::Laplace { .. } => 0.0,
            NoiseFamily::Beta { a, b } => a / (a + b),
            NoiseFamily::Exponential { rate } => 1.0 / rate,
            NoiseFamily::Gamma { shape, scale } => shape * scale,
            NoiseFamily::Gumbel { scale } => EULER_GAMMA * scale,
            NoiseFamily::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseFamily::Normal { std } => std * std,
            NoiseFamily::Beta { a, b } => a * b / ((a + b).powi(2) * (a + b + 1.0)),
            NoiseFamily::Exponential { rate } => 1.0 / (rate * rate),
            NoiseFamily::Gamma { shape, scale } => shape * scale * scale,
            NoiseFamily::Gumbel { scale } => PI * PI * scale * scale / 6.0,
            NoiseFamily::Laplace { scale } => 2.0 * scale * scale,
            NoiseFamily::Uniform { low, high } => (high - low).powi(2) / 12.0,
        }
    }

    /// Analytic differential entropy in nats.
    pub fn entropy(&self) -> f64 {
        match *self {
            NoiseFamily::Normal { std } => 0.5 * (2.0 * PI * E * std * std).ln(),
            NoiseFamily::Beta { a, b } => {
                use statrs::function::gamma::digamma;
                ln_beta(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b)
                    + (a + b - 2.0) * digamma(a + b)
            }
            NoiseFamily::Exponential { rate } => 1.0 - rate.ln(),
            NoiseFamily::Gamma { shape, scale } => {
                use statrs::function::gamma::digamma;
                shape + scale.ln() + ln_gamma(shape) + (1.0 - shape) * digamma(shape)
            }
            NoiseFamily::Gumbel { scale } => scale.ln() + EULER_GAMMA + 1.0,
            NoiseFamily::Laplace { scale } => 1.0 + (2.0 * scale).ln(),
            NoiseFamily::Uniform { low, high } => (high - low).ln(),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        let bad = |e: String| invalid(format!("noise {self:?}: {e}"));
        let out = match *self {
            NoiseFamily::Normal { std } => {
                let d = Normal::new(0.0, std).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            NoiseFamily::Beta { a, b } => {
                let d = Beta::new(a, b).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            NoiseFamily::Exponential { rate } => {
                let d = Exp::new(rate).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            NoiseFamily::Gamma { shape, scale } => {
                let d = Gamma::new(shape, scale).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            NoiseFamily::Gumbel { scale } => {
                let d = Gumbel::new(0.0, scale).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            NoiseFamily::Laplace { scale } => (0..n)
                .map(|_| {
                    // Inverse CDF on u in (-1/2, 1/2).
                    let u: f64 = rng.random::<f64>() - 0.5;
                    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                })
                .collect(),
            NoiseFamily::Uniform { low, high } => {
                let d = Uniform::new(low, high).map_err(|e| bad(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
        };
        Ok(out)
    }

    fn log_pdf(&self, x: f64) -> Option<f64> {
        match *self {
            NoiseFamily::Normal { std } => {
                Some(-0.5 * (2.0 * PI * std * std).ln() - x * x / (2.0 * std * std))
            }
            NoiseFamily::Beta { a, b } => (x > 0.0 && x < 1.0)
                .then(|| (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)),
            NoiseFamily::Exponential { rate } => (x > 0.0).then(|| rate.ln() - rate * x),
            NoiseFamily::Gamma { shape, scale } => (x > 0.0).then(|| {
                -ln_gamma(shape) - shape * scale.ln() + (shape - 1.0) * x.ln() - x / scale
            }),
            NoiseFamily::Gumbel { scale } => {
                let z = x / scale;
                Some(-scale.ln() - z - (-z).exp())
            }
            NoiseFamily::Laplace { scale } => Some(-(2.0 * scale).ln() - x.abs() / scale),
            NoiseFamily::Uniform { low, high } => {
                (x > low && x < high).then(|| -(high - low).ln())
            }
        }
    }

    fn dlog_pdf(&self, x: f64) -> Option<f64> {
        match *self {
            NoiseFamily::Normal { std } => Some(-x / (std * std)),
            NoiseFamily::Beta { a, b } => {
                (x > 0.0 && x < 1.0).then(|| (a - 1.0) / x - (b - 1.0) / (1.0 - x))
            }
            NoiseFamily::Exponential { rate } => (x > 0.0).then_some(-rate),
            NoiseFamily::Gamma { shape, scale } => {
                (x > 0.0).then(|| (shape - 1.0) / x - 1.0 / scale)
            }
            NoiseFamily::Gumbel { scale } => Some(((-x / scale).exp() - 1.0) / scale),
            NoiseFamily::Laplace { scale } => Some(-x.signum() / scale),
            NoiseFamily::Uniform { low, high } => (x > low && x < high).then_some(0.0),
        }
    }
}

/// Noise family plus optional centering to zero mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    #[serde(default = "default_center")]
    pub center: bool,
}

fn default_center() -> bool {
    true
}

impl NoiseSpec {
    pub fn centered(family: NoiseFamily) -> Self {
        Self {
            family,
            center: true,
        }
    }

    pub fn raw(family: NoiseFamily) -> Self {
        Self {
            family,
            center: false,
        }
    }

    fn shift(&self) -> f64 {
        if self.center {
            self.family.mean()
        } else {
            0.0
        }
    }

    /// Mean of the emitted samples.
    pub fn mean(&self) -> f64 {
        self.family.mean() - self.shift()
    }

    pub fn variance(&self) -> f64 {
        self.family.variance()
    }

    /// `log p(x)` of the emitted (possibly shifted) variable.
    pub fn log_pdf(&self, x: f64) -> Option<f64> {
        self.family.log_pdf(x + self.shift())
    }

    /// `d/dx log p(x)` of the emitted variable; `None` outside the support.
    pub fn dlog_pdf(&self, x: f64) -> Option<f64> {
        self.family.dlog_pdf(x + self.shift())
    }
}

/// Noise families available to experiment configurations, with default
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[serde(alias = "gauss", alias = "gaussian")]
    Normal,
    Beta,
    Exponential,
    Gamma,
    Gumbel,
    Laplace,
    Uniform,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 7] = [
        NoiseKind::Normal,
        NoiseKind::Beta,
        NoiseKind::Exponential,
        NoiseKind::Gamma,
        NoiseKind::Gumbel,
        NoiseKind::Laplace,
        NoiseKind::Uniform,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Normal => "normal",
            NoiseKind::Beta => "beta",
            NoiseKind::Exponential => "exponential",
            NoiseKind::Gamma => "gamma",
            NoiseKind::Gumbel => "gumbel",
            NoiseKind::Laplace => "laplace",
            NoiseKind::Uniform => "uniform",
        }
    }

    pub fn default_family(&self) -> NoiseFamily {
        match self {
            NoiseKind::Normal => NoiseFamily::Normal { std: 1.0 },
            NoiseKind::Beta => NoiseFamily::Beta { a: 2.0, b: 2.0 },
            NoiseKind::Exponential => NoiseFamily::Exponential { rate: 1.0 },
            NoiseKind::Gamma => NoiseFamily::Gamma {
                shape: 2.0,
                scale: 1.0,
            },
            NoiseKind::Gumbel => NoiseFamily::Gumbel {
                scale: 6f64.sqrt() / PI,
            },
            NoiseKind::Laplace => NoiseFamily::Laplace {
                scale: std::f64::consts::FRAC_1_SQRT_2,
            },
            NoiseKind::Uniform => NoiseFamily::Uniform {
                low: 0.0,
                high: 12f64.sqrt(),
            },
        }
    }

    pub fn default_spec(&self) -> NoiseSpec {
        NoiseSpec::centered(self.default_family())
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
            .map_err(|_| invalid(format!("unknown noise family {s:?}")))
    }
}

/// I.i.d. draws from `spec`, shifted to zero mean when `spec.center` is set.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Array1<f64>> {
    if n == 0 {
        return Err(invalid("noise sample size must be positive"));
    }
    spec.family.validate()?;
    let shift = spec.shift();
    let mut v = spec.family.draw(n, rng)?;
    v.iter_mut().for_each(|x| *x -= shift);
    Ok(Array1::from(v))
}

/// One joint draw `f ~ N(0, K)` over the rows of `parent_values`, with
/// `K_ab = exp(-|u_a - u_b|^2 / (2 bandwidth^2))` plus diagonal jitter.
pub fn sample_gp_mechanism<R: Rng + ?Sized>(
    parent_values: ArrayView2<f64>,
    bandwidth: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    let m = parent_values.nrows();
    if m == 0 || parent_values.ncols() == 0 {
        return Err(invalid("GP mechanism needs at least one row and one parent"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid(format!("GP bandwidth must be positive, got {bandwidth}")));
    }
    if !parent_values.iter().all(|v| v.is_finite()) {
        return Err(invalid("GP parent values must be finite"));
    }
    let mut k = sq_dists_self(parent_values);
    let scale = -0.5 / (bandwidth * bandwidth);
    for j in 0..m {
        for i in 0..m {
            k[(i, j)] = (k[(i, j)] * scale).exp();
        }
        k[(j, j)] += GP_JITTER;
    }
    let chol = Cholesky::new(k.as_ref())?;
    let z = Mat::<f64>::from_fn(m, 1, |_, _| rng.sample(StandardNormal));
    let f = chol.lower() * &z;
    Ok(Array1::from_shape_fn(m, |i| f[(i, 0)]))
}

/// Closed-form univariate term of an additive mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "lowercase")]
pub enum TestFunction {
    Linear { coef: f64 },
    Cubic { coef: f64 },
    Sin { coef: f64 },
    Tanh { coef: f64 },
    /// `coef * x^exponent`, defined for `x >= 0`.
    Power { coef: f64, exponent: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Linear { coef } => coef * x,
            TestFunction::Cubic { coef } => coef * x * x * x,
            TestFunction::Sin { coef } => coef * x.sin(),
            TestFunction::Tanh { coef } => coef * x.tanh(),
            TestFunction::Power { coef, exponent } => coef * x.powf(exponent),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Linear { coef } => coef,
            TestFunction::Cubic { coef } => 3.0 * coef * x * x,
            TestFunction::Sin { coef } => coef * x.cos(),
            TestFunction::Tanh { coef } => coef * (1.0 - x.tanh().powi(2)),
            TestFunction::Power { coef, exponent } => coef * exponent * x.powf(exponent - 1.0),
        }
    }
}

/// How a node's value depends on its parents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Root nodes: `X_i = N_i`.
    NoiseOnly,
    /// Joint GP draw over the parent rows with an RBF kernel.
    Gp { bandwidth: f64 },
    /// `sum_p terms[p](X_{parents[p]})`, parents in ascending index order.
    Additive { terms: Vec<TestFunction> },
}

/// Complete generative description of an additive noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub graph: Dag,
    pub mechanisms: Vec<Mechanism>,
    pub noise: Vec<NoiseSpec>,
}

impl ScmSpec {
    /// GP mechanisms on every non-root node, identical noise on every node.
    pub fn gp(graph: Dag, noise: NoiseSpec, bandwidth: f64) -> Self {
        let d = graph.n_nodes();
        let mechanisms = (0..d)
            .map(|j| {
                if graph.is_root(j) {
                    Mechanism::NoiseOnly
                } else {
                    Mechanism::Gp { bandwidth }
                }
            })
            .collect();
        Self {
            graph,
            mechanisms,
            noise: vec![noise; d],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.graph.n_nodes();
        if self.mechanisms.len() != d || self.noise.len() != d {
            return Err(invalid(format!(
                "SCM over {d} nodes has {} mechanisms and {} noise specs",
                self.mechanisms.len(),
                self.noise.len()
            )));
        }
        for (j, (mech, noise)) in self.mechanisms.iter().zip(&self.noise).enumerate() {
            noise.family.validate()?;
            let n_parents = self.graph.parents(j).len();
            match mech {
                Mechanism::NoiseOnly if n_parents == 0 => {}
                Mechanism::NoiseOnly => {
                    return Err(invalid(format!("node {j} has parents but no mechanism")))
                }
                _ if n_parents == 0 => {
                    return Err(invalid(format!("root node {j} must be noise-only")))
                }
                Mechanism::Gp { bandwidth } if !(*bandwidth > 0.0) => {
                    return Err(invalid(format!("node {j}: bandwidth must be positive")))
                }
                Mechanism::Gp { .. } => {}
                Mechanism::Additive { terms } if terms.len() != n_parents => {
                    return Err(invalid(format!(
                        "node {j}: {} additive terms for {n_parents} parents",
                        terms.len()
                    )))
                }
                Mechanism::Additive { .. } => {}
            }
        }
        Ok(())
    }
}

fn additive_value(terms: &[TestFunction], parents: &[usize], row: ArrayView1<f64>) -> f64 {
    terms.iter().zip(parents).map(|(t, &p)| t.eval(row[p])).sum()
}

/// Samples `n` rows from `spec`. Returns the dataset and the realized noise
/// matrix (same shape).
pub fn generate_dataset<R: Rng + ?Sized>(
    spec: &ScmSpec,
    n: usize,
    rng: &mut R,
) -> Result<(Dataset, Array2<f64>)> {
    spec.validate()?;
    let d = spec.graph.n_nodes();
    let mut noise = Array2::<f64>::zeros((n, d));
    for (j, ns) in spec.noise.iter().enumerate() {
        noise.column_mut(j).assign(&sample_noise(ns, n, rng)?);
    }
    let mut data = Array2::<f64>::zeros((n, d));
    for &v in topological_sort(&spec.graph)?.as_slice() {
        let parents = spec.graph.parents(v);
        let f: Array1<f64> = match &spec.mechanisms[v] {
            Mechanism::NoiseOnly => Array1::zeros(n),
            Mechanism::Gp { bandwidth } => {
                let pv = data.select(Axis(1), &parents);
                sample_gp_mechanism(pv.view(), *bandwidth, rng)?
            }
            Mechanism::Additive { terms } => data
                .rows()
                .into_iter()
                .map(|row| additive_value(terms, &parents, row))
                .collect(),
        };
        let col = &f + &noise.column(v);
        data.column_mut(v).assign(&col);
    }
    Ok((Dataset::new(data)?, noise))
}

/// SCM with closed-form additive mechanisms, for which the score
/// `grad log p(x)` is available exactly.
#[derive(Clone, Debug)]
pub struct AnalyticScmOracle {
    graph: Dag,
    terms: Vec<Vec<TestFunction>>,
    parents: Vec<Vec<usize>>,
    noise: Vec<NoiseSpec>,
}

impl AnalyticScmOracle {
    pub fn new(spec: &ScmSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.graph.n_nodes();
        let mut terms = Vec::with_capacity(d);
        for (j, m) in spec.mechanisms.iter().enumerate() {
            match m {
                Mechanism::NoiseOnly => terms.push(Vec::new()),
                Mechanism::Additive { terms: t } => terms.push(t.clone()),
                Mechanism::Gp { .. } => {
                    return Err(invalid(format!("node {j}: GP mechanisms have no closed form")))
                }
            }
        }
        Ok(Self {
            parents: (0..d).map(|j| spec.graph.parents(j)).collect(),
            graph: spec.graph.clone(),
            terms,
            noise: spec.noise.clone(),
        })
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn spec(&self) -> ScmSpec {
        ScmSpec {
            graph: self.graph.clone(),
            mechanisms: self
                .terms
                .iter()
                .map(|t| {
                    if t.is_empty() {
                        Mechanism::NoiseOnly
                    } else {
                        Mechanism::Additive { terms: t.clone() }
                    }
                })
                .collect(),
            noise: self.noise.clone(),
        }
    }

    /// Marginal model over `keep` after removing nodes that have no children
    /// among the kept ones. Dropping sinks leaves the remaining factors of the
    /// joint density unchanged.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let d = self.graph.n_nodes();
        let mut kept = vec![false; d];
        for &k in keep {
            if k >= d || kept[k] {
                return Err(invalid(format!("bad node list {keep:?}")));
            }
            kept[k] = true;
        }
        for &k in keep {
            if let Some(&p) = self.parents[k].iter().find(|&&p| !kept[p]) {
                return Err(invalid(format!(
                    "removed node {p} is a parent of kept node {k}; marginal is not an ANM"
                )));
            }
        }
        let graph = self.graph.induced(keep);
        let spec = ScmSpec {
            mechanisms: keep
                .iter()
                .map(|&k| {
                    if self.terms[k].is_empty() {
                        Mechanism::NoiseOnly
                    } else {
                        Mechanism::Additive {
                            terms: self.terms[k].clone(),
                        }
                    }
                })
                .collect(),
            noise: keep.iter().map(|&k| self.noise[k]).collect(),
            graph,
        };
        Self::new(&spec)
    }

    fn residual(&self, j: usize, row: ArrayView1<f64>) -> f64 {
        row[j] - additive_value(&self.terms[j], &self.parents[j], row)
    }

    /// Joint log-density at one observation.
    pub fn log_density(&self, row: ArrayView1<f64>) -> Result<f64> {
        let mut total = 0.0;
        for j in 0..self.graph.n_nodes() {
            let r = self.residual(j, row);
            total += self.noise[j].log_pdf(r).ok_or_else(|| {
                Error::OutOfSupport(format!("node {j} noise value {r} outside support"))
            })?;
        }
        Ok(total)
    }

    /// Exact score at one observation:
    /// `s_i = g_i'(n_i) - sum_{c in children(i)} df_c/dx_i * g_c'(n_c)`.
    pub fn score_row(&self, row: ArrayView1<f64>) -> Result<Vec<f64>> {
        let d = self.graph.n_nodes();
        let mut g = vec![0.0; d];
        for (j, gj) in g.iter_mut().enumerate() {
            let r = self.residual(j, row);
            *gj = self.noise[j].dlog_pdf(r).ok_or_else(|| {
                Error::OutOfSupport(format!("node {j} noise value {r} outside support"))
            })?;
        }
        let mut s = g.clone();
        for c in 0..d {
            for (t, &p) in self.terms[c].iter().zip(&self.parents[c]) {
                s[p] -= t.deriv(row[p]) * g[c];
            }
        }
        Ok(s)
    }
}

/// Exact score matrix of `x` under the oracle model.
pub fn analytic_score(oracle: &AnalyticScmOracle, x: &Dataset) -> Result<ScoreEstimate> {
    let d = oracle.graph.n_nodes();
    if x.d() != d {
        return Err(invalid(format!("dataset has {} columns, oracle {d}", x.d())));
    }
    let mut s = Array2::zeros((x.n(), d));
    for (k, row) in x.view().rows().into_iter().enumerate() {
        let sr = oracle.score_row(row)?;
        s.row_mut(k).assign(&Array1::from(sr));
    }
    Ok(ScoreEstimate { s, jac_diag: None })
}
