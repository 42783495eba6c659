//! Kernel Stein estimators of the score `grad log p(x)` and of the diagonal
//! of its Jacobian.
//!
//! With an RBF Gram matrix `K` over the samples and bandwidth `h`, the
//! first-order estimate is `G = (K + eta I)^{-1} B` where
//! `B_k = -sum_i (x_k - x_i) K_ik / h^2`. The second-order estimate of
//! `d s_j / d x_j` is `-G^2 + (K + eta I)^{-1} C` with
//! `C_kj = sum_i (-1/h^2 + (x_kj - x_ij)^2 / h^4) K_ik`.

use faer::Mat;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::{mat_to_array, sq_dists_self, Cholesky};

/// Estimated score entries, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreEstimate {
    pub s: Array2<f64>,
    pub jac_diag: Option<Array2<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median distance over all sample pairs.
    #[default]
    MedianHeuristic,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SteinConfig {
    pub eta: f64,
    pub bandwidth: Bandwidth,
}

impl Default for SteinConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

impl SteinConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid(format!("Stein eta must be positive, got {}", self.eta)));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid(format!("Stein bandwidth must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Median of the pairwise Euclidean distances `|x_i - x_j|`, `i < j`.
pub fn median_pairwise_distance(x: ArrayView2<f64>) -> f64 {
    let d2 = sq_dists_self(x);
    median_from_sq(&d2)
}

fn median_from_sq(d2: &Mat<f64>) -> f64 {
    let n = d2.nrows();
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for i in (j + 1)..n {
            v.push(d2[(i, j)]);
        }
    }
    if v.is_empty() {
        return 0.0;
    }
    let mid = v.len() / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let med = if v.len() % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    };
    med.sqrt()
}

struct SteinSystem {
    k: Mat<f64>,
    chol: Cholesky,
    row_sums: Vec<f64>,
    bandwidth: f64,
}

impl SteinSystem {
    fn new(x: ArrayView2<f64>, cfg: &SteinConfig) -> Result<Self> {
        cfg.validate()?;
        let n = x.nrows();
        if n < 2 {
            return Err(invalid(format!("Stein estimator needs n >= 2, got {n}")));
        }
        let mut k = sq_dists_self(x);
        let bandwidth = match cfg.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::MedianHeuristic => median_from_sq(&k),
        };
        if !(bandwidth > 0.0) {
            return Err(Error::Numerical(
                "zero median pairwise distance; samples are degenerate".into(),
            ));
        }
        let scale = -0.5 / (bandwidth * bandwidth);
        let mut row_sums = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                let v = (k[(i, j)] * scale).exp();
                k[(i, j)] = v;
                row_sums[j] += v;
            }
        }
        let mut reg = k.clone();
        for i in 0..n {
            reg[(i, i)] += cfg.eta;
        }
        let chol = Cholesky::new(reg.as_ref())?;
        Ok(Self {
            k,
            chol,
            row_sums,
            bandwidth,
        })
    }

    /// `G = (K + eta I)^{-1} B` as an `n x d` faer matrix.
    fn first_order(&self, x: &Mat<f64>) -> Mat<f64> {
        let (n, d) = (x.nrows(), x.ncols());
        let h2 = self.bandwidth * self.bandwidth;
        let kx = &self.k * x;
        let b = Mat::<f64>::from_fn(n, d, |k, j| -(self.row_sums[k] * x[(k, j)] - kx[(k, j)]) / h2);
        self.chol.solve(b.as_ref())
    }
}

fn check_data(x: &Dataset) -> Result<()> {
    let v = x.view();
    let first = v.row(0);
    if v.rows().into_iter().all(|r| r == first) {
        return Err(Error::Numerical("all samples are identical".into()));
    }
    Ok(())
}

/// Stein gradient estimate of the score at every sample.
pub fn stein_score(x: &Dataset, cfg: &SteinConfig) -> Result<ScoreEstimate> {
    check_data(x)?;
    let sys = SteinSystem::new(x.view(), cfg)?;
    let xm = crate::linalg::array_to_mat(x.view());
    let g = sys.first_order(&xm);
    Ok(ScoreEstimate {
        s: mat_to_array(g.as_ref()),
        jac_diag: None,
    })
}

/// Score and Jacobian-diagonal estimates from one shared factorization.
pub fn stein_score_with_jacobian(x: &Dataset, cfg: &SteinConfig) -> Result<ScoreEstimate> {
    check_data(x)?;
    let sys = SteinSystem::new(x.view(), cfg)?;
    let xm = crate::linalg::array_to_mat(x.view());
    let g = sys.first_order(&xm);
    let (n, d) = (xm.nrows(), xm.ncols());
    let h2 = sys.bandwidth * sys.bandwidth;
    let h4 = h2 * h2;
    // sum_i (x_kj - x_ij)^2 K_ik = x_kj^2 r_k - 2 x_kj (K x)_kj + (K x^2)_kj
    let x2 = Mat::<f64>::from_fn(n, d, |i, j| xm[(i, j)] * xm[(i, j)]);
    let kx = &sys.k * &xm;
    let kx2 = &sys.k * &x2;
    let c = Mat::<f64>::from_fn(n, d, |k, j| {
        let xv = xm[(k, j)];
        let r = sys.row_sums[k];
        let quad = xv * xv * r - 2.0 * xv * kx[(k, j)] + kx2[(k, j)];
        -r / h2 + quad / h4
    });
    let hc = sys.chol.solve(c.as_ref());
    let jac = Array2::from_shape_fn((n, d), |(k, j)| hc[(k, j)] - g[(k, j)] * g[(k, j)]);
    Ok(ScoreEstimate {
        s: mat_to_array(g.as_ref()),
        jac_diag: Some(jac),
    })
}

/// Per-sample estimates of `d s_i / d x_i`.
pub fn stein_jacobian_diag(x: &Dataset, cfg: &SteinConfig) -> Result<Array2<f64>> {
    Ok(stein_score_with_jacobian(x, cfg)?
        .jac_diag
        .expect("jacobian requested"))
}
