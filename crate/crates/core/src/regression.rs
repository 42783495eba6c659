//! Kernel ridge and L1-penalized linear regression, K-fold out-of-fold
//! prediction, and per-variable residual estimation.

use std::ops::Range;

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::linalg::{sq_dists, sq_dists_self, Cholesky};

const LASSO_TOL: f64 = 1e-6;
const LASSO_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    /// RBF kernel ridge without intercept.
    KernelRidge,
    /// Lasso with an unpenalized intercept.
    LinearL1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorConfig {
    pub kind: RegressorKind,
    /// Ridge strength for `KernelRidge`, L1 weight for `LinearL1`.
    pub alpha: f64,
    /// RBF width in `exp(-gamma |u - v|^2)`.
    pub gamma: f64,
    pub folds: usize,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            kind: RegressorKind::KernelRidge,
            alpha: 0.01,
            gamma: 0.1,
            folds: 5,
        }
    }
}

impl RegressorConfig {
    pub fn lasso(alpha: f64) -> Self {
        Self {
            kind: RegressorKind::LinearL1,
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.kind == RegressorKind::KernelRidge && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.folds < 2 {
            return Err(invalid(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }
}

fn check_xy(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(invalid("empty training set"));
    }
    if x.nrows() != y.len() {
        return Err(invalid(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
        return Err(invalid("training data must be finite"));
    }
    Ok(())
}

fn rbf_in_place(k: &mut Mat<f64>, gamma: f64) {
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            k[(i, j)] = (-gamma * k[(i, j)]).exp();
        }
    }
}

/// Solves `(K_train + alpha I) w = y` and returns `K_test w`.
pub fn kr_fit_predict(
    x_train: ArrayView2<f64>,
    y_train: ArrayView1<f64>,
    x_test: ArrayView2<f64>,
    cfg: &RegressorConfig,
) -> Result<Array1<f64>> {
    check_xy(x_train, y_train)?;
    if x_test.ncols() != x_train.ncols() {
        return Err(invalid("train and test feature counts differ"));
    }
    let m = x_train.nrows();
    let mut k = sq_dists_self(x_train);
    rbf_in_place(&mut k, cfg.gamma);
    for i in 0..m {
        k[(i, i)] += cfg.alpha;
    }
    let chol = Cholesky::new(k.as_ref())?;
    let w = chol.solve(crate::linalg::column_to_mat(y_train).as_ref());
    let mut kt = sq_dists(x_test, x_train);
    rbf_in_place(&mut kt, cfg.gamma);
    let pred = &kt * &w;
    Ok(crate::linalg::mat_column(pred.as_ref(), 0))
}

/// Lasso coefficients for `(1 / 2n) |y - b - X w|^2 + alpha |w|_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LassoFit {
    pub coef: Array1<f64>,
    pub intercept: f64,
}

impl LassoFit {
    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.dot(&self.coef) + self.intercept
    }
}

/// Cyclic coordinate descent on centered data.
pub fn lasso_fit(x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64) -> Result<LassoFit> {
    check_xy(x, y)?;
    let (n, p) = x.dim();
    let nf = n as f64;
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let y_mean = y.mean().expect("non-empty");
    let xc = &x - &x_mean;
    let col_sq: Vec<f64> = xc.columns().into_iter().map(|c| c.dot(&c) / nf).collect();
    let mut w = Array1::<f64>::zeros(p);
    let mut resid = &y - y_mean;
    for _ in 0..LASSO_MAX_ITER {
        let mut max_step = 0.0f64;
        let mut max_w = 0.0f64;
        for j in 0..p {
            if col_sq[j] <= 0.0 {
                continue;
            }
            let col = xc.column(j);
            let old = w[j];
            let rho = col.dot(&resid) / nf + col_sq[j] * old;
            let new = soft_threshold(rho, alpha) / col_sq[j];
            if new != old {
                resid.scaled_add(old - new, &col);
                w[j] = new;
            }
            max_step = max_step.max((new - old).abs());
            max_w = max_w.max(new.abs());
        }
        if max_step <= LASSO_TOL * max_w.max(1.0) {
            break;
        }
    }
    let intercept = y_mean - x_mean.dot(&w);
    Ok(LassoFit { coef: w, intercept })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Fits on the training split and predicts `x_test` with the configured model.
pub fn fit_predict(
    x_train: ArrayView2<f64>,
    y_train: ArrayView1<f64>,
    x_test: ArrayView2<f64>,
    cfg: &RegressorConfig,
) -> Result<Array1<f64>> {
    cfg.validate()?;
    match cfg.kind {
        RegressorKind::KernelRidge => kr_fit_predict(x_train, y_train, x_test, cfg),
        RegressorKind::LinearL1 => Ok(lasso_fit(x_train, y_train, cfg.alpha)?.predict(x_test)),
    }
}

/// Contiguous folds; the first `n % k` folds get one extra sample.
pub fn fold_ranges(n: usize, k: usize) -> Vec<Range<usize>> {
    let base = n / k;
    let extra = n % k;
    let mut start = 0;
    (0..k)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Out-of-fold predictions: sample `i` is predicted by the model trained on
/// every fold except the one containing `i`.
pub fn oof_predict(x: ArrayView2<f64>, y: ArrayView1<f64>, cfg: &RegressorConfig) -> Result<Array1<f64>> {
    cfg.validate()?;
    check_xy(x, y)?;
    let n = x.nrows();
    if cfg.folds > n {
        return Err(invalid(format!("{} folds for {n} samples", cfg.folds)));
    }
    let folds = fold_ranges(n, cfg.folds);
    let mut out = Array1::<f64>::zeros(n);
    match cfg.kind {
        RegressorKind::KernelRidge => {
            // One Gram matrix serves every fold.
            let mut g = sq_dists_self(x);
            rbf_in_place(&mut g, cfg.gamma);
            for test in &folds {
                let train: Vec<usize> = (0..test.start).chain(test.end..n).collect();
                let m = train.len();
                let a = Mat::<f64>::from_fn(m, m, |i, j| {
                    g[(train[i], train[j])] + if i == j { cfg.alpha } else { 0.0 }
                });
                let chol = Cholesky::new(a.as_ref())?;
                let rhs = Mat::<f64>::from_fn(m, 1, |i, _| y[train[i]]);
                let w = chol.solve(rhs.as_ref());
                for t in test.clone() {
                    out[t] = train.iter().enumerate().map(|(i, &s)| g[(t, s)] * w[(i, 0)]).sum();
                }
            }
        }
        RegressorKind::LinearL1 => {
            for test in &folds {
                let train: Vec<usize> = (0..test.start).chain(test.end..n).collect();
                let fit = lasso_fit(x.select(Axis(0), &train).view(), y.select(Axis(0), &train).view(), cfg.alpha)?;
                let pred = fit.predict(x.slice(ndarray::s![test.clone(), ..]));
                out.slice_mut(ndarray::s![test.clone()]).assign(&pred);
            }
        }
    }
    Ok(out)
}

/// Out-of-fold residuals `X_i - E[X_i | X_{-i}]`, one column per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualMatrix(pub Array2<f64>);

impl ResidualMatrix {
    pub fn column(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.column(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }
}

pub fn estimate_residuals(x: &Dataset, cfg: &RegressorConfig) -> Result<ResidualMatrix> {
    cfg.validate()?;
    let (n, d) = (x.n(), x.d());
    if d == 1 {
        let col = x.column(0);
        let m = col.mean().expect("non-empty");
        return Ok(ResidualMatrix(col.mapv(|v| v - m).insert_axis(Axis(1))));
    }
    let cols: Vec<Array1<f64>> = (0..d)
        .into_par_iter()
        .map(|i| {
            let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
            let xi = x.view().select(Axis(1), &others);
            let pred = oof_predict(xi.view(), x.column(i), cfg)?;
            Ok(&x.column(i) - &pred)
        })
        .collect::<Result<_>>()?;
    let mut r = Array2::zeros((n, d));
    for (i, c) in cols.into_iter().enumerate() {
        r.column_mut(i).assign(&c);
    }
    Ok(ResidualMatrix(r))
}
