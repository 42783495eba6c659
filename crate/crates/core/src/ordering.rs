//! Topological-order inference by iterative leaf removal.
//!
//! NoGAM picks as leaf the node whose score entry is best predicted from its
//! own regression residual: for a leaf `l`, `s_l(X)` is a function of the
//! noise `N_l` alone and the residual of `X_l` on all other variables equals
//! that noise. The SCORE baseline picks the node whose Jacobian-diagonal
//! estimate has the smallest variance.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::graph::Ordering;
use crate::regression::{estimate_residuals, oof_predict, RegressorConfig};
use crate::stein::{stein_jacobian_diag, stein_score, SteinConfig};

/// Selection statistics of one leaf-removal step. `nodes` are original
/// column ids, `stat[a]` belongs to `nodes[a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub nodes: Vec<usize>,
    pub stat: Vec<f64>,
    pub chosen: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub order: Ordering,
    pub iterations: Vec<IterationRecord>,
}

impl OrderingResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ordering result serializes")
    }
}

/// Out-of-fold MSE of predicting each score column from its residual.
pub fn leaf_mse_from_scores(
    x: &Dataset,
    scores: ArrayView2<f64>,
    reg: &RegressorConfig,
) -> Result<Vec<f64>> {
    let residuals = estimate_residuals(x, reg)?;
    (0..x.d())
        .into_par_iter()
        .map(|i| {
            let r = residuals.column(i).insert_axis(Axis(1));
            let s = scores.column(i);
            let pred = oof_predict(r, s, reg)?;
            Ok(s.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / s.len() as f64)
        })
        .collect()
}

/// Leaf-selection statistic for every column of `x`, using Stein score
/// estimates.
pub fn leaf_mse_scores(x: &Dataset, reg: &RegressorConfig, stein: &SteinConfig) -> Result<Vec<f64>> {
    let est = stein_score(x, stein)?;
    leaf_mse_from_scores(x, est.s.view(), reg)
}

/// Smallest statistic; ties resolve to the first (smallest node id) entry.
fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &val) in v.iter().enumerate().skip(1) {
        if val < v[best] {
            best = i;
        }
    }
    best
}

/// Shared leaf-peeling loop. `stat_fn` receives the reduced dataset and the
/// original ids of its columns.
pub fn peel_leaves<F>(x: &Dataset, mut stat_fn: F) -> Result<OrderingResult>
where
    F: FnMut(&Dataset, &[usize]) -> Result<Vec<f64>>,
{
    let d = x.d();
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut reversed = Vec::with_capacity(d);
    let mut iterations = Vec::with_capacity(d);
    while remaining.len() > 1 {
        let sub = x.select_columns(&remaining);
        let stat = stat_fn(&sub, &remaining)?;
        debug_assert_eq!(stat.len(), remaining.len());
        let idx = argmin(&stat);
        let chosen = remaining[idx];
        log::debug!("nodes {remaining:?}: stat {stat:?} -> leaf {chosen}");
        iterations.push(IterationRecord {
            nodes: remaining.clone(),
            stat,
            chosen,
        });
        reversed.push(chosen);
        remaining.remove(idx);
    }
    let last = remaining[0];
    iterations.push(IterationRecord {
        nodes: vec![last],
        stat: Vec::new(),
        chosen: last,
    });
    reversed.push(last);
    reversed.reverse();
    Ok(OrderingResult {
        order: Ordering::new(reversed)?,
        iterations,
    })
}

/// NoGAM ordering with the Stein score recomputed on the remaining columns
/// at every step.
pub fn nogam_order(x: &Dataset, reg: &RegressorConfig, stein: &SteinConfig) -> Result<OrderingResult> {
    reg.validate()?;
    stein.validate()?;
    peel_leaves(x, |sub, _| leaf_mse_scores(sub, reg, stein))
}

/// SCORE baseline: leaf = argmin of the per-node variance of the estimated
/// Jacobian diagonal.
pub fn score_order(x: &Dataset, stein: &SteinConfig) -> Result<OrderingResult> {
    stein.validate()?;
    peel_leaves(x, |sub, _| jacobian_variances(sub, stein))
}

pub fn jacobian_variances(x: &Dataset, stein: &SteinConfig) -> Result<Vec<f64>> {
    let h: Array2<f64> = stein_jacobian_diag(x, stein)?;
    Ok(h.var_axis(Axis(0), 0.0).to_vec())
}
