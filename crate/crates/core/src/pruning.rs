//! Edge pruning of the complete DAG admitted by an ordering.
//!
//! Each node is regressed on an additive spline expansion of all of its
//! predecessors. A candidate parent keeps its edge when the nested-model
//! F-test for dropping its spline block has a p-value below the cutoff.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::graph::{Dag, Ordering};

/// Relative norm below which a design column counts as linearly dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneConfig {
    pub cutoff: f64,
    /// B-spline basis functions per candidate parent.
    pub basis_size: usize,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            cutoff: 0.001,
            basis_size: 10,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(invalid(format!("cutoff must lie in (0, 1), got {}", self.cutoff)));
        }
        if self.basis_size < 3 {
            return Err(invalid(format!("basis_size must be >= 3, got {}", self.basis_size)));
        }
        Ok(())
    }
}

/// Clamped B-spline basis of `n_basis` functions over the range of `x`, with
/// interior knots at empirical quantiles. Cubic unless `n_basis < 4`.
/// Coinciding knots are merged, which can reduce the column count.
pub fn bspline_basis(x: ArrayView1<f64>, n_basis: usize) -> Array2<f64> {
    let degree = 3.min(n_basis - 1);
    let n_interior = n_basis - degree - 1;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let mut knots = vec![lo; degree + 1];
    let mut last = lo;
    for k in 1..=n_interior {
        let q = quantile(&sorted, k as f64 / (n_interior + 1) as f64);
        if q > last && q < hi {
            knots.push(q);
            last = q;
        }
    }
    knots.extend(std::iter::repeat_n(hi, degree + 1));
    let n_cols = knots.len() - degree - 1;
    let mut out = Array2::zeros((x.len(), n_cols));
    if hi <= lo {
        // Constant input: only the intercept-like column carries information.
        out.column_mut(0).fill(1.0);
        return out;
    }
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    for (r, &v) in x.iter().enumerate() {
        let span = find_span(&knots, degree, n_cols, v);
        // Non-zero basis functions at v (de Boor / Cox recursion).
        n[0] = 1.0;
        for j in 1..=degree {
            left[j] = v - knots[span + 1 - j];
            right[j] = knots[span + j] - v;
            let mut saved = 0.0;
            for k in 0..j {
                let tmp = n[k] / (right[k + 1] + left[j - k]);
                n[k] = saved + right[k + 1] * tmp;
                saved = left[j - k] * tmp;
            }
            n[j] = saved;
        }
        for j in 0..=degree {
            out[[r, span - degree + j]] = n[j];
        }
    }
    out
}

fn find_span(knots: &[f64], degree: usize, n_cols: usize, v: f64) -> usize {
    if v >= knots[n_cols] {
        return n_cols - 1;
    }
    let mut lo = degree;
    let mut hi = n_cols;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if v < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Least-squares fit by modified Gram-Schmidt with one re-orthogonalization
/// pass. Columns that are numerically dependent on earlier ones are skipped.
struct LeastSquares {
    rss: f64,
    rank: usize,
    dropped: usize,
}

fn least_squares<'a>(cols: impl Iterator<Item = &'a Array1<f64>>, y: ArrayView1<f64>) -> LeastSquares {
    let mut basis: Vec<Array1<f64>> = Vec::new();
    let mut dropped = 0;
    for c in cols {
        let norm0 = c.dot(c).sqrt();
        if norm0 == 0.0 {
            dropped += 1;
            continue;
        }
        let mut w = c.clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&w);
                w.scaled_add(-proj, q);
            }
        }
        let norm = w.dot(&w).sqrt();
        if norm <= RANK_TOL * norm0 {
            dropped += 1;
            continue;
        }
        w /= norm;
        basis.push(w);
    }
    let mut r = y.to_owned();
    for q in &basis {
        let proj = q.dot(&r);
        r.scaled_add(-proj, q);
    }
    LeastSquares {
        rss: r.dot(&r),
        rank: basis.len(),
        dropped,
    }
}

/// p-value of the F-test comparing nested least-squares fits.
fn nested_f_pvalue(full: &LeastSquares, reduced: &LeastSquares, n: usize) -> f64 {
    let df1 = full.rank.saturating_sub(reduced.rank);
    if df1 == 0 {
        return 1.0;
    }
    let df2 = n.saturating_sub(full.rank);
    let gain = (reduced.rss - full.rss).max(0.0);
    if df2 == 0 || full.rss <= f64::EPSILON * reduced.rss.max(f64::MIN_POSITIVE) {
        return if gain > 0.0 { 0.0 } else { 1.0 };
    }
    let f = (gain / df1 as f64) / (full.rss / df2 as f64);
    match FisherSnedecor::new(df1 as f64, df2 as f64) {
        Ok(dist) => dist.sf(f),
        Err(_) => 1.0,
    }
}

/// p-values for every candidate edge `u -> v` with `u` before `v` in the
/// order. Entries for non-candidates are NaN.
pub fn edge_pvalues(x: &Dataset, order: &Ordering, cfg: &PruneConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let d = x.d();
    if order.len() != d {
        return Err(invalid(format!("ordering over {} nodes for {d} columns", order.len())));
    }
    let n = x.n();
    let perm = order.as_slice();
    // Spline block per variable, minus one column to stay clear of the
    // intercept (B-splines sum to one).
    let blocks: Vec<Vec<Array1<f64>>> = (0..d)
        .map(|j| {
            let b = bspline_basis(x.column(j), cfg.basis_size);
            b.columns().into_iter().skip(1).map(|c| c.to_owned()).collect()
        })
        .collect();
    let ones = Array1::from_elem(n, 1.0);
    let rows: Vec<Vec<(usize, f64)>> = (1..d)
        .into_par_iter()
        .map(|pos| {
            let v = perm[pos];
            let preds = &perm[..pos];
            let y = x.column(v);
            let design = |skip: Option<usize>| {
                std::iter::once(&ones).chain(
                    preds
                        .iter()
                        .filter(move |&&p| Some(p) != skip)
                        .flat_map(|&p| blocks[p].iter()),
                )
            };
            let full = least_squares(design(None), y);
            if full.dropped > 0 {
                log::warn!(
                    "node {v}: dropped {} dependent spline columns from the pruning design",
                    full.dropped
                );
            }
            preds
                .iter()
                .map(|&p| {
                    let reduced = least_squares(design(Some(p)), y);
                    (p, nested_f_pvalue(&full, &reduced, n))
                })
                .collect()
        })
        .collect();
    let mut pv = Array2::from_elem((d, d), f64::NAN);
    for (pos, row) in rows.into_iter().enumerate() {
        let v = perm[pos + 1];
        for (p, val) in row {
            pv[[p, v]] = val;
        }
    }
    Ok(pv)
}

/// Keeps edge `u -> v` iff its p-value is below `cfg.cutoff`. The result is
/// always a subgraph of the complete DAG admitted by `order`.
pub fn prune(x: &Dataset, order: &Ordering, cfg: &PruneConfig) -> Result<Dag> {
    let pv = edge_pvalues(x, order, cfg)?;
    Ok(threshold(&pv, cfg.cutoff))
}

/// Graph of the candidate edges whose p-value is below `cutoff`.
pub fn threshold(pvalues: &Array2<f64>, cutoff: f64) -> Dag {
    let d = pvalues.nrows();
    let mut edges = Vec::new();
    for ((u, v), &p) in pvalues.indexed_iter() {
        if p < cutoff {
            edges.push((u, v));
        }
    }
    Dag::from_edges(d, &edges).expect("candidate edges follow the ordering")
}
