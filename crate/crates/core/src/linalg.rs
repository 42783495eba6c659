//! Dense kernel matrices and SPD solves backed by faer.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Mat, MatRef, Side};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Squared Euclidean distances between the rows of `a` and the rows of `b`.
pub(crate) fn sq_dists(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Mat<f64> {
    let k = a.ncols();
    debug_assert_eq!(k, b.ncols());
    Mat::from_fn(a.nrows(), b.nrows(), |i, j| {
        let mut s = 0.0;
        for c in 0..k {
            let t = a[[i, c]] - b[[j, c]];
            s += t * t;
        }
        s
    })
}

/// Symmetric squared distances among the rows of `x`, computed once per pair.
pub(crate) fn sq_dists_self(x: ArrayView2<f64>) -> Mat<f64> {
    let n = x.nrows();
    let k = x.ncols();
    let mut out = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let mut s = 0.0;
            for c in 0..k {
                let t = x[[i, c]] - x[[j, c]];
                s += t * t;
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// Cholesky factor of an SPD matrix.
pub(crate) struct Cholesky {
    llt: Llt<f64>,
}

impl Cholesky {
    pub(crate) fn new(a: MatRef<'_, f64>) -> Result<Self> {
        Llt::new(a, Side::Lower)
            .map(|llt| Self { llt })
            .map_err(|e| Error::Numerical(format!("Cholesky factorization failed: {e:?}")))
    }

    pub(crate) fn solve(&self, rhs: MatRef<'_, f64>) -> Mat<f64> {
        self.llt.solve(rhs)
    }

    pub(crate) fn lower(&self) -> MatRef<'_, f64> {
        self.llt.L()
    }
}

pub(crate) fn column_to_mat(v: ArrayView1<f64>) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn array_to_mat(a: ArrayView2<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn mat_to_array(m: MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub(crate) fn mat_column(m: MatRef<'_, f64>, j: usize) -> Array1<f64> {
    Array1::from_shape_fn(m.nrows(), |i| m[(i, j)])
}

