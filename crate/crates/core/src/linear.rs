//! Symmetric form of the level systems.
//!
//! Every system solved here has the shape `(diag(a)·A + diag(d))·u = r` with
//! `A` the symmetric discrete operator and `d ≥ 0`. Dividing row `i` by `aᵢ`
//! gives `(A + diag(d/a))·u = r/a`, which is symmetric positive definite, so a
//! single Cholesky factor serves every right-hand side.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{domain, Error, Result};
use crate::operator::DiscreteFracOp;

pub(crate) struct SpdSystem {
    factor: Cholesky<f64, Dyn>,
    a: Vec<f64>,
}

impl SpdSystem {
    /// Factors `A + diag(dᵢ/aᵢ)`.
    pub(crate) fn new(op: &DiscreteFracOp, a: &[f64], d: &[f64]) -> Result<Self> {
        let n = op.len();
        if a.len() != n || d.len() != n {
            return Err(domain("coefficient vectors do not match the grid"));
        }
        if let Some(i) = (0..n).find(|&i| !(a[i] > 0.0) || !(d[i] >= 0.0)) {
            return Err(domain(format!("node {i}: need a > 0 and a nonnegative shift, got a = {}, shift = {}", a[i], d[i])));
        }
        let mut m = op.dense_matrix();
        for i in 0..n {
            m[(i, i)] += d[i] / a[i];
        }
        let factor = Cholesky::new(m).ok_or_else(|| Error::Numerical("level matrix is not positive definite".into()))?;
        Ok(Self { factor, a: a.to_vec() })
    }

    /// Solves `(diag(a)·A + diag(d))·u = r`.
    pub(crate) fn solve(&self, r: &[f64]) -> Vec<f64> {
        let b = DVector::from_iterator(r.len(), r.iter().zip(&self.a).map(|(ri, ai)| ri / ai));
        self.factor.solve(&b).iter().copied().collect()
    }
}

/// `diag(a)·A + diag(d)` in unscaled form, for inspection.
pub(crate) fn system_matrix(op: &DiscreteFracOp, a: &[f64], d: &[f64]) -> DMatrix<f64> {
    let mut m = op.dense_matrix();
    for i in 0..op.len() {
        for j in 0..op.len() {
            m[(i, j)] *= a[i];
        }
        m[(i, i)] += d[i];
    }
    m
}
