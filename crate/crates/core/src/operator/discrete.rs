//! Grid realisation of `(-Δ)^s` in one dimension with a spatially constant
//! exterior value.
//!
//! The field is extended by its piecewise-linear interpolant on `[-L, L]`
//! (taking the exterior value at `±L`) and by the exterior value outside.
//! Integrating the kernel exactly against each hat function gives
//!
//! ```text
//! (Au)_i = C_{1,s} [ Σ_{j≠i} w_{|i-j|} (u_i - u_j) + (τᴸ_i + τᴿ_i)(u_i - g) ]
//! ```
//!
//! where `τ` collects the exact exterior integral `(L ∓ x_i)^{-2s}/(2s)` and
//! the half-hat adjacent to the boundary.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::Grid1D;
use crate::special::c_ns;

/// Exterior value of a field on `ℝ \ (-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDatum {
    pub value: f64,
}

impl ExteriorDatum {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(domain(format!("exterior value must be finite, got {value}")));
        }
        Ok(Self { value })
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteFracOp {
    s: f64,
    grid: Grid1D,
    scale: f64,
    /// `w_k` for node offset `k ≥ 1` (index 0 unused).
    offset_weights: Vec<f64>,
    tails: Vec<(f64, f64)>,
}

/// Second antiderivative of `t^{-1-2s}` on `t ≥ 0`, vanishing at 0.
fn double_antiderivative(t: f64, s: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t.powf(1.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s))
    }
}

/// `∫` of the half hat that is 1 at distance `d - h` and 0 at `d`, against
/// `t^{-1-2s}`, over `t ∈ [d - h, d]`.
fn boundary_half_hat(d: f64, h: f64, s: f64) -> f64 {
    let e = (d - h).max(0.0);
    let p = 1.0 - 2.0 * s;
    let first = (d.powf(p) - e.powf(p)) / p;
    let second = if e > 0.0 { (e.powf(p) - e * d.powf(-2.0 * s)) / (2.0 * s) } else { 0.0 };
    (first - second) / h
}

/// Builds the operator for `s ∈ (0, 1/2)` on a grid with at least 3 nodes.
pub fn build_discrete_op(grid: &Grid1D, s: f64) -> Result<DiscreteFracOp> {
    if !(s > 0.0 && s < 0.5) {
        return Err(domain(format!("grid operator requires s in (0, 1/2), got {s}")));
    }
    if grid.len() < 3 {
        return Err(domain(format!("grid operator needs at least 3 nodes, got {}", grid.len())));
    }
    let n = grid.len();
    let h = grid.spacing();
    let l = grid.half_width();
    let mut offset_weights = vec![0.0; n];
    for (k, w) in offset_weights.iter_mut().enumerate().skip(1) {
        let d = k as f64 * h;
        *w = (double_antiderivative(d + h, s) - 2.0 * double_antiderivative(d, s)
            + double_antiderivative(d - h, s))
            / h;
    }
    let exterior = |dist: f64| dist.powf(-2.0 * s) / (2.0 * s);
    let tails = (0..n)
        .map(|i| {
            let x = grid.node(i);
            // distances to the boundary points, counted in cells to keep the
            // left/right pair mirror-exact
            let left = (i + 1) as f64 * h;
            let right = (n - i) as f64 * h;
            debug_assert!((left - (x + l)).abs() < 1e-9 * l);
            (
                exterior(left) + boundary_half_hat(left, h, s),
                exterior(right) + boundary_half_hat(right, h, s),
            )
        })
        .collect();
    Ok(DiscreteFracOp { s, grid: grid.clone(), scale: c_ns(1, s)?, offset_weights, tails })
}

impl DiscreteFracOp {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `C_{1,s}`; every weight below is unscaled.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Interior weight `w_ij` (zero on the diagonal).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.offset_weights[i.abs_diff(j)]
    }

    /// Unscaled `(τᴸ_i, τᴿ_i)`.
    pub fn tail(&self, i: usize) -> (f64, f64) {
        self.tails[i]
    }

    /// Unscaled `τᴸ_i + τᴿ_i`.
    pub fn tail_sum(&self, i: usize) -> f64 {
        let (l, r) = self.tails[i];
        l + r
    }

    /// Scaled diagonal entry of the system matrix.
    pub fn diagonal(&self, i: usize) -> f64 {
        let n = self.len();
        let interior: f64 = (0..n).filter(|&j| j != i).map(|j| self.weight(i, j)).sum();
        self.scale * (interior + self.tail_sum(i))
    }

    /// Scaled dense matrix `A` such that `(Au)_i - C·τ_i·g` is the action on
    /// `u` with exterior value `g`.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    let w = self.weight(i, j);
                    m[(i, j)] = -self.scale * w;
                    row += w;
                }
            }
            m[(i, i)] = self.scale * (row + self.tail_sum(i));
        }
        m
    }

    /// Scaled tail vector `C·τ_i`; the exterior contribution to the
    /// right-hand side of a linear solve is this times `g`.
    pub fn tail_vector(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.scale * self.tail_sum(i)).collect()
    }
}

/// `A·field` with exterior value `exterior`, evaluated in difference form so
/// constant fields with matching exterior map to exactly zero.
pub fn apply_discrete(op: &DiscreteFracOp, field: &[f64], exterior: ExteriorDatum) -> Result<Vec<f64>> {
    let n = op.len();
    if field.len() != n {
        return Err(domain(format!("field has {} values, grid has {n} nodes", field.len())));
    }
    let g = exterior.value;
    Ok((0..n)
        .map(|i| {
            let ui = field[i];
            let mut acc = 0.0;
            for (j, &uj) in field.iter().enumerate() {
                if j != i {
                    acc += op.weight(i, j) * (ui - uj);
                }
            }
            acc += op.tail_sum(i) * (ui - g);
            op.scale * acc
        })
        .collect())
}
