//! `a(-Δ)^s u - cu = f` on nested intervals `(-L, L)` with `u = γ` outside.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::barriers::GlobalBarrierH;
use crate::coefficients::CoefficientField;
use crate::error::{domain, Error, Result};
use crate::grid::Grid1D;
use crate::linear::{system_matrix, SpdSystem};
use crate::operator::build_discrete_op;

/// Default stopping tolerance and window of the nested limit.
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_WINDOW: f64 = 5.0;

/// Slack allowed in the decay bound `|u - γ| ≤ M·h`.
pub const DECAY_BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticProblem {
    pub coeffs: CoefficientField,
    pub gamma: f64,
    pub s: f64,
}

impl EllipticProblem {
    pub fn new(coeffs: CoefficientField, gamma: f64, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 0.5) {
            return Err(domain(format!("s must lie in (0, 1/2), got {s}")));
        }
        if !gamma.is_finite() {
            return Err(domain("exterior value must be finite"));
        }
        if !coeffs.c_nonpositive() {
            return Err(Error::Hypothesis("the reaction coefficient must satisfy c ≤ 0".into()));
        }
        coeffs.validate(1, s, &[0.0, 1.0, 10.0, 1e3])?;
        Ok(Self { coeffs, gamma, s })
    }

    /// Same problem with a different exterior value.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    /// `M = ‖c‖∞|γ| + ‖f‖∞`.
    pub fn decay_constant(&self) -> f64 {
        self.coeffs.c_sup() * self.gamma.abs() + self.coeffs.f_sup()
    }
}

/// Node spacing rule shared by all levels of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    FixedSpacing { dx: f64 },
    FixedCount { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedSchedule {
    pub half_widths: Vec<f64>,
    pub resolution: Resolution,
}

impl NestedSchedule {
    pub fn new(half_widths: Vec<f64>, resolution: Resolution) -> Result<Self> {
        if half_widths.len() < 3 {
            return Err(domain("a nested schedule needs at least 3 levels"));
        }
        if half_widths[0] <= 0.0 || half_widths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("half-widths must be positive and strictly increasing"));
        }
        Ok(Self { half_widths, resolution })
    }

    /// `L_j = L₀·2^j`, `j < levels`.
    pub fn doubling(l0: f64, levels: usize, resolution: Resolution) -> Result<Self> {
        Self::new((0..levels).map(|j| l0 * 2f64.powi(j as i32)).collect(), resolution)
    }

    pub fn grid(&self, level: usize) -> Result<Grid1D> {
        let l = *self
            .half_widths
            .get(level)
            .ok_or_else(|| domain(format!("level {level} is beyond the schedule")))?;
        match self.resolution {
            Resolution::FixedSpacing { dx } => Grid1D::with_spacing(l, dx),
            Resolution::FixedCount { n } => Grid1D::new(l, n),
        }
    }
}

/// Node values on a grid plus the exterior value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub exterior: f64,
}

impl SolutionField {
    /// Value at the node at `x`, the exterior value outside the grid.
    pub fn value_at_node(&self, x: f64) -> Result<f64> {
        match self.grid.nearest(x) {
            None => Ok(self.exterior),
            Some(i) => {
                if (self.grid.node(i) - x).abs() > 1e-9 * self.grid.spacing() {
                    return Err(domain(format!("{x} is not a grid node")));
                }
                Ok(self.values[i])
            }
        }
    }

    /// `max |self - other|` over the nodes of `self` with `|x| ≤ window`;
    /// the grids must share those nodes.
    pub fn sup_diff(&self, other: &SolutionField, window: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in self.grid.window(window) {
            let d = (self.values[i] - other.value_at_node(self.grid.node(i))?).abs();
            worst = worst.max(d);
        }
        Ok(worst)
    }

    pub fn window_values(&self, window: f64) -> Vec<(f64, f64)> {
        self.grid.window(window).map(|i| (self.grid.node(i), self.values[i])).collect()
    }
}

fn level_parts(p: &EllipticProblem, grid: &Grid1D) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let nodes = grid.nodes();
    let a = p.coeffs.a_nodes(&nodes);
    let d: Vec<f64> = p.coeffs.c_nodes(&nodes).into_iter().map(|c| -c).collect();
    let f = p.coeffs.f_nodes(&nodes);
    (a, d, f)
}

/// Solves on the given grid.
pub fn solve_elliptic_on_grid(p: &EllipticProblem, grid: &Grid1D) -> Result<SolutionField> {
    let f = p.coeffs.f_nodes(&grid.nodes());
    solve_with_source(p, grid, &f)
}

/// Solves on the given grid with the source given by its node values
/// (the problem's own `f` is ignored).
pub fn solve_with_source(p: &EllipticProblem, grid: &Grid1D, f: &[f64]) -> Result<SolutionField> {
    if f.len() != grid.len() {
        return Err(domain(format!("source has {} values, grid has {} nodes", f.len(), grid.len())));
    }
    let op = build_discrete_op(grid, p.s)?;
    let (a, d, _) = level_parts(p, grid);
    let system = SpdSystem::new(&op, &a, &d)?;
    let tails = op.tail_vector();
    let rhs: Vec<f64> = (0..grid.len()).map(|i| f[i] + a[i] * tails[i] * p.gamma).collect();
    let values = system.solve(&rhs);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("level solve produced non-finite values".into()));
    }
    Ok(SolutionField { grid: grid.clone(), values, exterior: p.gamma })
}

/// Solves on `n` equispaced interior nodes of `(-L, L)`.
pub fn solve_elliptic_ball(p: &EllipticProblem, half_width: f64, n: usize) -> Result<SolutionField> {
    solve_elliptic_on_grid(p, &Grid1D::new(half_width, n)?)
}

/// `diag(a)·A - diag(c)` for the problem on `grid`.
pub fn elliptic_system_matrix(p: &EllipticProblem, grid: &Grid1D) -> Result<DMatrix<f64>> {
    let op = build_discrete_op(grid, p.s)?;
    let (a, d, _) = level_parts(p, grid);
    Ok(system_matrix(&op, &a, &d))
}

/// Outcome of a nested-limit run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedLimit {
    /// Solution on the last level solved.
    pub field: SolutionField,
    /// `sup_{|x|≤window} |u_j - u_{j+1}|` for each consecutive pair solved.
    pub trace: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
}

impl NestedLimit {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: format!("nested limit did not reach {} within {} levels", self.tol, self.half_widths.len()),
                trace: self.trace,
            })
        }
    }

    pub fn trace_is_decreasing(&self) -> bool {
        self.trace.windows(2).all(|w| w[1] < w[0])
    }
}

/// Solves level by level until consecutive levels agree to `tol` on
/// `|x| ≤ window`, or the schedule runs out (`converged == false`).
pub fn elliptic_nested_limit(
    p: &EllipticProblem,
    schedule: &NestedSchedule,
    window: f64,
    tol: f64,
) -> Result<NestedLimit> {
    if !(window > 0.0 && window < schedule.half_widths[0]) {
        return Err(domain(format!("window {window} must lie inside the smallest level")));
    }
    let mut prev = solve_elliptic_on_grid(p, &schedule.grid(0)?)?;
    let mut trace = Vec::new();
    let mut used = vec![schedule.half_widths[0]];
    for level in 1..schedule.half_widths.len() {
        let next = solve_elliptic_on_grid(p, &schedule.grid(level)?)?;
        used.push(schedule.half_widths[level]);
        let diff = prev.sup_diff(&next, window)?;
        trace.push(diff);
        prev = next;
        if diff < tol {
            return Ok(NestedLimit { field: prev, trace, half_widths: used, converged: true, tol });
        }
    }
    Ok(NestedLimit { field: prev, trace, half_widths: used, converged: false, tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub m: f64,
    /// `max (|u - γ| - M·h)` over the nodes.
    pub max_excess: f64,
    pub worst_node: f64,
    /// `max |u - γ|` over the outer tenth of the grid.
    pub outer_residual: f64,
    pub passed: bool,
}

/// Checks `|u(xᵢ) - γ| ≤ M·h(xᵢ) + 1e-6` at every node.
pub fn verify_elliptic_decay(u: &SolutionField, p: &EllipticProblem, h: &GlobalBarrierH) -> Result<DecayReport> {
    if h.s() != p.s || h.dim() != 1 {
        return Err(domain("barrier was built for a different order or dimension"));
    }
    let m = p.decay_constant();
    let l = u.grid.half_width();
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst_node = f64::NAN;
    let mut outer_residual: f64 = 0.0;
    for (i, &x) in u.grid.nodes().iter().enumerate() {
        let dev = (u.values[i] - p.gamma).abs();
        let excess = dev - m * h.value(x);
        if excess > max_excess {
            max_excess = excess;
            worst_node = x;
        }
        if x.abs() >= 0.9 * l {
            outer_residual = outer_residual.max(dev);
        }
    }
    Ok(DecayReport { m, max_excess, worst_node, outer_residual, passed: max_excess <= DECAY_BOUND_SLACK })
}
