//! `∂ₜu = -a(-Δ)^s u + cu + f` on `(-j, j)` with exterior data `g(t)`,
//! implicit Euler in time.

use serde::{Deserialize, Serialize};

use crate::barriers::{DecayBarrierV, ShiftedBarrier};
use crate::coefficients::CoefficientField;
use crate::elliptic::{elliptic_nested_limit, EllipticProblem, NestedSchedule, Resolution, SolutionField};
use crate::error::{domain, Error, Result};
use crate::grid::Grid1D;
use crate::linear::SpdSystem;
use crate::operator::{build_discrete_op, DiscreteFracOp};

/// Relative slack on the a-priori bounds `K_T` and `B·V₀`.
pub const BOUND_SLACK: f64 = 1e-9;
/// Per-step slack of the monotone-envelope and sandwich checks.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// `ε` of the uniform condition at infinity.
pub const UNIFORM_EPS: f64 = 1e-3;
/// Window length of the steady-state Cauchy test.
pub const CAUCHY_INTERVAL: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-4;

const COMPAT_TOL: f64 = 1e-8;
const COMPAT_PROBES: [f64; 4] = [1e2, 1e3, 1e4, 1e6];
// sup_{t≥0} e^{-t}|sin t|, attained at t = π/4
const DAMPED_SINE_PEAK: f64 = 0.322_396_941_945_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    None,
}

/// Exterior datum `g(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryTrajectory {
    Constant { value: f64 },
    /// `γ + amplitude·e^{-t}`
    ExpDecay { gamma: f64, amplitude: f64 },
    /// `γ + amplitude·e^{-t} sin t`
    DampedSine { gamma: f64, amplitude: f64 },
    /// `amplitude·sin t`
    Sine { amplitude: f64 },
}

impl BoundaryTrajectory {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            BoundaryTrajectory::Constant { value } => value,
            BoundaryTrajectory::ExpDecay { gamma, amplitude } => gamma + amplitude * (-t).exp(),
            BoundaryTrajectory::DampedSine { gamma, amplitude } => gamma + amplitude * (-t).exp() * t.sin(),
            BoundaryTrajectory::Sine { amplitude } => amplitude * t.sin(),
        }
    }

    /// Upper bound on `sup_{t≥0} |g(t)|` (exact except for the damped sine
    /// with `γ` and the amplitude of opposite signs).
    pub fn sup_norm(&self) -> f64 {
        match *self {
            BoundaryTrajectory::Constant { value } => value.abs(),
            BoundaryTrajectory::ExpDecay { gamma, amplitude } => gamma.abs().max((gamma + amplitude).abs()),
            BoundaryTrajectory::DampedSine { gamma, amplitude } => gamma.abs() + DAMPED_SINE_PEAK * amplitude.abs(),
            BoundaryTrajectory::Sine { amplitude } => amplitude.abs(),
        }
    }

    /// `lim_{t→∞} g(t)` when it exists.
    pub fn limit(&self) -> Option<f64> {
        match *self {
            BoundaryTrajectory::Constant { value } => Some(value),
            BoundaryTrajectory::ExpDecay { gamma, .. } | BoundaryTrajectory::DampedSine { gamma, .. } => Some(gamma),
            BoundaryTrajectory::Sine { amplitude } => (amplitude == 0.0).then_some(0.0),
        }
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match *self {
            BoundaryTrajectory::Constant { .. } => Monotonicity::Nondecreasing,
            BoundaryTrajectory::ExpDecay { amplitude, .. } if amplitude <= 0.0 => Monotonicity::Nondecreasing,
            BoundaryTrajectory::ExpDecay { .. } => Monotonicity::Nonincreasing,
            _ => Monotonicity::None,
        }
    }

    fn is_monotone(&self, direction: Direction) -> bool {
        matches!(
            (self, self.monotonicity(), direction),
            (BoundaryTrajectory::Constant { .. }, _, _)
                | (_, Monotonicity::Nondecreasing, Direction::Sub)
                | (_, Monotonicity::Nonincreasing, Direction::Super)
        )
    }
}

/// Initial datum `u₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant { value: f64 },
    /// `base + amplitude·exp(1 - 1/(1 - (x/radius)²))` on `|x| < radius`
    Bump { base: f64, amplitude: f64, radius: f64 },
}

impl InitialData {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialData::Constant { value } => value,
            InitialData::Bump { base, amplitude, radius } => {
                let q = (x / radius).powi(2);
                if q >= 1.0 {
                    base
                } else {
                    base + amplitude * (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            InitialData::Constant { value } => value.abs(),
            InitialData::Bump { base, amplitude, .. } => base.abs().max((base + amplitude).abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicProblem {
    pub coeffs: CoefficientField,
    pub u0: InitialData,
    pub g: BoundaryTrajectory,
    pub s: f64,
    /// `V₀ = h + 1`, needed for the time-independent bound and the
    /// monotone envelopes.
    pub v0: Option<ShiftedBarrier>,
}

impl ParabolicProblem {
    pub fn new(coeffs: CoefficientField, u0: InitialData, g: BoundaryTrajectory, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 0.5) {
            return Err(domain(format!("s must lie in (0, 1/2), got {s}")));
        }
        coeffs.validate(1, s, &[0.0, 1.0, 10.0, 1e3])?;
        let g0 = g.eval(0.0);
        for x in COMPAT_PROBES {
            for y in [x, -x] {
                if (u0.eval(y) - g0).abs() > COMPAT_TOL {
                    return Err(domain(format!(
                        "initial datum is incompatible with g(0) = {g0}: u0({y}) = {}",
                        u0.eval(y)
                    )));
                }
            }
        }
        Ok(Self { coeffs, u0, g, s, v0: None })
    }

    pub fn with_v0(mut self, v0: ShiftedBarrier) -> Self {
        self.v0 = Some(v0);
        self
    }

    /// `B = max{‖f‖∞, ‖u₀‖∞, ‖g‖∞}`.
    pub fn data_bound(&self) -> f64 {
        self.coeffs.f_sup().max(self.u0.sup_norm()).max(self.g.sup_norm())
    }

    fn require_nonpositive_c(&self, what: &str) -> Result<()> {
        if self.coeffs.c_nonpositive() {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{what} requires c ≤ 0")))
        }
    }

    fn require_v0(&self) -> Result<&ShiftedBarrier> {
        self.v0.as_ref().ok_or_else(|| Error::State("problem has no V0 attached".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub dt: f64,
    pub steps: usize,
    /// Stands for `T = ∞` truncated at `horizon`.
    pub open: bool,
}

impl TimeGrid {
    pub fn finite(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(horizon > 0.0) || !horizon.is_finite() {
            return Err(domain(format!("need T > 0 and dt > 0, got T = {horizon}, dt = {dt}")));
        }
        let steps = (horizon / dt).round();
        if (steps * dt - horizon).abs() > 1e-9 * horizon || steps < 1.0 {
            return Err(domain(format!("T = {horizon} is not a multiple of dt = {dt}")));
        }
        Ok(Self { horizon, dt, steps: steps as usize, open: false })
    }

    pub fn open(max_horizon: f64, dt: f64) -> Result<Self> {
        Ok(Self { open: true, ..Self::finite(max_horizon, dt)? })
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// `ζ_j(x)`: 1 on `|x| ≤ j/2`, 0 on `|x| ≥ j`, smooth in between.
pub fn cutoff(j: f64, x: f64) -> f64 {
    let rho = (2.0 * x.abs() / j - 1.0).max(0.0);
    if rho >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

/// `ζ_j·u₀ + (1 - ζ_j)·g₀` at the nodes.
pub fn cutoff_initial(u0: &InitialData, g0: f64, j: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    if !(j > 0.0) {
        return Err(domain(format!("cutoff radius must be positive, got {j}")));
    }
    if grid.half_width() < j * (1.0 - 1e-12) {
        return Err(domain(format!("grid half-width {} is smaller than j = {j}", grid.half_width())));
    }
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| {
            let z = cutoff(j, x);
            z * u0.eval(x) + (1.0 - z) * g0
        })
        .collect())
}

/// One implicit Euler step factored once and reused.
pub struct StepSolver {
    system: SpdSystem,
    a: Vec<f64>,
    f: Vec<f64>,
    tails: Vec<f64>,
    dt: f64,
}

impl StepSolver {
    pub fn new(op: &DiscreteFracOp, coeffs: &CoefficientField, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(domain(format!("dt must be positive, got {dt}")));
        }
        let c_plus = coeffs.c.positive_sup();
        if c_plus > 0.0 && dt * c_plus >= 1.0 {
            return Err(Error::Stability(format!("dt = {dt} is not below 1/‖c⁺‖∞ = {}", 1.0 / c_plus)));
        }
        let nodes = op.grid().nodes();
        let a = coeffs.a_nodes(&nodes);
        let d: Vec<f64> = coeffs.c_nodes(&nodes).iter().map(|c| (1.0 - dt * c) / dt).collect();
        let system = SpdSystem::new(op, &a, &d)?;
        Ok(Self { system, a, f: coeffs.f_nodes(&nodes), tails: op.tail_vector(), dt })
    }

    /// Replaces the source by explicit node values.
    pub fn with_source(mut self, f: Vec<f64>) -> Result<Self> {
        if f.len() != self.f.len() {
            return Err(domain("source does not match the grid"));
        }
        self.f = f;
        Ok(self)
    }

    pub fn step(&self, state: &[f64], g_next: f64) -> Result<Vec<f64>> {
        if state.len() != self.a.len() {
            return Err(domain("state does not match the grid"));
        }
        let rhs: Vec<f64> = (0..state.len())
            .map(|i| state[i] / self.dt + self.f[i] + self.a[i] * self.tails[i] * g_next)
            .collect();
        let next = self.system.solve(&rhs);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("time step produced non-finite values".into()));
        }
        Ok(next)
    }
}

/// Solves `(I + dt·diag(a)·A - dt·diag(c))·uⁿ⁺¹ = uⁿ + dt·f + dt·diag(a)·τ·g_next`.
pub fn parabolic_step(
    op: &DiscreteFracOp,
    state: &[f64],
    dt: f64,
    coeffs: &CoefficientField,
    g_next: f64,
) -> Result<Vec<f64>> {
    StepSolver::new(op, coeffs, dt)?.step(state, g_next)
}

/// Marches `initial` through one step per entry of `g` (the exterior values at
/// `t₁, t₂, …`) with node-valued source `f`; returns every state.
pub fn march_nodes(
    coeffs: &CoefficientField,
    s: f64,
    grid: &Grid1D,
    dt: f64,
    initial: Vec<f64>,
    f: Vec<f64>,
    g: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let op = build_discrete_op(grid, s)?;
    let solver = StepSolver::new(&op, coeffs, dt)?.with_source(f)?;
    let mut states = vec![initial];
    for &gk in g {
        let next = solver.step(states.last().expect("non-empty"), gk)?;
        states.push(next);
    }
    Ok(states)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    /// `K_T = C·e^{(1+‖c‖∞)T}`
    pub k_t: f64,
    pub max_abs: f64,
    /// `max |u|/(B·V₀)` when `c ≤ 0` and `V₀` is attached.
    pub bv0_ratio: Option<f64>,
}

/// Node values at every time step (`states[0]` is the initial datum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub boundary: Vec<f64>,
    pub bounds: BoundRecord,
}

impl Trajectory {
    pub fn final_field(&self) -> SolutionField {
        SolutionField {
            grid: self.grid.clone(),
            values: self.states.last().expect("trajectory holds the initial state").clone(),
            exterior: *self.boundary.last().expect("trajectory holds the initial state"),
        }
    }

    pub fn field(&self, k: usize) -> SolutionField {
        SolutionField { grid: self.grid.clone(), values: self.states[k].clone(), exterior: self.boundary[k] }
    }

    /// `max |self - other|` over `|x| ≤ window` and steps `1..`; time grids
    /// must agree.
    pub fn sup_diff(&self, other: &Trajectory, window: f64) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(domain("trajectories use different time grids"));
        }
        let mut worst: f64 = 0.0;
        for k in 1..self.times.len() {
            worst = worst.max(self.field(k).sup_diff(&other.field(k), window)?);
        }
        Ok(worst)
    }
}

struct BoundChecker {
    k_t: f64,
    max_abs: f64,
    bv0: Option<(f64, Vec<f64>)>,
    ratio: f64,
}

impl BoundChecker {
    fn new(p: &ParabolicProblem, grid: &Grid1D, horizon: f64) -> Self {
        let c = p.data_bound();
        let k_t = c * ((1.0 + p.coeffs.c_sup()) * horizon).exp();
        let bv0 = match (&p.v0, p.coeffs.c_nonpositive()) {
            (Some(v0), true) => Some((p.data_bound(), v0.values(&grid.nodes()))),
            _ => None,
        };
        Self { k_t, max_abs: 0.0, bv0, ratio: 0.0 }
    }

    fn check(&mut self, t: f64, state: &[f64]) -> Result<()> {
        let m = state.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.max_abs = self.max_abs.max(m);
        if m > self.k_t * (1.0 + BOUND_SLACK) {
            return Err(Error::Invariant(format!("|u| = {m} exceeds K_T = {} at t = {t}", self.k_t)));
        }
        if let Some((b, v0)) = &self.bv0 {
            for (u, v) in state.iter().zip(v0) {
                let r = if *b > 0.0 { u.abs() / (b * v) } else if *u == 0.0 { 0.0 } else { f64::INFINITY };
                self.ratio = self.ratio.max(r);
            }
            if self.ratio > 1.0 + BOUND_SLACK {
                return Err(Error::Invariant(format!("|u|/(B·V0) = {} exceeds 1 at t = {t}", self.ratio)));
            }
        }
        Ok(())
    }

    fn record(&self) -> BoundRecord {
        BoundRecord { k_t: self.k_t, max_abs: self.max_abs, bv0_ratio: self.bv0.as_ref().map(|_| self.ratio) }
    }
}

/// Marches from `initial` with exterior `g`, recording every step.
fn march(
    p: &ParabolicProblem,
    g: &BoundaryTrajectory,
    grid: &Grid1D,
    tg: &TimeGrid,
    initial: Vec<f64>,
    check_bounds: bool,
) -> Result<Trajectory> {
    let op = build_discrete_op(grid, p.s)?;
    let solver = StepSolver::new(&op, &p.coeffs, tg.dt)?;
    let mut checker = BoundChecker::new(p, grid, tg.horizon);
    if check_bounds {
        checker.check(0.0, &initial)?;
    }
    let mut times = vec![0.0];
    let mut boundary = vec![g.eval(0.0)];
    let mut states = vec![initial];
    for k in 1..=tg.steps {
        let t = tg.time(k);
        let gk = g.eval(t);
        let next = solver.step(states.last().expect("non-empty"), gk)?;
        if check_bounds {
            checker.check(t, &next)?;
        }
        times.push(t);
        boundary.push(gk);
        states.push(next);
    }
    Ok(Trajectory { grid: grid.clone(), times, states, boundary, bounds: checker.record() })
}

/// Full trajectory on the ball `(-j, j)` from the cut-off initial datum,
/// checking `|u| ≤ K_T` and, when `c ≤ 0` with `V₀` attached, `|u| ≤ B·V₀`.
pub fn solve_parabolic_ball(p: &ParabolicProblem, j: f64, tg: &TimeGrid, grid: &Grid1D) -> Result<Trajectory> {
    if (grid.half_width() - j).abs() > 1e-12 * j {
        return Err(domain(format!("grid half-width {} must equal j = {j}", grid.half_width())));
    }
    if tg.open {
        p.require_nonpositive_c("an open time horizon")?;
    }
    let initial = cutoff_initial(&p.u0, p.g.eval(0.0), j, grid)?;
    march(p, &p.g, grid, tg, initial, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedTrajectory {
    pub trajectory: Trajectory,
    pub trace: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
}

impl NestedTrajectory {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: format!("nested parabolic limit did not reach {}", self.tol),
                trace: self.trace,
            })
        }
    }
}

/// Level-by-level trajectories until consecutive levels agree to `tol` on
/// `{|x| ≤ window} × [dt, T]`.
pub fn parabolic_nested_limit(
    p: &ParabolicProblem,
    schedule: &NestedSchedule,
    tg: &TimeGrid,
    window: f64,
    tol: f64,
) -> Result<NestedTrajectory> {
    if !(window > 0.0 && window < schedule.half_widths[0]) {
        return Err(domain(format!("window {window} must lie inside the smallest level")));
    }
    let level = |k: usize| -> Result<Trajectory> {
        let grid = schedule.grid(k)?;
        solve_parabolic_ball(p, schedule.half_widths[k], tg, &grid)
    };
    let mut prev = level(0)?;
    let mut trace = Vec::new();
    let mut used = vec![schedule.half_widths[0]];
    for k in 1..schedule.half_widths.len() {
        let next = level(k)?;
        used.push(schedule.half_widths[k]);
        let d = prev.sup_diff(&next, window)?;
        trace.push(d);
        prev = next;
        if d < tol {
            return Ok(NestedTrajectory { trajectory: prev, trace, half_widths: used, converged: true, tol });
        }
    }
    Ok(NestedTrajectory { trajectory: prev, trace, half_widths: used, converged: false, tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundaryReport {
    /// `(x, sup_t |u(x, t) - g(t)|)` for the nodes with `|x| ∈ [R, 0.9L]`.
    pub deviations: Vec<(f64, f64)>,
    /// Smallest `C̄` with `sup_t |u - g| ≤ C̄·V(x) + ε` on those nodes.
    pub fitted_cbar: f64,
    pub eps: f64,
    /// Deviation is nonincreasing in `|x|` on `|x| ∈ [0.09L, 0.9L]`.
    pub envelope_monotone: bool,
    pub passed: bool,
}

/// Fits `C̄` in `sup_t |u(x, t) - g(t)| ≤ C̄·V(x) + ε` for `|x| ∈ [R, 0.9L]`.
pub fn verify_uniform_boundary(
    traj: &Trajectory,
    p: &ParabolicProblem,
    v: &DecayBarrierV,
    r: f64,
) -> Result<UniformBoundaryReport> {
    let l = traj.grid.half_width();
    if r < v.r0 {
        return Err(domain(format!("R = {r} is below R0 = {}", v.r0)));
    }
    if r >= 0.9 * l {
        return Err(domain(format!("grid half-width {l} does not extend beyond R = {r}")));
    }
    if p.s != v.s() {
        return Err(domain("barrier order differs from the problem"));
    }
    let nodes = traj.grid.nodes();
    let sup_dev = |i: usize| {
        traj.states
            .iter()
            .zip(&traj.boundary)
            .map(|(u, g)| (u[i] - g).abs())
            .fold(0.0f64, f64::max)
    };
    let mut deviations = Vec::new();
    let mut cbar: f64 = 0.0;
    for (i, &x) in nodes.iter().enumerate() {
        if x.abs() >= r && x.abs() <= 0.9 * l {
            let d = sup_dev(i);
            deviations.push((x, d));
            cbar = cbar.max((d - UNIFORM_EPS).max(0.0) / v.value(x.abs()));
        }
    }
    let outer: Vec<(f64, f64)> = nodes
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() >= 0.09 * l && x.abs() <= 0.9 * l)
        .map(|(i, &x)| (x, sup_dev(i)))
        .collect();
    let monotone_side = |positive: bool| {
        let mut side: Vec<(f64, f64)> = outer.iter().copied().filter(|(x, _)| (*x > 0.0) == positive).collect();
        side.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
        side.windows(2).all(|w| w[1].1 <= w[0].1)
    };
    let envelope_monotone = monotone_side(true) && monotone_side(false);
    let passed = cbar.is_finite() && envelope_monotone && !deviations.is_empty();
    Ok(UniformBoundaryReport { deviations, fitted_cbar: cbar, eps: UNIFORM_EPS, envelope_monotone, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Sub,
    Super,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRun {
    pub direction: Direction,
    pub trajectory: Trajectory,
    /// `min (-a·A u₀ + c·u₀ + f)` (sub) or `min (a·A u₀ - c·u₀ - f)`
    /// (super) with the exterior value at the first step.
    pub first_step_margin: f64,
    /// Largest step-to-step move against the expected direction.
    pub max_violation: f64,
}

/// Runs from `∓A·V₀` with monotone exterior data and asserts the trajectory
/// is monotone in time.
pub fn monotone_envelope_run(
    direction: Direction,
    g_mono: &BoundaryTrajectory,
    p: &ParabolicProblem,
    amplitude: f64,
    grid: &Grid1D,
    tg: &TimeGrid,
) -> Result<EnvelopeRun> {
    p.require_nonpositive_c("a monotone envelope")?;
    if !g_mono.is_monotone(direction) {
        return Err(domain(format!("exterior datum is not monotone in the {direction:?} direction")));
    }
    let needed = g_mono.sup_norm() + p.coeffs.f_sup();
    if amplitude < needed {
        return Err(domain(format!("A = {amplitude} is below ‖g‖∞ + ‖f‖∞ = {needed}")));
    }
    let v0 = p.require_v0()?;
    let sign = match direction {
        Direction::Sub => -1.0,
        Direction::Super => 1.0,
    };
    let nodes = grid.nodes();
    let initial: Vec<f64> = v0.values(&nodes).iter().map(|v| sign * amplitude * v).collect();

    let op = build_discrete_op(grid, p.s)?;
    let g1 = g_mono.eval(tg.dt);
    let au = crate::operator::apply_discrete(&op, &initial, crate::operator::ExteriorDatum::new(g1)?)?;
    let first_step_margin = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let residual = -p.coeffs.a.eval(x) * au[i] + p.coeffs.c.eval(x) * initial[i] + p.coeffs.f.eval(x);
            -sign * residual
        })
        .fold(f64::INFINITY, f64::min);

    let trajectory = march(p, g_mono, grid, tg, initial, false)?;
    let mut max_violation: f64 = 0.0;
    for (k, w) in trajectory.states.windows(2).enumerate() {
        for (i, (prev, next)) in w[0].iter().zip(&w[1]).enumerate() {
            let against = sign * (next - prev);
            max_violation = max_violation.max(against);
            if against > MONOTONE_SLACK {
                return Err(Error::Invariant(format!(
                    "{direction:?} envelope moves the wrong way by {against:e} at x = {}, step {}",
                    nodes[i],
                    k + 1
                )));
            }
        }
    }
    Ok(EnvelopeRun { direction, trajectory, first_step_margin, max_violation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lower: EnvelopeRun,
    pub middle: Trajectory,
    pub upper: EnvelopeRun,
    /// `max(w̲ - u, u - w̄)` over all nodes and steps.
    pub max_violation: f64,
    pub passed: bool,
}

/// Runs `w̲` (from `-A·V₀` with `g₁`), `u` and `w̄` (from `A·V₀` with `g₂`) on
/// the same grid and checks `w̲ ≤ u ≤ w̄` at every step.
pub fn sandwich(
    p: &ParabolicProblem,
    g_lower: &BoundaryTrajectory,
    g_upper: &BoundaryTrajectory,
    amplitude: f64,
    grid: &Grid1D,
    tg: &TimeGrid,
) -> Result<SandwichReport> {
    if amplitude < p.u0.sup_norm() {
        return Err(domain(format!("A = {amplitude} is below ‖u0‖∞ = {}", p.u0.sup_norm())));
    }
    for k in 0..=tg.steps {
        let t = tg.time(k);
        let (lo, mid, hi) = (g_lower.eval(t), p.g.eval(t), g_upper.eval(t));
        if !(lo <= mid && mid <= hi) {
            return Err(domain(format!("exterior data are not ordered at t = {t}")));
        }
    }
    let lower = monotone_envelope_run(Direction::Sub, g_lower, p, amplitude, grid, tg)?;
    let upper = monotone_envelope_run(Direction::Super, g_upper, p, amplitude, grid, tg)?;
    let middle = solve_parabolic_ball(p, grid.half_width(), tg, grid)?;
    let mut max_violation = f64::NEG_INFINITY;
    for k in 0..middle.states.len() {
        for i in 0..grid.len() {
            let u = middle.states[k][i];
            max_violation = max_violation
                .max(lower.trajectory.states[k][i] - u)
                .max(u - upper.trajectory.states[k][i]);
        }
    }
    let passed = max_violation <= MONOTONE_SLACK;
    Ok(SandwichReport { lower, middle, upper, max_violation, passed })
}

/// Settings of a long-time run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongTimeConfig {
    /// Half-width of the ball. The elliptic comparison runs on the nested
    /// levels `L/4, L/2, L` with the same spacing, so without early
    /// convergence it ends on this very grid.
    pub half_width: f64,
    pub dx: f64,
    pub dt: f64,
    pub max_horizon: f64,
    pub window: f64,
    pub tol: f64,
    /// Times at which `sup_{|x|≤window} |u(·, t) - W|` is recorded; the run
    /// continues at least to the last one.
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongTimeReport {
    pub w: SolutionField,
    /// Level differences of the elliptic nested run that produced `w`.
    pub elliptic_trace: Vec<f64>,
    pub checkpoints: Vec<(f64, f64)>,
    /// `(t, sup_{|x|≤window} |u(·, t) - u(·, t - 1)|)`
    pub cauchy_trace: Vec<(f64, f64)>,
    pub final_time: f64,
    pub final_state: SolutionField,
    pub final_discrepancy: f64,
}

impl LongTimeReport {
    /// Discrepancies at the checkpoints do not increase beyond `noise`.
    pub fn checkpoints_decreasing(&self, noise: f64) -> bool {
        self.checkpoints.windows(2).all(|w| w[1].1 <= w[0].1 + noise)
    }
}

/// Marches until the solution is steady on the window (and all checkpoints
/// are passed) and compares it with the elliptic solution for `γ = lim g`.
pub fn long_time_limit(p: &ParabolicProblem, cfg: &LongTimeConfig) -> Result<LongTimeReport> {
    p.require_nonpositive_c("a long-time run")?;
    let gamma = p.g.limit().ok_or_else(|| domain("exterior datum has no declared limit"))?;
    let l = cfg.half_width;
    let schedule = NestedSchedule::new(vec![0.25 * l, 0.5 * l, l], Resolution::FixedSpacing { dx: cfg.dx })?;
    let ep = EllipticProblem::new(p.coeffs, gamma, p.s)?;
    let nested = elliptic_nested_limit(&ep, &schedule, cfg.window, cfg.tol)?;
    let w = nested.field;
    let grid = Grid1D::with_spacing(l, cfg.dx)?;

    let tg = TimeGrid::open(cfg.max_horizon, cfg.dt)?;
    let op = build_discrete_op(&grid, p.s)?;
    let solver = StepSolver::new(&op, &p.coeffs, tg.dt)?;
    let mut checker = BoundChecker::new(p, &grid, tg.horizon);
    let mut state = cutoff_initial(&p.u0, p.g.eval(0.0), l, &grid)?;
    checker.check(0.0, &state)?;

    let per_interval = (CAUCHY_INTERVAL / tg.dt).round().max(1.0) as usize;
    let window: Vec<usize> = grid.window(cfg.window).collect();
    let sup_on_window = |a: &[f64], b: &[f64]| window.iter().map(|&i| (a[i] - b[i]).abs()).fold(0.0f64, f64::max);
    // W at the parabolic nodes of the window (the nested grids share nodes)
    let mut w_nodes = vec![0.0; grid.len()];
    for &i in &window {
        w_nodes[i] = w.value_at_node(grid.node(i))?;
    }
    let last_checkpoint = cfg.checkpoints.iter().cloned().fold(0.0, f64::max);
    let mut pending: Vec<f64> = cfg.checkpoints.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();

    let mut checkpoints = Vec::new();
    let mut cauchy_trace = Vec::new();
    let mut anchor = state.clone();
    let mut steady = false;
    let mut k = 0;
    while k < tg.steps {
        k += 1;
        let t = tg.time(k);
        state = solver.step(&state, p.g.eval(t))?;
        checker.check(t, &state)?;
        while let Some(&c) = pending.last() {
            if t + 0.5 * tg.dt >= c {
                checkpoints.push((c, sup_on_window(&state, &w_nodes)));
                pending.pop();
            } else {
                break;
            }
        }
        if k % per_interval == 0 {
            let d = sup_on_window(&state, &anchor);
            cauchy_trace.push((t, d));
            anchor.clone_from(&state);
            steady = d < cfg.tol;
            if steady && t + 0.5 * tg.dt >= last_checkpoint {
                break;
            }
        }
    }
    if !steady {
        return Err(Error::NonConvergence {
            what: format!("no steady state within T = {}", tg.horizon),
            trace: cauchy_trace.iter().map(|c| c.1).collect(),
        });
    }
    let final_time = tg.time(k);
    let final_discrepancy = sup_on_window(&state, &w_nodes);
    let final_state = SolutionField { grid, values: state, exterior: p.g.eval(final_time) };
    Ok(LongTimeReport {
        w,
        elliptic_trace: nested.trace,
        checkpoints,
        cauchy_trace,
        final_time,
        final_state,
        final_discrepancy,
    })
}
