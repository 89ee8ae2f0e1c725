use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::decay::{log_spaced, verify_v_supersolution, DecayBarrierV};
use super::exit_time::{getoor, ExitTimeSolution};
use super::{MarginReport, MarginSample, TIGHT_FACTOR};
use crate::coefficients::CoefficientField;
use crate::error::{domain, Error, Result};
use crate::grid::Grid1D;
use crate::operator::build_discrete_op;
use crate::quadrature::{integrate_to_infinity, DEFAULT_MAX_INTERVALS};

/// Pass threshold on `a·(A h)` at the grid nodes.
pub const H_MARGIN_THRESHOLD: f64 = 0.95;

const MU0: f64 = 1.0;
const MAX_R_HAT: f64 = 1_073_741_824.0; // 2³⁰
const INV_A_SAMPLES: usize = 4096;
const NEAR_FIELD: f64 = 16.0;
const ZOOM_ROUNDS: usize = 3;
const CROSSING_REL_WIDTH: f64 = 1e-12;
const V_CHECK_SAMPLES: usize = 64;
const EXTERIOR_REL_TOL: f64 = 1e-9;

/// `Ṽ = vbar·V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDecay {
    pub scale: f64,
    pub v: DecayBarrierV,
}

impl ScaledDecay {
    pub fn value(&self, r: f64) -> f64 {
        self.scale * self.v.value(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.scale * self.v.profile.derivative(r)
    }

    /// `Ṽ(r₁) - Ṽ(r₂)` without forming the two large values separately.
    pub fn difference(&self, r1: f64, r2: f64) -> f64 {
        let peak = self.scale * self.v.amplitude();
        let b = 0.5 * self.v.beta();
        let p1 = (1.0 + r1 * r1).powf(-b);
        // (1+r₁²)^{-b} - (1+r₂²)^{-b} = p₁(1 - ((1+r₂²)/(1+r₁²))^{-b})
        let ratio_ln = (r2 * r2).ln_1p() - (r1 * r1).ln_1p();
        -peak * p1 * (-b * ratio_ln).exp_m1()
    }
}

/// `W = μ₁Ŵ + μ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorProfile {
    pub mu1: f64,
    pub mu2: f64,
    pub w_hat: ExitTimeSolution,
}

impl InteriorProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.mu1 * self.w_hat.value(r) + self.mu2
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.mu1 * self.w_hat.derivative(r)
    }
}

/// Slack of every inequality the construction certifies (all must be > 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSlacks {
    /// `μ₂ - vbar·C·(1+(R̂/2)²)^{-β/2}`
    pub lower: f64,
    /// `vbar·C - μ₁C₁R̂^{2s} - μ₂`
    pub upper: f64,
    /// `βμ₂ - 2sμ₁C₁(1+R̂²)`
    pub derivative: f64,
    /// `W'(R̄) - Ṽ'(R̄)`
    pub crossing_slope: f64,
    /// `R̄ - R₀`
    pub inner: f64,
    /// `R̂/2 - R̄`
    pub outer: f64,
}

impl BarrierSlacks {
    pub fn all_positive(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, v) in self.named() {
            if !(v > 0.0) {
                out.push(name);
            }
        }
        out
    }

    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("lower", self.lower),
            ("upper", self.upper),
            ("derivative", self.derivative),
            ("crossing_slope", self.crossing_slope),
            ("inner", self.inner),
            ("outer", self.outer),
        ]
    }
}

/// `h = C̄·min{Ṽ, W}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalBarrierH {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub vbar_scale: f64,
    pub delta: f64,
    pub nu: f64,
    pub r_hat: f64,
    pub r_bar: f64,
    pub final_scale: f64,
    pub v_tilde: ScaledDecay,
    pub w: InteriorProfile,
    pub slacks: BarrierSlacks,
}

/// Branch and component values of `h` at one point.
#[derive(Debug, Clone, Copy)]
struct Eval {
    r: f64,
    interior: bool,
    w_hat: f64,
}

impl GlobalBarrierH {
    pub fn dim(&self) -> u32 {
        self.v_tilde.v.dim()
    }

    pub fn s(&self) -> f64 {
        self.v_tilde.v.s()
    }

    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        let inner = if r < self.r_bar { self.w.value(r) } else { self.v_tilde.value(r) };
        self.final_scale * inner
    }

    pub fn values(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.value(x)).collect()
    }

    fn eval(&self, r: f64) -> Eval {
        let r = r.abs();
        Eval { r, interior: r < self.r_bar, w_hat: self.w.w_hat.value(r) }
    }

    /// `h(r₁) - h(r₂)` evaluated per branch so that the large common level
    /// `μ₂` cancels exactly.
    fn diff(&self, p: &Eval, q: &Eval) -> f64 {
        let mu1 = self.w.mu1;
        let d = match (p.interior, q.interior) {
            (true, true) => mu1 * (p.w_hat - q.w_hat),
            (false, false) => self.v_tilde.difference(p.r, q.r),
            // W(p) - Ṽ(q) = μ₁Ŵ(p) + (μ₂ - Ṽ(q))
            (true, false) => mu1 * p.w_hat + (self.w.mu2 - self.v_tilde.value(q.r)),
            (false, true) => (self.v_tilde.value(p.r) - self.w.mu2) - mu1 * q.w_hat,
        };
        self.final_scale * d
    }

    pub fn difference(&self, r1: f64, r2: f64) -> f64 {
        self.diff(&self.eval(r1), &self.eval(r2))
    }

    /// Radius beyond which `h < eps`.
    pub fn far_field_radius(&self, eps: f64) -> f64 {
        let peak = self.final_scale * self.v_tilde.scale * self.v_tilde.v.amplitude();
        if peak <= eps {
            return self.r_bar;
        }
        let t = 2.0 / self.v_tilde.v.beta() * (peak / eps).ln();
        let r = if t > 700.0 { (0.5 * t).exp() } else { t.exp_m1().sqrt() };
        r.max(self.r_bar)
    }

    /// Number of sign changes of `Ṽ - W` over `samples` equispaced radii in
    /// `(0, R̂)`.
    pub fn ordering_sign_changes(&self, samples: usize) -> usize {
        let mut changes = 0;
        let mut prev: Option<bool> = None;
        for k in 1..=samples {
            let r = self.r_hat * k as f64 / (samples + 1) as f64;
            let d = self.v_tilde.value(r) - self.w.value(r);
            if d == 0.0 {
                continue;
            }
            let pos = d > 0.0;
            if let Some(p) = prev {
                if p != pos {
                    changes += 1;
                }
            }
            prev = Some(pos);
        }
        changes
    }

    /// Grid of half-width `4R̂` with spacing `R̂/512`.
    pub fn verification_grid(&self) -> Result<Grid1D> {
        Grid1D::new(4.0 * self.r_hat, 4095)
    }

    /// Plain-text listing of every parameter and slack, stable across runs.
    pub fn certificate_text(&self) -> String {
        let v = &self.v_tilde.v;
        let mut out = String::new();
        let mut line = |k: &str, val: f64| {
            let _ = writeln!(out, "{k:<16} {val:.17e}");
        };
        line("dim", v.dim() as f64);
        line("s", v.s());
        line("beta", v.beta());
        line("K", v.k);
        line("fv_const", v.fv_const());
        line("C", v.amplitude());
        line("R0", v.r0);
        line("mu0", self.mu0);
        line("mu1", self.mu1);
        line("mu2", self.mu2);
        line("C1", self.w.w_hat.c1);
        line("delta", self.delta);
        line("nu", self.nu);
        line("vbar_scale", self.vbar_scale);
        line("R_hat", self.r_hat);
        line("R_bar", self.r_bar);
        line("final_scale", self.final_scale);
        for (name, val) in self.slacks.named() {
            line(&format!("slack.{name}"), val);
        }
        out
    }
}

/// `μ₀·max_{|x|≤R̂} 1/a`: dense samples (uniform near the origin, geometric
/// further out), zoomed around the best sample, padded by twice the local
/// sample-to-sample variation.
fn max_inverse_diffusion(coeffs: &CoefficientField, r_hat: f64) -> f64 {
    let g = |x: f64| 1.0 / coeffs.a.eval(x);
    let near = r_hat.min(NEAR_FIELD);
    let mut xs: Vec<f64> = (0..INV_A_SAMPLES).map(|k| near * k as f64 / (INV_A_SAMPLES - 1) as f64).collect();
    if r_hat > near {
        xs.extend(log_spaced(near, r_hat, INV_A_SAMPLES).into_iter().skip(1));
    }
    let mut best = (g(xs[0]), 0usize);
    for (k, &x) in xs.iter().enumerate() {
        let v = g(x);
        if v > best.0 {
            best = (v, k);
        }
    }
    let k = best.1;
    let (mut lo, mut hi) = (xs[k.saturating_sub(1)], xs[(k + 1).min(xs.len() - 1)]);
    let mut max = best.0;
    let mut bound = 0.0;
    for _ in 0..ZOOM_ROUNDS {
        let step = (hi - lo) / (INV_A_SAMPLES - 1) as f64;
        let vals: Vec<f64> = (0..INV_A_SAMPLES).map(|j| g(lo + j as f64 * step)).collect();
        let (j, &m) = vals
            .iter()
            .enumerate()
            .fold((0, &f64::MIN), |acc, (j, v)| if *v > *acc.1 { (j, v) } else { acc });
        max = max.max(m);
        let left = if j > 0 { (vals[j] - vals[j - 1]).abs() } else { 0.0 };
        let right = if j + 1 < vals.len() { (vals[j + 1] - vals[j]).abs() } else { 0.0 };
        bound = 0.5 * left.max(right);
        let centre = lo + j as f64 * step;
        lo = (centre - step).max(lo);
        hi = (centre + step).min(hi);
    }
    MU0 * (max + 2.0 * bound) * TIGHT_FACTOR
}

/// Bisection for `Ṽ(R̄) = W(R̄)` inside `bracket`, to width `1e-12·R̂`.
pub fn find_crossing(v_tilde: &ScaledDecay, w: &InteriorProfile, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let gap = |r: f64| v_tilde.value(r) - w.value(r);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Construction(format!(
            "no sign change of V~ - W on [{lo}, {hi}]: {g_lo:e} and {g_hi:e}"
        )));
    }
    let width = CROSSING_REL_WIDTH * w.w_hat.r_hat;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Glues `Ṽ` and `W` for the smallest admissible `R̂` on a doubling schedule.
pub fn assemble_global_barrier(dim: u32, s: f64, coeffs: &CoefficientField, v: &DecayBarrierV) -> Result<GlobalBarrierH> {
    if v.dim() != dim || v.s() != s {
        return Err(domain("decay barrier was built for a different (N, s)"));
    }
    let radii = log_spaced(v.r0, 1e3 * v.r0, V_CHECK_SAMPLES);
    let report = verify_v_supersolution(v, coeffs, &radii)?;
    if !report.passed {
        return Err(Error::Construction(format!(
            "decay barrier is not certified: min margin {} at r = {}",
            report.min_margin, report.argmin
        )));
    }

    let beta = v.beta();
    let delta = 0.5 * beta;
    let nu = (beta - s + 2.0).max(0.0) + 1.0;
    let c = v.amplitude();

    let mut r_hat = 2.0;
    while r_hat <= (2.0 * v.r0).max(2.0) {
        r_hat *= 2.0;
    }
    let mut last_failure = String::from("schedule never started");
    while r_hat <= MAX_R_HAT {
        let vbar = r_hat.powf(s + nu);
        let mu2 = r_hat.powf(s + nu - beta + delta);
        let mu1 = max_inverse_diffusion(coeffs, r_hat);
        let w_hat = getoor(r_hat, dim, s)?;
        let peak_w = mu1 * w_hat.max_value();

        let lower = mu2 - vbar * c * (1.0 + 0.25 * r_hat * r_hat).powf(-0.5 * beta);
        let upper = vbar * c - peak_w - mu2;
        let derivative = beta * mu2 - 2.0 * s * mu1 * w_hat.c1 * (1.0 + r_hat * r_hat);

        let v_tilde = ScaledDecay { scale: vbar, v: v.clone() };
        let w = InteriorProfile { mu1, mu2, w_hat };
        if lower > 0.0 && upper > 0.0 {
            match find_crossing(&v_tilde, &w, (v.r0, 0.5 * r_hat)) {
                Ok(r_bar) => {
                    let slacks = BarrierSlacks {
                        lower,
                        upper,
                        derivative,
                        crossing_slope: w.derivative(r_bar) - v_tilde.derivative(r_bar),
                        inner: r_bar - v.r0,
                        outer: 0.5 * r_hat - r_bar,
                    };
                    if slacks.all_positive() {
                        let final_scale = (1.0 / MU0).max(1.0 / vbar) * TIGHT_FACTOR;
                        return Ok(GlobalBarrierH {
                            mu0: MU0,
                            mu1,
                            mu2,
                            vbar_scale: vbar,
                            delta,
                            nu,
                            r_hat,
                            r_bar,
                            final_scale,
                            v_tilde,
                            w,
                            slacks,
                        });
                    }
                    last_failure = format!("slacks not positive: {}", slacks.failures().join(", "));
                }
                Err(e) => last_failure = e.to_string(),
            }
        } else {
            last_failure = format!("two-sided bound fails: lower slack {lower:e}, upper slack {upper:e}");
        }
        r_hat *= 2.0;
    }
    Err(Error::Construction(format!(
        "no admissible R_hat up to 2^30; last attempt: {last_failure}"
    )))
}

/// `a(xᵢ)·(A h)ᵢ` at every node; the exterior uses the analytic far field of
/// `h`. Passes iff the minimum is at least `0.95`.
pub fn verify_h_supersolution(h: &GlobalBarrierH, coeffs: &CoefficientField, grid: &Grid1D) -> Result<MarginReport> {
    if h.dim() != 1 {
        return Err(domain("grid certificate is one-dimensional"));
    }
    let s = h.s();
    if !(s > 0.0 && s < 0.5) {
        return Err(domain(format!("s must lie in (0, 1/2), got {s}")));
    }
    let l = grid.half_width();
    if l < 4.0 * h.r_hat * (1.0 - 1e-12) {
        return Err(domain(format!("grid half-width {l} is below 4·R_hat = {}", 4.0 * h.r_hat)));
    }
    let op = build_discrete_op(grid, s)?;
    let nodes = grid.nodes();
    let evals: Vec<Eval> = nodes.iter().map(|&x| h.eval(x)).collect();
    let edge = h.eval(l);
    let expo = -1.0 - 2.0 * s;

    let samples = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let ei = &evals[i];
            let mut acc = 0.0;
            for (j, ej) in evals.iter().enumerate() {
                if j != i {
                    acc += op.weight(i, j) * h.diff(ei, ej);
                }
            }
            acc += op.tail_sum(i) * h.diff(ei, &edge);
            // ∫_{|y|>L} (h(L) - h(y)) |x - y|^{-1-2s} dy, folded onto y > L
            let kernel = |y: f64| h.v_tilde.difference(l, y) * ((y - x).powf(expo) + (y + x).powf(expo));
            let ext = integrate_to_infinity(kernel, l, 0.0, EXTERIOR_REL_TOL, DEFAULT_MAX_INTERVALS)?;
            acc += h.final_scale * ext.value;
            Ok(MarginSample { position: x, margin: coeffs.a.eval(x) * op.scale() * acc })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginReport::from_samples(samples, H_MARGIN_THRESHOLD))
}

/// `V₀ = h + 1`; `inf h = 0` is attained only in the far-field limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedBarrier {
    pub h: GlobalBarrierH,
}

pub fn build_v0(h: &GlobalBarrierH) -> ShiftedBarrier {
    ShiftedBarrier { h: h.clone() }
}

impl ShiftedBarrier {
    pub fn value(&self, r: f64) -> f64 {
        self.h.value(r) + 1.0
    }

    pub fn values(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.value(x)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.value(0.0)
    }
}
