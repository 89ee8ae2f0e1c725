//! Scenario pipelines. Each pipeline turns a validated config into a
//! [`ScenarioResult`]; errors inside a pipeline become failed certificates.

use fracbarrier::barriers::{
    assemble_global_barrier, build_v0, log_spaced, select_v_params, verify_h_supersolution, verify_v_supersolution,
    DecayBarrierV, GlobalBarrierH, H_MARGIN_THRESHOLD,
};
use fracbarrier::elliptic::{
    elliptic_nested_limit, verify_elliptic_decay, EllipticProblem, NestedSchedule, Resolution, DECAY_BOUND_SLACK,
};
use fracbarrier::grid::Grid1D;
use fracbarrier::operator::{apply_discrete, build_discrete_op, ExteriorDatum};
use fracbarrier::parabolic::{
    long_time_limit, sandwich, solve_parabolic_ball, verify_uniform_boundary, BoundaryTrajectory, LongTimeConfig,
    ParabolicProblem, TimeGrid, Trajectory, BOUND_SLACK, MONOTONE_SLACK,
};

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::plot::{Plot, Series};
use crate::report::{Certificate, Report, ScenarioResult, Table};

const V_MARGIN_FLOOR: f64 = -1e-6;
const V_SAMPLES: usize = 64;
const CROSSING_SAMPLES: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-8;
/// Checkpoint discrepancies flatten out at the rounding level of the solves.
const CHECKPOINT_NOISE: f64 = 1e-12;
const SNAPSHOTS: usize = 50;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Run the pipelines of `verify-all` on separate threads.
    pub parallel: bool,
}

/// Decay barrier `V` and global barrier `h`, shared by all pipelines.
#[derive(Debug, Clone)]
pub struct Barriers {
    pub v: DecayBarrierV,
    pub h: GlobalBarrierH,
}

pub fn build_barriers(cfg: &ScenarioConfig) -> Result<Barriers, String> {
    let coeffs = cfg.coefficients();
    let v = select_v_params(cfg.dim, cfg.s, &coeffs).map_err(|e| e.to_string())?;
    let h = assemble_global_barrier(cfg.dim, cfg.s, &coeffs, &v).map_err(|e| e.to_string())?;
    Ok(Barriers { v, h })
}

/// Runs every pipeline of `cfg.scenario`. The config must already be valid.
pub fn run_scenario(cfg: &ScenarioConfig, opts: RunOptions) -> Report {
    let barriers = build_barriers(cfg);
    let kinds = cfg.scenario.pipelines();
    let results = if opts.parallel && kinds.len() > 1 {
        std::thread::scope(|scope| {
            let barriers = &barriers;
            let handles: Vec<_> =
                kinds.iter().map(|&k| (k, scope.spawn(move || run_pipeline(k, cfg, barriers)))).collect();
            handles.into_iter().map(|(k, h)| h.join().unwrap_or_else(|_| panicked(k))).collect()
        })
    } else {
        kinds.iter().map(|&k| run_pipeline(k, cfg, &barriers)).collect()
    };
    Report::new(Some(cfg.clone()), results)
}

fn panicked(kind: ScenarioKind) -> ScenarioResult {
    let mut r = ScenarioResult::new(kind);
    r.certify(Certificate::failed("pipeline", "pipeline completes without panicking"));
    r
}

pub fn run_pipeline(kind: ScenarioKind, cfg: &ScenarioConfig, barriers: &Result<Barriers, String>) -> ScenarioResult {
    let mut r = ScenarioResult::new(kind);
    match kind {
        ScenarioKind::Barriers => barriers_pipeline(cfg, barriers, &mut r),
        ScenarioKind::Elliptic => elliptic_pipeline(cfg, barriers, &mut r),
        ScenarioKind::Parabolic => parabolic_pipeline(cfg, barriers, &mut r),
        ScenarioKind::Asymptotic => asymptotic_pipeline(cfg, barriers, &mut r),
        ScenarioKind::VerifyAll => unreachable!("verify-all expands into the other pipelines"),
    }
    r
}

fn require_barriers<'a>(barriers: &'a Result<Barriers, String>, r: &mut ScenarioResult) -> Option<&'a Barriers> {
    match barriers {
        Ok(b) => Some(b),
        Err(e) => {
            r.certify(Certificate::failed(
                "barrier_construction",
                "decay barrier V and global barrier h assemble with every slack positive",
            ));
            r.note(format!("barrier construction failed: {e}"));
            None
        }
    }
}

fn stage_failed(r: &mut ScenarioResult, name: &str, relation: &str, e: impl std::fmt::Display) {
    r.certify(Certificate::failed(name, relation));
    r.note(format!("{name}: {e}"));
}

fn log10_points(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect()
}

fn barriers_pipeline(cfg: &ScenarioConfig, barriers: &Result<Barriers, String>, r: &mut ScenarioResult) {
    let Some(Barriers { v, h }) = require_barriers(barriers, r) else { return };
    let coeffs = cfg.coefficients();
    r.value("beta", v.beta());
    r.value("v_amplitude", v.amplitude());
    r.value("fv", v.fv_const());
    r.value("k_limit", v.k);
    r.value("r0", v.r0);
    for (k, x) in [
        ("mu0", h.mu0),
        ("mu1", h.mu1),
        ("mu2", h.mu2),
        ("vbar_scale", h.vbar_scale),
        ("delta", h.delta),
        ("nu", h.nu),
        ("r_hat", h.r_hat),
        ("r_bar", h.r_bar),
        ("final_scale", h.final_scale),
        ("h_at_origin", h.value(0.0)),
    ] {
        r.value(k, x);
    }

    let radii = log_spaced(v.r0, 1e3 * v.r0, V_SAMPLES);
    match verify_v_supersolution(v, &coeffs, &radii) {
        Ok(m) => {
            r.certify(Certificate::at_least(
                "decay_barrier_margin",
                "min over 64 log-spaced r in [R0, 1e3 R0] of a(r)(-Δ)^s V(r) - 1",
                m.min_margin,
                V_MARGIN_FLOOR,
            ));
            let mut t = Table::new("barriers_v_margin.csv", &["r", "margin"]);
            for s in &m.samples {
                t.push(vec![s.position, s.margin]);
            }
            r.tables.push(t);
            let pos: Vec<f64> = m.samples.iter().map(|s| s.position.log10()).collect();
            r.plots.push(
                Plot::new("barriers_v_margin.svg", "decay barrier margin", "log10 r", "a (-Δ)^s V - 1")
                    .with(Series::new("margin", pos.iter().zip(&m.samples).map(|(x, s)| (*x, s.margin)).collect())),
            );
        }
        Err(e) => stage_failed(r, "decay_barrier_margin", "decay barrier certificate evaluates", e),
    }

    for (name, slack) in h.slacks.named() {
        r.certify(Certificate::above(
            &format!("slack_{name}"),
            &format!("{} inequality of the global barrier holds with positive slack", name.replace('_', " ")),
            slack,
            0.0,
        ));
    }
    r.certify(Certificate::above("crossing_above_r0", "crossing radius R_bar exceeds R0", h.r_bar, v.r0));
    r.certify(Certificate::below("crossing_below_half_r_hat", "crossing radius R_bar is below R_hat/2", h.r_bar, 0.5 * h.r_hat));
    r.certify(Certificate::equal(
        "crossing_sign_changes",
        "sign changes of the branch ordering over 1e4 samples",
        h.ordering_sign_changes(CROSSING_SAMPLES) as f64,
        1.0,
    ));

    if cfg.dim == 1 {
        let grid = h.verification_grid().and_then(|g| verify_h_supersolution(h, &coeffs, &g).map(|m| (g, m)));
        match grid {
            Ok((g, m)) => {
                r.certify(Certificate::at_least(
                    "global_barrier_grid_margin",
                    "min over nodes of the discrete supersolution margin of h on half-width 4 R_hat",
                    m.min_margin,
                    H_MARGIN_THRESHOLD,
                ));
                r.value("grid_half_width", g.half_width());
                let mut t = Table::new("barriers_h_margin.csv", &["x", "margin"]);
                for s in &m.samples {
                    t.push(vec![s.position, s.margin]);
                }
                r.tables.push(t);
                let pts: Vec<(f64, f64)> = m
                    .samples
                    .iter()
                    .filter(|s| s.position > 0.0)
                    .map(|s| (s.position.log10(), s.margin.abs().max(1e-300).log10()))
                    .collect();
                r.plots.push(
                    Plot::new("barriers_h_margin.svg", "global barrier grid margin", "log10 x", "log10 margin")
                        .with(Series::new("margin", pts)),
                );
            }
            Err(e) => stage_failed(r, "global_barrier_grid_margin", "grid certificate of h evaluates", e),
        }
    } else {
        r.note("grid certificate of h is one-dimensional; skipped for N > 1");
    }

    let mut rs = vec![0.0];
    rs.extend(log_spaced(1e-2, 1e2 * h.r_hat, 241));
    let vv: Vec<f64> = rs.iter().map(|&x| v.value(x)).collect();
    let hv: Vec<f64> = rs.iter().map(|&x| h.value(x)).collect();
    let mut t = Table::new("barriers_profiles.csv", &["r", "v", "h"]);
    for i in 0..rs.len() {
        t.push(vec![rs[i], vv[i], hv[i]]);
    }
    r.tables.push(t);
    r.plots.push(
        Plot::new("barriers_profiles.svg", "barrier profiles", "log10 r", "log10 value")
            .with(Series::new("V", log10_points(&rs, &vv)))
            .with(Series::new("h", log10_points(&rs, &hv))),
    );
}

fn elliptic_pipeline(cfg: &ScenarioConfig, barriers: &Result<Barriers, String>, r: &mut ScenarioResult) {
    let coeffs = cfg.coefficients();
    let p = match EllipticProblem::new(coeffs, cfg.gamma, cfg.s) {
        Ok(p) => p,
        Err(e) => return stage_failed(r, "elliptic_problem", "elliptic problem is well posed", e),
    };
    let nested = NestedSchedule::doubling(cfg.level0, cfg.levels, Resolution::FixedSpacing { dx: cfg.dx })
        .and_then(|sch| elliptic_nested_limit(&p, &sch, cfg.window, cfg.tol));
    let nested = match nested {
        Ok(n) => n,
        Err(e) => return stage_failed(r, "nested_limit", "nested-ball solves complete", e),
    };
    let last = nested.trace.last().copied().unwrap_or(f64::NAN);
    r.certify(Certificate::at_most(
        "nested_limit_tolerance",
        "sup over |x| ≤ window of the difference between the last two levels",
        last,
        cfg.tol,
    ));
    let increases = nested.trace.windows(2).filter(|w| w[1] >= w[0]).count();
    r.certify(Certificate::at_most(
        "nested_trace_increases",
        "level differences that fail to decrease",
        increases as f64,
        0.0,
    ));

    let u = &nested.field;
    let nodes = u.grid.nodes();
    let residual = build_discrete_op(&u.grid, cfg.s)
        .and_then(|op| apply_discrete(&op, &u.values, ExteriorDatum::new(cfg.gamma)?))
        .map(|au| {
            let u_sup = u.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let scale = 1.0 + coeffs.f_sup() + coeffs.c_sup() * u_sup;
            nodes
                .iter()
                .enumerate()
                .map(|(i, &x)| (coeffs.a.eval(x) * au[i] - coeffs.c.eval(x) * u.values[i] - coeffs.f.eval(x)).abs())
                .fold(0.0f64, f64::max)
                / scale
        });
    match residual {
        Ok(res) => r.certify(Certificate::at_most(
            "discrete_residual",
            "max over nodes of |a (-Δ)^s_h u - c u - f| / (1 + ‖f‖ + ‖c‖ ‖u‖)",
            res,
            RESIDUAL_TOL,
        )),
        Err(e) => stage_failed(r, "discrete_residual", "residual evaluates", e),
    }
    if let Some(b) = require_barriers(barriers, r) {
        match verify_elliptic_decay(u, &p, &b.h) {
            Ok(d) => {
                r.certify(Certificate::at_most(
                    "decay_bound",
                    "max over nodes of |u - γ| - M h with M = ‖c‖ |γ| + ‖f‖",
                    d.max_excess,
                    DECAY_BOUND_SLACK,
                ));
                r.value("decay_constant_m", d.m);
                r.value("outer_residual", d.outer_residual);
            }
            Err(e) => stage_failed(r, "decay_bound", "decay bound evaluates", e),
        }
    }

    let dev = u.values.iter().fold(0.0f64, |m, x| m.max((x - cfg.gamma).abs()));
    r.value("gamma", cfg.gamma);
    r.value("sup_abs_u_minus_gamma", dev);
    r.value("final_half_width", u.grid.half_width());
    r.value("levels_used", nested.half_widths.len() as f64);
    r.value("converged", if nested.converged { 1.0 } else { 0.0 });
    r.trace("nested_trace", nested.trace.clone());
    r.trace("nested_half_widths", nested.half_widths.clone());

    let mut sol = Table::new("elliptic_solution.csv", &["x", "u"]);
    for (x, v) in nodes.iter().zip(&u.values) {
        sol.push(vec![*x, *v]);
    }
    r.tables.push(sol);
    let mut tr = Table::new("elliptic_trace.csv", &["half_width", "difference"]);
    for (l, d) in nested.half_widths.iter().skip(1).zip(&nested.trace) {
        tr.push(vec![*l, *d]);
    }
    r.tables.push(tr);

    let window: Vec<(f64, f64)> = u.window_values(4.0 * cfg.window);
    let (x0, x1) = (window.first().map_or(0.0, |p| p.0), window.last().map_or(0.0, |p| p.0));
    r.plots.push(
        Plot::new("elliptic_solution.svg", "elliptic solution", "x", "u")
            .with(Series::new("u", window))
            .with(Series::new("gamma", vec![(x0, cfg.gamma), (x1, cfg.gamma)])),
    );
    let ls = &nested.half_widths[1..];
    let tol_line: Vec<f64> = vec![cfg.tol; ls.len()];
    r.plots.push(
        Plot::new("elliptic_trace.svg", "nested-limit trace", "log10 L", "log10 difference")
            .with(Series::new("difference", log10_points(ls, &nested.trace)))
            .with(Series::new("tol", log10_points(ls, &tol_line))),
    );
}

/// Monotone exterior data bracketing `g` from below and above.
fn envelope_data(g: &BoundaryTrajectory) -> (BoundaryTrajectory, BoundaryTrajectory) {
    use BoundaryTrajectory as B;
    match *g {
        B::Constant { value } => (B::Constant { value }, B::Constant { value }),
        B::ExpDecay { gamma, amplitude } | B::DampedSine { gamma, amplitude } if amplitude != 0.0 => (
            B::ExpDecay { gamma, amplitude: -amplitude.abs() },
            B::ExpDecay { gamma, amplitude: amplitude.abs() },
        ),
        B::ExpDecay { gamma, .. } | B::DampedSine { gamma, .. } => (B::Constant { value: gamma }, B::Constant { value: gamma }),
        B::Sine { amplitude } => (B::Constant { value: -amplitude.abs() }, B::Constant { value: amplitude.abs() }),
    }
}

fn parabolic_problem(cfg: &ScenarioConfig, barriers: &Result<Barriers, String>) -> fracbarrier::Result<ParabolicProblem> {
    let p = ParabolicProblem::new(cfg.coefficients(), cfg.initial_data(), cfg.boundary_trajectory(), cfg.s)?;
    Ok(match barriers {
        Ok(b) if p.coeffs.c_nonpositive() => p.with_v0(build_v0(&b.h)),
        _ => p,
    })
}

fn parabolic_pipeline(cfg: &ScenarioConfig, barriers: &Result<Barriers, String>, r: &mut ScenarioResult) {
    let p = match parabolic_problem(cfg, barriers) {
        Ok(p) => p,
        Err(e) => return stage_failed(r, "parabolic_problem", "parabolic problem is well posed", e),
    };
    let setup = Grid1D::with_spacing(cfg.half_width, cfg.dx).and_then(|g| {
        let tg = if cfg.infinite_horizon { TimeGrid::open(cfg.horizon, cfg.dt) } else { TimeGrid::finite(cfg.horizon, cfg.dt) };
        Ok((g, tg?))
    });
    let (grid, tg) = match setup {
        Ok(s) => s,
        Err(e) => return stage_failed(r, "parabolic_grid", "space and time grids build", e),
    };
    let traj = match solve_parabolic_ball(&p, cfg.half_width, &tg, &grid) {
        Ok(t) => t,
        Err(e) => {
            return stage_failed(r, "parabolic_bounds", "|u| ≤ K_T and, for c ≤ 0, |u| ≤ B V0 at every step", e)
        }
    };
    let bounds = traj.bounds;
    r.certify(Certificate::at_most(
        "bound_k_t",
        "max over steps and nodes of |u| / K_T with K_T = B e^{(1 + ‖c‖)T}",
        bounds.max_abs / bounds.k_t,
        1.0 + BOUND_SLACK,
    ));
    match bounds.bv0_ratio {
        Some(ratio) => {
            r.certify(Certificate::at_most(
                "bound_b_v0",
                "max over steps and nodes of |u| / (B V0)",
                ratio,
                1.0 + BOUND_SLACK,
            ));
            r.value("bv0_ratio", ratio);
        }
        None if p.coeffs.c_nonpositive() => {
            require_barriers(barriers, r);
        }
        None => r.note("c is not ≤ 0: only the exponential bound K_T applies"),
    }
    r.value("data_bound_b", p.data_bound());
    r.value("k_t", bounds.k_t);
    r.value("max_abs_u", bounds.max_abs);
    r.value("steps", tg.steps as f64);

    if let Ok(b) = barriers {
        match verify_uniform_boundary(&traj, &p, &b.v, b.v.r0) {
            Ok(u) => {
                r.certify(Certificate::at_most(
                    "uniform_boundary_cbar",
                    "smallest C_bar with sup_t |u - g| ≤ C_bar V + eps on R0 ≤ |x| ≤ 0.9 L is finite",
                    u.fitted_cbar,
                    f64::MAX,
                ));
                r.certify(Certificate::at_most(
                    "uniform_boundary_envelope",
                    "outer envelope sup_t |u - g| fails to be nonincreasing in |x| (0 when nonincreasing)",
                    if u.envelope_monotone { 0.0 } else { 1.0 },
                    0.0,
                ));
                r.value("fitted_cbar", u.fitted_cbar);
                r.value("uniform_eps", u.eps);
                let mut t = Table::new("parabolic_envelope.csv", &["x", "deviation", "fit"]);
                let mut dev = Vec::new();
                let mut fit = Vec::new();
                for &(x, d) in &u.deviations {
                    let f = u.fitted_cbar * b.v.value(x.abs()) + u.eps;
                    t.push(vec![x, d, f]);
                    if x > 0.0 {
                        dev.push((x, d));
                        fit.push((x, f));
                    }
                }
                r.tables.push(t);
                r.plots.push(
                    Plot::new("parabolic_envelope.svg", "boundary envelope fit", "x", "sup_t |u - g|")
                        .with(Series::new("deviation", dev))
                        .with(Series::new("C_bar V + eps", fit)),
                );
            }
            Err(e) => stage_failed(r, "uniform_boundary", "uniform condition at infinity evaluates", e),
        }
    }

    if p.v0.is_some() {
        let (lo, hi) = envelope_data(&p.g);
        let needed = p.u0.sup_norm().max(lo.sup_norm().max(hi.sup_norm()) + p.coeffs.f_sup());
        let amplitude = if needed > 0.0 { 2.0 * needed } else { 1.0 };
        match sandwich(&p, &lo, &hi, amplitude, &grid, &tg) {
            Ok(s) => {
                r.certify(Certificate::at_most(
                    "sub_envelope_monotone",
                    "largest decrease in one step of the sub-envelope started at -A V0",
                    s.lower.max_violation,
                    MONOTONE_SLACK,
                ));
                r.certify(Certificate::at_most(
                    "super_envelope_monotone",
                    "largest increase in one step of the super-envelope started at A V0",
                    s.upper.max_violation,
                    MONOTONE_SLACK,
                ));
                r.certify(Certificate::at_most(
                    "sandwich_order",
                    "max over steps and nodes of max(w_sub - u, u - w_super)",
                    s.max_violation,
                    MONOTONE_SLACK,
                ));
                r.value("envelope_amplitude", amplitude);
                let centre = grid.nearest(0.0).expect("grid contains the origin");
                let mut t = Table::new("parabolic_sandwich.csv", &["t", "lower", "u", "upper"]);
                let (mut a, mut m, mut z) = (Vec::new(), Vec::new(), Vec::new());
                for (k, &time) in s.middle.times.iter().enumerate() {
                    let row = [
                        s.lower.trajectory.states[k][centre],
                        s.middle.states[k][centre],
                        s.upper.trajectory.states[k][centre],
                    ];
                    t.push(vec![time, row[0], row[1], row[2]]);
                    a.push((time, row[0]));
                    m.push((time, row[1]));
                    z.push((time, row[2]));
                }
                r.tables.push(t);
                r.plots.push(
                    Plot::new("parabolic_sandwich.svg", "monotone envelopes at x = 0", "t", "value")
                        .with(Series::new("sub-envelope", a))
                        .with(Series::new("u", m))
                        .with(Series::new("super-envelope", z)),
                );
            }
            Err(e) => stage_failed(r, "sandwich", "monotone envelopes run and enclose u", e),
        }
    } else {
        r.note("monotone envelopes need c ≤ 0 and V0; skipped");
    }

    trajectory_outputs(&traj, r);
}

fn trajectory_outputs(traj: &Trajectory, r: &mut ScenarioResult) {
    let steps = traj.times.len() - 1;
    let stride = steps.div_ceil(SNAPSHOTS).max(1);
    let nodes = traj.grid.nodes();
    let mut t = Table::new("parabolic_trajectory.csv", &["t", "x", "u"]);
    for k in (0..=steps).step_by(stride) {
        for (x, u) in nodes.iter().zip(&traj.states[k]) {
            t.push(vec![traj.times[k], *x, *u]);
        }
    }
    r.tables.push(t);
    let mut plot = Plot::new("parabolic_profiles.svg", "parabolic profiles", "x", "u");
    for q in 0..=4 {
        let k = steps * q / 4;
        let pts: Vec<(f64, f64)> = nodes.iter().copied().zip(traj.states[k].iter().copied()).collect();
        plot = plot.with(Series::new(&format!("t = {}", traj.times[k]), pts));
    }
    r.plots.push(plot);
}

fn asymptotic_pipeline(cfg: &ScenarioConfig, barriers: &Result<Barriers, String>, r: &mut ScenarioResult) {
    let p = match parabolic_problem(cfg, barriers) {
        Ok(p) => p,
        Err(e) => return stage_failed(r, "parabolic_problem", "parabolic problem is well posed", e),
    };
    let lt = LongTimeConfig {
        half_width: cfg.half_width,
        dx: cfg.dx,
        dt: cfg.dt,
        max_horizon: cfg.horizon,
        window: cfg.window,
        tol: cfg.tol,
        checkpoints: cfg.checkpoints.clone(),
    };
    let rep = match long_time_limit(&p, &lt) {
        Ok(rep) => rep,
        Err(e) => return stage_failed(r, "long_time_run", "long-time run reaches a steady state within the horizon", e),
    };
    let last = rep.checkpoints.last().map_or(f64::NAN, |c| c.1);
    r.certify(Certificate::at_most(
        "long_time_discrepancy",
        "sup over |x| ≤ window of |u(·, T) - W| at the last checkpoint T",
        last,
        cfg.discrepancy_tol,
    ));
    let increases = rep.checkpoints.windows(2).filter(|w| w[1].1 > w[0].1 + CHECKPOINT_NOISE).count();
    r.certify(Certificate::at_most(
        "checkpoint_increases",
        "checkpoint discrepancies that grow by more than 1e-12",
        increases as f64,
        0.0,
    ));
    r.value("gamma_limit", rep.w.exterior);
    r.value("final_time", rep.final_time);
    r.value("final_discrepancy", rep.final_discrepancy);
    r.trace("checkpoint_times", rep.checkpoints.iter().map(|c| c.0).collect());
    r.trace("checkpoint_discrepancy", rep.checkpoints.iter().map(|c| c.1).collect());
    r.trace("elliptic_trace", rep.elliptic_trace.clone());

    let mut prof = Table::new("asymptotic_profiles.csv", &["x", "u_final", "w"]);
    let (mut us, mut ws) = (Vec::new(), Vec::new());
    for (x, u) in rep.final_state.window_values(cfg.window) {
        let w = rep.w.value_at_node(x).unwrap_or(f64::NAN);
        prof.push(vec![x, u, w]);
        us.push((x, u));
        ws.push((x, w));
    }
    r.tables.push(prof);
    let mut ck = Table::new("asymptotic_checkpoints.csv", &["t", "discrepancy"]);
    for &(t, d) in &rep.checkpoints {
        ck.push(vec![t, d]);
    }
    r.tables.push(ck);
    let mut ca = Table::new("asymptotic_cauchy.csv", &["t", "increment"]);
    for &(t, d) in &rep.cauchy_trace {
        ca.push(vec![t, d]);
    }
    r.tables.push(ca);
    r.plots.push(
        Plot::new("asymptotic_profiles.svg", "long-time profile against W", "x", "value")
            .with(Series::new(&format!("u(T = {})", rep.final_time), us))
            .with(Series::new("W", ws)),
    );
    let log_pts = |pts: &[(f64, f64)]| -> Vec<(f64, f64)> {
        pts.iter().filter(|p| p.1 > 0.0).map(|&(t, d)| (t, d.log10())).collect()
    };
    r.plots.push(
        Plot::new("asymptotic_trace.svg", "convergence in time", "t", "log10 sup |·|")
            .with(Series::new("|u(t) - W|", log_pts(&rep.checkpoints)))
            .with(Series::new("|u(t) - u(t - 1)|", log_pts(&rep.cauchy_trace))),
    );
}
