use std::sync::OnceLock;
use std::time::Duration;

use fracbarrier::barriers::{
    assemble_global_barrier, build_v0, getoor, log_spaced, select_v_params, verify_h_supersolution,
    verify_v_supersolution, DecayBarrierV, GlobalBarrierH,
};
use fracbarrier::coefficients::{CoefficientField, Diffusion, Reaction, Source};
use fracbarrier::elliptic::{
    elliptic_nested_limit, solve_elliptic_on_grid, solve_with_source, verify_elliptic_decay, EllipticProblem,
    NestedSchedule, Resolution,
};
use fracbarrier::grid::Grid1D;
use fracbarrier::operator::{
    apply_discrete, build_discrete_op, frac_lap_quadrature, frac_lap_radial_power, frac_lap_radial_quadrature_3d,
    ExteriorDatum, RadialPowerProfile,
};
use fracbarrier::parabolic::{
    long_time_limit, march_nodes, sandwich, solve_parabolic_ball, verify_uniform_boundary, BoundaryTrajectory,
    InitialData, LongTimeConfig, ParabolicProblem, TimeGrid,
};
use fracbarrier::special::hyp_limit;
use fracbarrier_validation::{run_all, Check, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S: f64 = 0.25;
const SEED: u64 = 20_240_611;

fn reference_coeffs() -> CoefficientField {
    CoefficientField::power_law(1.0, 1.5)
}

fn barriers() -> &'static (DecayBarrierV, GlobalBarrierH) {
    static CELL: OnceLock<(DecayBarrierV, GlobalBarrierH)> = OnceLock::new();
    CELL.get_or_init(|| {
        let coeffs = reference_coeffs();
        let v = select_v_params(1, S, &coeffs).expect("decay barrier");
        let h = assemble_global_barrier(1, S, &coeffs, &v).expect("global barrier");
        (v, h)
    })
}

fn bump_source() -> Source {
    Source::Bump { amplitude: 1.0, radius: 1.0 }
}

fn well() -> Reaction {
    Reaction::GaussianWell { depth: 0.5, width: 2.0 }
}

/// `Σ_{n<N} (a)_n (b)_n / ((c)_n n!)` for `N = N₀, 2N₀, 4N₀`.
fn partial_sums(a: f64, b: f64, c: f64, n0: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    let (mut term, mut sum) = (1.0, 0.0);
    let mut next = 0;
    for n in 0..4 * n0 {
        sum += term;
        term *= (a + n as f64) * (b + n as f64) / ((c + n as f64) * (n as f64 + 1.0));
        if n + 1 == n0 << next {
            out[next] = sum;
            next += 1;
        }
    }
    out
}

/// Series at `z = 1` extrapolated in the cutoff: the tail behaves like
/// `N^{-m}(d₀ + d₁/N + …)` with `m = c - a - b`.
fn extrapolated_series(a: f64, b: f64, c: f64) -> f64 {
    let m = c - a - b;
    let [s1, s2, s4] = partial_sums(a, b, c, 20_000);
    let r = |p: f64, lo: f64, hi: f64| (2f64.powf(p) * hi - lo) / (2f64.powf(p) - 1.0);
    let (r1, r2) = (r(m, s1, s2), r(m, s2, s4));
    r(m + 1.0, r1, r2)
}

fn c1_hypergeometric_limit() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 50 {
        let a = rng.gen_range(-1.0..1.0);
        let b = rng.gen_range(0.05..1.5);
        let m = rng.gen_range(0.25..2.0);
        let c = a + b + m;
        if c <= 0.05 || a + m <= 0.05 {
            continue;
        }
        cases += 1;
        let k = hyp_limit(a, b, c).expect("admissible parameters");
        worst = worst.max((extrapolated_series(a, b, c) - k).abs());
    }
    Verdict::new(worst <= 1e-6, format!("50 cases, max |series - Gamma quotient| = {worst:.2e} (limit 1e-6)"))
}

fn c2_exit_time_identity() -> Verdict {
    let w = getoor(1.0, 1, S).expect("exit-time solution");
    let grid = Grid1D::with_spacing(1.0, 1.0 / 512.0).expect("grid");
    let op = build_discrete_op(&grid, S).expect("operator");
    let field: Vec<f64> = grid.nodes().iter().map(|&x| w.value(x)).collect();
    let out = apply_discrete(&op, &field, ExteriorDatum::new(0.0).unwrap()).expect("apply");
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in grid.window(0.8) {
        lo = lo.min(out[i]);
        hi = hi.max(out[i]);
    }
    Verdict::new(lo >= 0.97 && hi <= 1.03, format!("operator on |x| <= 0.8 spans [{lo:.5}, {hi:.5}] (allowed [0.97, 1.03])"))
}

fn c3_decay_barrier() -> Verdict {
    let (v, _) = barriers();
    let radii = log_spaced(v.r0, 1e3 * v.r0, 64);
    let r = verify_v_supersolution(v, &reference_coeffs(), &radii).expect("report");
    Verdict::new(
        r.passed,
        format!("beta = {}, R0 = {}, min margin {:.4e} at r = {:.3} (limit -1e-6)", v.beta(), v.r0, r.min_margin, r.argmin),
    )
}

fn c4_global_barrier() -> Verdict {
    let (v, h) = barriers();
    let grid = h.verification_grid().expect("grid");
    let r = verify_h_supersolution(h, &reference_coeffs(), &grid).expect("report");
    let slacks_ok = h.slacks.all_positive();
    let bracket_ok = h.r_bar > v.r0 && h.r_bar < 0.5 * h.r_hat;
    let changes = h.ordering_sign_changes(10_000);
    let slacks: Vec<String> = h.slacks.named().iter().map(|(n, s)| format!("{n} {s:.3e}")).collect();
    Verdict::new(
        r.passed && slacks_ok && bracket_ok && changes == 1,
        format!(
            "R_hat = {}, R_bar = {:.6e}, grid min margin {:.3e}, sign changes {changes}, slacks [{}]",
            h.r_hat,
            h.r_bar,
            r.min_margin,
            slacks.join(", ")
        ),
    )
}

fn c5_closed_form_vs_quadrature() -> Verdict {
    let lattice = [(0.3, 1, 0.1), (0.45, 1, 0.25), (0.15, 1, 0.4), (0.5, 3, 0.25), (1.8, 3, 0.5), (1.0, 3, 0.75)];
    let radii = [0.0, 0.5, 2.0, 5.0, 20.0];
    let mut worst: f64 = 0.0;
    for (beta, dim, s) in lattice {
        let p = RadialPowerProfile::new(1.0, beta, dim, s).unwrap().calibrated().expect("calibration");
        for r in radii {
            let closed = frac_lap_radial_power(&p, r).expect("closed form");
            let tol = 1e-6 * closed.abs().max(1e-12);
            let oracle = if dim == 1 {
                frac_lap_quadrature(&p, r, s, tol)
            } else {
                frac_lap_radial_quadrature_3d(&p, r, s, tol)
            }
            .expect("quadrature");
            worst = worst.max(((closed - oracle) / oracle).abs());
        }
    }
    Verdict::new(worst <= 1e-4, format!("30 points, max relative gap {worst:.2e} (limit 1e-4)"))
}

fn c6_elliptic_exactness() -> Verdict {
    let grid = Grid1D::with_spacing(10.0, 0.1).unwrap();
    let p1 = EllipticProblem::new(reference_coeffs(), 1.0, S).unwrap();
    let p2 = EllipticProblem::new(
        reference_coeffs().with_reaction(Reaction::Constant { value: -0.7 }).with_source(Source::Constant { value: 1.4 }),
        2.0,
        S,
    )
    .unwrap();
    let e1 = solve_elliptic_on_grid(&p1, &grid).unwrap().values.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    let e2 = solve_elliptic_on_grid(&p2, &grid).unwrap().values.iter().map(|u| (u - 2.0).abs()).fold(0.0, f64::max);

    let p = EllipticProblem::new(reference_coeffs().with_source(bump_source()), 0.0, S).unwrap();
    let schedule = NestedSchedule::doubling(10.0, 5, Resolution::FixedSpacing { dx: 0.1 }).unwrap();
    let nested = elliptic_nested_limit(&p, &schedule, 5.0, 1e-4).expect("nested run");
    let trace: Vec<String> = nested.trace.iter().map(|d| format!("{d:.3e}")).collect();
    Verdict::new(
        e1 <= 1e-10 && e2 <= 1e-10 && nested.trace_is_decreasing() && nested.converged,
        format!(
            "constant cases {e1:.1e}, {e2:.1e}; nested trace over L = {:?}: [{}], decreasing {}, below 1e-4 {}",
            nested.half_widths,
            trace.join(", "),
            nested.trace_is_decreasing(),
            nested.converged
        ),
    )
}

fn c7_elliptic_decay_bound() -> Verdict {
    let (_, h) = barriers();
    let p = EllipticProblem::new(reference_coeffs().with_source(bump_source()).with_reaction(well()), 0.5, S).unwrap();
    let u = solve_elliptic_on_grid(&p, &Grid1D::with_spacing(40.0, 0.1).unwrap()).unwrap();
    let r = verify_elliptic_decay(&u, &p, h).expect("report");
    Verdict::new(
        r.passed,
        format!("M = {}, max(|u - gamma| - M h) = {:.3e}, outer residual {:.3e}", r.m, r.max_excess, r.outer_residual),
    )
}

fn reaction_problem(u0: InitialData, g: BoundaryTrajectory) -> ParabolicProblem {
    let coeffs = reference_coeffs().with_source(bump_source()).with_reaction(well());
    ParabolicProblem::new(coeffs, u0, g, S).unwrap().with_v0(build_v0(&barriers().1))
}

fn c8_parabolic_global_bound() -> Verdict {
    let p = reaction_problem(
        InitialData::Bump { base: 0.5, amplitude: 0.5, radius: 2.0 },
        BoundaryTrajectory::DampedSine { gamma: 0.5, amplitude: 1.0 },
    );
    let grid = Grid1D::with_spacing(20.0, 0.1).unwrap();
    let tg = TimeGrid::finite(50.0, 0.05).unwrap();
    let traj = solve_parabolic_ball(&p, 20.0, &tg, &grid).expect("trajectory");
    let ratio = traj.bounds.bv0_ratio.expect("c <= 0 with V0 attached");
    Verdict::new(
        ratio <= 1.0 + 1e-9,
        format!("max |u|/(B V0) = {ratio:.3e}, max |u| = {:.4}, K_T = {:.3e}", traj.bounds.max_abs, traj.bounds.k_t),
    )
}

fn c9_uniform_condition() -> Verdict {
    let (v, h) = barriers();
    let p = ParabolicProblem::new(reference_coeffs(), InitialData::Constant { value: 0.0 }, BoundaryTrajectory::Sine { amplitude: 1.0 }, S)
        .unwrap()
        .with_v0(build_v0(h));
    let grid = Grid1D::with_spacing(40.0, 0.1).unwrap();
    let traj = solve_parabolic_ball(&p, 40.0, &TimeGrid::finite(50.0, 0.05).unwrap(), &grid).expect("trajectory");
    let r = verify_uniform_boundary(&traj, &p, v, v.r0).expect("report");
    Verdict::new(
        r.passed,
        format!("fitted C_bar = {:.4e} (eps {}), outer envelope nonincreasing {}", r.fitted_cbar, r.eps, r.envelope_monotone),
    )
}

fn c10_monotone_envelopes() -> Verdict {
    let gamma = 0.5;
    let p = reaction_problem(
        InitialData::Bump { base: gamma, amplitude: 0.5, radius: 2.0 },
        BoundaryTrajectory::DampedSine { gamma, amplitude: 1.0 },
    );
    let lower = BoundaryTrajectory::ExpDecay { gamma, amplitude: -1.0 };
    let upper = BoundaryTrajectory::ExpDecay { gamma, amplitude: 1.0 };
    let grid = Grid1D::with_spacing(20.0, 0.1).unwrap();
    match sandwich(&p, &lower, &upper, 3.0, &grid, &TimeGrid::finite(50.0, 0.05).unwrap()) {
        Ok(r) => Verdict::new(
            r.passed,
            format!(
                "largest step against direction: sub {:.1e}, super {:.1e}; sandwich violation {:.3e}",
                r.lower.max_violation, r.upper.max_violation, r.max_violation
            ),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn c11_long_time_limit() -> Verdict {
    let p = reaction_problem(InitialData::Constant { value: 1.0 }, BoundaryTrajectory::ExpDecay { gamma: 0.5, amplitude: 0.5 });
    let cfg = LongTimeConfig {
        half_width: 40.0,
        dx: 0.1,
        dt: 0.05,
        max_horizon: 50.0,
        window: 5.0,
        tol: 1e-4,
        checkpoints: vec![10.0, 20.0, 30.0, 40.0, 50.0],
    };
    match long_time_limit(&p, &cfg) {
        Ok(r) => {
            let at_50 = r.checkpoints.iter().find(|c| c.0 == 50.0).map(|c| c.1).unwrap_or(f64::INFINITY);
            // discrepancies bottom out at the rounding level of the two solves
            let decreasing = r.checkpoints_decreasing(1e-12);
            let trace: Vec<String> = r.checkpoints.iter().map(|(t, d)| format!("{t}: {d:.2e}")).collect();
            Verdict::new(
                at_50 <= 1e-2 && decreasing && r.checkpoints.len() == 5,
                format!("sup |u(T) - W| on |x| <= 5 at [{}], nonincreasing {decreasing}", trace.join(", ")),
            )
        }
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn random_field(rng: &mut ChaCha8Rng) -> CoefficientField {
    CoefficientField::new(
        Diffusion::Modulated { c0: rng.gen_range(0.5..2.0), alpha: rng.gen_range(1.0..2.5), amplitude: rng.gen_range(0.0..2.0) },
        Reaction::GaussianWell { depth: rng.gen_range(0.0..2.0), width: rng.gen_range(0.5..3.0) },
        Source::Zero,
    )
}

fn c12_comparison() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let mut elliptic_violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(20..100);
        let s = rng.gen_range(0.05..0.45);
        let grid = Grid1D::new(rng.gen_range(2.0..8.0), n).unwrap();
        let coeffs = random_field(&mut rng);
        let gamma_u = rng.gen_range(-1.0..1.0);
        let gamma_v = gamma_u + rng.gen_range(0.0..1.0);
        let f_u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f_v: Vec<f64> = f_u.iter().map(|f| f + rng.gen_range(0.0..1.0)).collect();
        let u = solve_with_source(&EllipticProblem::new(coeffs, gamma_u, s).unwrap(), &grid, &f_u).unwrap();
        let v = solve_with_source(&EllipticProblem::new(coeffs, gamma_v, s).unwrap(), &grid, &f_v).unwrap();
        if u.values.iter().zip(&v.values).any(|(a, b)| a > b) {
            elliptic_violations += 1;
        }
    }
    let mut parabolic_violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(20..80);
        let s = rng.gen_range(0.05..0.45);
        let steps = rng.gen_range(5..30);
        let dt = rng.gen_range(0.01..0.5);
        let grid = Grid1D::new(rng.gen_range(2.0..8.0), n).unwrap();
        let coeffs = random_field(&mut rng);
        let mut draw = |len: usize, lo: f64, hi: f64| (0..len).map(|_| rng.gen_range(lo..hi)).collect::<Vec<f64>>();
        let (u0, g_u, f_u) = (draw(n, -1.0, 1.0), draw(steps, -1.0, 1.0), draw(n, -1.0, 1.0));
        let (du0, dg, df) = (draw(n, 0.0, 1.0), draw(steps, 0.0, 1.0), draw(n, 0.0, 1.0));
        let add = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<f64>>();
        let u = march_nodes(&coeffs, s, &grid, dt, u0.clone(), f_u.clone(), &g_u).unwrap();
        let v = march_nodes(&coeffs, s, &grid, dt, add(&u0, &du0), add(&f_u, &df), &add(&g_u, &dg)).unwrap();
        if u.iter().zip(&v).any(|(a, b)| a.iter().zip(b).any(|(x, y)| x > y)) {
            parabolic_violations += 1;
        }
    }
    Verdict::new(
        elliptic_violations == 0 && parabolic_violations == 0,
        format!("ordering violations: elliptic {elliptic_violations}/100, parabolic {parabolic_violations}/100"),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let checks = [
        Check { id: 1, title: "hypergeometric limit", budget: Some(secs(5)), run: c1_hypergeometric_limit },
        Check { id: 2, title: "exit-time identity", budget: Some(secs(30)), run: c2_exit_time_identity },
        Check { id: 3, title: "decay barrier certificate", budget: None, run: c3_decay_barrier },
        Check { id: 4, title: "global barrier certificate", budget: None, run: c4_global_barrier },
        Check { id: 5, title: "closed form vs quadrature", budget: None, run: c5_closed_form_vs_quadrature },
        Check { id: 6, title: "elliptic exactness and nested limit", budget: Some(secs(60)), run: c6_elliptic_exactness },
        Check { id: 7, title: "elliptic decay bound", budget: None, run: c7_elliptic_decay_bound },
        Check { id: 8, title: "parabolic global bound", budget: None, run: c8_parabolic_global_bound },
        Check { id: 9, title: "uniform condition at infinity", budget: None, run: c9_uniform_condition },
        Check { id: 10, title: "monotone envelopes", budget: None, run: c10_monotone_envelopes },
        Check { id: 11, title: "long-time limit", budget: Some(secs(300)), run: c11_long_time_limit },
        Check { id: 12, title: "comparison principles", budget: None, run: c12_comparison },
    ];
    if !run_all(&checks) {
        std::process::exit(1);
    }
}
