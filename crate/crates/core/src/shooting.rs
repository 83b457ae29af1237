//! Floating-point continuation of the formal solutions: seeding, adaptive
//! integration with event detection, boundary defects at the opposite orbit,
//! invariant monitors, parameter scans, and two-sided matching for model A.
//!
//! A trajectory starts from the series solution at `t = eps`, runs in the
//! seed endpoint's `(x, y)` variables (regular at the orbit) until half the
//! interval, then switches to the symmetric `(f, f')` variables. Monitors
//! sample the trace equation, the swap invariant (`|f_4^2 - f_5^2|` or
//! `|f_2^2 - f_3^2|`, scaled) and model B's non-diagonal constraint at every
//! accepted step. Integrations are sequential and deterministic; scan rows
//! and minimizer restarts run in parallel and are merged in grid order.

use crate::algebra::Rational;
use crate::einstein::{self, EinsteinSystem};
use crate::expr::ParamEnv;
use crate::formal::{self, FormalError, SeriesSolution};
use crate::models::{BoundaryData, BoundarySlot, ModelId, ModelSpec};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Shooting failure.
#[derive(Debug, Clone)]
pub enum ShootError {
    Formal(FormalError),
    /// The series tail estimate at the seed time exceeds the tolerance; the
    /// caller must shrink `eps`.
    SeriesDivergent { estimate: f64, tolerance: f64 },
    /// The integrator could not take a step above the minimum size.
    StepUnderflow { t: f64 },
    /// Model A necessary-condition violation reported before integration.
    Infeasible(String),
    Eval(String),
}

impl fmt::Display for ShootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShootError::Formal(e) => write!(f, "formal solve failed: {e}"),
            ShootError::SeriesDivergent { estimate, tolerance } => {
                write!(f, "series tail estimate {estimate:.3e} exceeds {tolerance:.3e}; shrink eps")
            }
            ShootError::StepUnderflow { t } => write!(f, "step underflow at t = {t}"),
            ShootError::Infeasible(msg) => write!(f, "infeasible configuration: {msg}"),
            ShootError::Eval(msg) => write!(f, "evaluation failure: {msg}"),
        }
    }
}

impl std::error::Error for ShootError {}

impl From<FormalError> for ShootError {
    fn from(e: FormalError) -> Self {
        ShootError::Formal(e)
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    ReachedTarget,
    /// Some `f_i` dropped below the collapse threshold.
    Collapse { index: usize },
    /// The state norm exceeded the blowup threshold.
    Blowup,
    StepUnderflow,
}

/// Integration and event options.
#[derive(Debug, Clone, Serialize)]
pub struct ShootConfig {
    /// Series truncation order for the seed.
    pub order: usize,
    /// Seed offset from the singular orbit.
    pub eps: f64,
    /// Per-step error tolerance.
    pub tol: f64,
    /// Relative tail tolerance for the seed estimate.
    pub seed_tol: f64,
    /// Coordinate collapse threshold (on the metric functions).
    pub collapse_delta: f64,
    /// State blowup threshold.
    pub blowup: f64,
    /// Fraction of the interval integrated in `(x, y)` variables.
    pub switch_fraction: f64,
    pub max_steps: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            order: 12,
            eps: 1e-3,
            tol: 1e-10,
            seed_tol: 1e-9,
            collapse_delta: 1e-8,
            blowup: 1e8,
            switch_fraction: 0.5,
            max_steps: 200_000,
        }
    }
}

/// One recorded sample: time, metric functions, their derivatives, monitors.
#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub trace_residual: f64,
    pub swap_deviation: f64,
    pub constraint_b: f64,
}

/// Running maxima of the monitored quantities.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MonitorStats {
    pub max_trace_residual: f64,
    pub max_swap_deviation: f64,
    pub max_constraint_b: f64,
}

/// Result of one integration.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub model: ModelId,
    pub endpoint: usize,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub end_time: f64,
    /// `(f, f')` at the final accepted point.
    pub end_f: Vec<f64>,
    pub end_fp: Vec<f64>,
    pub monitors: MonitorStats,
    pub steps: usize,
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) core
// ---------------------------------------------------------------------------

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step; returns `(y5, error_estimate)` or `None` when the
/// right-hand side failed to evaluate.
fn dp_step<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> Option<(Vec<f64>, f64, Vec<f64>)>
where
    F: Fn(f64, &[f64], &mut [f64]) -> bool,
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    if !rhs(t, y, &mut k[0]) {
        return None;
    }
    let mut stage = vec![0.0; n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += DP_A[s][j] * kj[i];
            }
            stage[i] = y[i] + h * acc;
        }
        let (head, tail) = k.split_at_mut(s);
        let _ = head;
        if !rhs(t + DP_C[s] * h, &stage, &mut tail[0]) {
            return None;
        }
    }
    let mut y5 = vec![0.0; n];
    let mut err = 0.0f64;
    for i in 0..n {
        let mut acc5 = 0.0;
        let mut acc4 = 0.0;
        for (j, kj) in k.iter().enumerate() {
            acc5 += DP_B5[j] * kj[i];
            acc4 += DP_B4[j] * kj[i];
        }
        y5[i] = y[i] + h * acc5;
        let sc = 1.0 + y[i].abs().max(y5[i].abs());
        let e = h * (acc5 - acc4) / sc;
        err += e * e;
    }
    Some((y5, (err / n as f64).sqrt(), k.swap_remove(0)))
}

/// Adaptive integration of `y' = rhs(t, y)` from `t0` to `t_end > t0`.
///
/// `event` classifies states; on a sign change the event time is refined by
/// bisection. `on_accept` observes every accepted step.
pub fn integrate<F, E, O>(
    rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: f64,
    max_steps: usize,
    event: E,
    mut on_accept: O,
) -> (f64, Vec<f64>, Termination, usize)
where
    F: Fn(f64, &[f64], &mut [f64]) -> bool,
    E: Fn(f64, &[f64]) -> Option<Termination>,
    O: FnMut(f64, &[f64]),
{
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = ((t_end - t0) / 100.0).min(1e-2).max(1e-12);
    let h_min = 1e-14 * (1.0 + t_end.abs());
    let mut steps = 0;

    while t < t_end {
        if steps >= max_steps {
            return (t, y, Termination::StepUnderflow, steps);
        }
        let h_eff = h.min(t_end - t);
        match dp_step(&rhs, t, &y, h_eff) {
            Some((y_new, err, _)) if err <= tol => {
                let t_new = t + h_eff;
                steps += 1;
                if let Some(kind) = event(t_new, &y_new) {
                    // Bisection refinement of the event time.
                    let (te, ye) = refine_event(&rhs, t, &y, t_new, h_eff, &event);
                    on_accept(te, &ye);
                    return (te, ye, kind, steps);
                }
                t = t_new;
                y = y_new;
                on_accept(t, &y);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
                h = (h_eff * factor).max(h_min);
            }
            Some((_, err, _)) => {
                let factor = (0.9 * (tol / err).powf(0.2)).clamp(0.1, 1.0);
                h = h_eff * factor;
                if h < h_min {
                    return (t, y, Termination::StepUnderflow, steps);
                }
            }
            None => {
                // Right-hand side failed (division by a vanishing
                // coordinate); retry with a smaller step.
                h = h_eff * 0.25;
                if h < h_min {
                    return (t, y, Termination::StepUnderflow, steps);
                }
            }
        }
    }
    (t, y, Termination::ReachedTarget, steps)
}

fn refine_event<F, E>(rhs: &F, t0: f64, y0: &[f64], t1: f64, h: f64, event: &E) -> (f64, Vec<f64>)
where
    F: Fn(f64, &[f64], &mut [f64]) -> bool,
    E: Fn(f64, &[f64]) -> Option<Termination>,
{
    let mut lo = t0;
    let mut lo_state = y0.to_vec();
    let mut width = h;
    let mut best = (t1, None::<Vec<f64>>);
    for _ in 0..60 {
        width *= 0.5;
        if width < 1e-13 * (1.0 + t1.abs()) {
            break;
        }
        let mid_t = lo + width;
        let Some((mid_y, _, _)) = dp_step(rhs, lo, &lo_state, width) else {
            break;
        };
        if event(mid_t, &mid_y).is_some() {
            best = (mid_t, Some(mid_y));
        } else {
            lo = mid_t;
            lo_state = mid_y;
        }
    }
    match best.1 {
        Some(y) => (best.0, y),
        None => (t1, lo_state),
    }
}

// ---------------------------------------------------------------------------
// Seeding and variable conversions
// ---------------------------------------------------------------------------

/// Evaluates the series at `t = eps` and estimates the truncation error as
/// the difference between the order-`M` and order-`M-2` evaluations.
pub fn seed_from_series(
    sol: &SeriesSolution,
    eps: f64,
    seed_tol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64), ShootError> {
    let (x, y) = sol.eval_f64(eps);
    let (x_lo, y_lo) = sol.eval_f64_at_order(eps, sol.order - 2);
    let mut est = 0.0f64;
    for i in 0..sol.dim {
        est = est.max((x[i] - x_lo[i]).abs() / (1.0 + x[i].abs()));
        est = est.max((y[i] - y_lo[i]).abs() / (1.0 + y[i].abs()));
    }
    if !est.is_finite() || est > seed_tol {
        return Err(ShootError::SeriesDivergent {
            estimate: est,
            tolerance: seed_tol,
        });
    }
    Ok((x, y, est))
}

/// `(x, y) -> (f, f')` at time `t`, using the endpoint's collapse pattern.
pub fn xy_to_f(collapse: &[bool], t: f64, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut f = vec![0.0; n];
    let mut fp = vec![0.0; n];
    for i in 0..n {
        let root = x[i].max(0.0).sqrt();
        if collapse[i] {
            f[i] = t * root;
            fp[i] = if root > 0.0 { (y[i] * t + x[i]) / root } else { 0.0 };
        } else {
            f[i] = root;
            fp[i] = if root > 0.0 { y[i] / root } else { 0.0 };
        }
    }
    (f, fp)
}

// ---------------------------------------------------------------------------
// Model trajectories
// ---------------------------------------------------------------------------

/// Which swap invariant a model monitors.
fn swap_pair(spec: &ModelSpec) -> Option<(usize, usize)> {
    match spec.id {
        ModelId::B | ModelId::D | ModelId::E => Some((3, 4)),
        ModelId::C => Some((1, 2)),
        ModelId::A => None,
    }
}

struct MonitorCtx<'a> {
    spec: &'a ModelSpec,
    system: &'a EinsteinSystem,
    env: &'a ParamEnv,
    lambda: f64,
}

impl MonitorCtx<'_> {
    /// Monitors from an `(f, f')` state; deviation is scaled by
    /// `1 + max_i f_i^2`.
    fn sample(&self, t: f64, f: &[f64], fp: &[f64]) -> Sample {
        let trace = match self.system.accel_f64(self.env, f, fp) {
            Ok(acc) => self.system.trace_residual_f64(f, &acc, self.lambda).abs(),
            Err(_) => f64::INFINITY,
        };
        let swap = match swap_pair(self.spec) {
            Some((a, b)) => {
                let fa = f[a] * f[a];
                let fb = f[b] * f[b];
                let scale = 1.0 + f.iter().map(|v| v * v).fold(0.0f64, f64::max);
                (fa - fb).abs() / scale
            }
            None => 0.0,
        };
        let constraint = if self.spec.id == ModelId::B {
            einstein::nondiagonal_residual_b_f64(self.spec, f).map_or(f64::INFINITY, f64::abs)
        } else {
            0.0
        };
        Sample {
            t,
            f: f.to_vec(),
            fp: fp.to_vec(),
            trace_residual: trace,
            swap_deviation: swap,
            constraint_b: constraint,
        }
    }
}

fn accumulate(stats: &mut MonitorStats, s: &Sample) {
    stats.max_trace_residual = stats.max_trace_residual.max(s.trace_residual);
    stats.max_swap_deviation = stats.max_swap_deviation.max(s.swap_deviation);
    stats.max_constraint_b = stats.max_constraint_b.max(s.constraint_b);
}

/// Integrates the seeded trajectory to `t_end` (in the seed endpoint's own
/// time): `(x, y)` variables to `switch_fraction * t_end`, `(f, f')` after.
pub fn shoot(
    spec: &ModelSpec,
    endpoint: usize,
    env: &ParamEnv,
    free: &[Rational],
    t_end: f64,
    cfg: &ShootConfig,
) -> Result<Trajectory, ShootError> {
    let sol = formal::solve_formal(spec.ivp(endpoint), env, cfg.order, free)?;
    shoot_from_solution(spec, &sol, env, t_end, cfg)
}

/// As [`shoot`], starting from an existing formal solution.
pub fn shoot_from_solution(
    spec: &ModelSpec,
    sol: &SeriesSolution,
    env: &ParamEnv,
    t_end: f64,
    cfg: &ShootConfig,
) -> Result<Trajectory, ShootError> {
    let endpoint = sol.endpoint;
    let ivp = spec.ivp(endpoint);
    let collapse = ivp.collapse.clone();
    let system = einstein::build_generic_scaled(spec);
    let lambda = env
        .get("lambda")
        .map(Rational::to_f64)
        .ok_or_else(|| ShootError::Eval("lambda is not bound".into()))?;
    let ctx = MonitorCtx {
        spec,
        system: &system,
        env,
        lambda,
    };

    let (x0, y0, _est) = seed_from_series(sol, cfg.eps, cfg.seed_tol)?;
    let dim = sol.dim;

    let mut samples: Vec<Sample> = Vec::new();
    let mut stats = MonitorStats::default();
    let (f_seed, fp_seed) = xy_to_f(&collapse, cfg.eps, &x0, &y0);
    let s0 = ctx.sample(cfg.eps, &f_seed, &fp_seed);
    accumulate(&mut stats, &s0);
    samples.push(s0);

    // Phase 1: (x, y) variables.
    let t_switch = (cfg.switch_fraction * t_end).max(cfg.eps);
    let mut state: Vec<f64> = x0.iter().chain(y0.iter()).copied().collect();
    let rhs_xy = |t: f64, s: &[f64], out: &mut [f64]| -> bool {
        let (x, y) = s.split_at(dim);
        if t <= 0.0 || x.iter().any(|&v| v <= 0.0) {
            return false;
        }
        for i in 0..dim {
            out[i] = 2.0 * y[i];
        }
        for i in 0..dim {
            let a = ivp.a[i].eval_f64(env, t, x, y);
            let b = ivp.b[i].eval_f64(env, t, x, y);
            let c = ivp.c[i].eval_f64(env, t, x, y);
            match (a, b, c) {
                (Ok(a), Ok(b), Ok(c)) => out[dim + i] = a / (t * t) + b / t + c,
                _ => return false,
            }
        }
        out.iter().all(|v| v.is_finite())
    };
    let event_xy = |t: f64, s: &[f64]| -> Option<Termination> {
        let (x, y) = s.split_at(dim);
        let (f, _) = xy_to_f(&collapse, t, x, y);
        event_for(&f, s, cfg)
    };
    let mut term;
    let mut steps_total;
    {
        let (te, se, term1, steps) = integrate(
            rhs_xy,
            cfg.eps,
            &state,
            t_switch,
            cfg.tol,
            cfg.max_steps,
            event_xy,
            |t, s| {
                let (x, y) = s.split_at(dim);
                let (f, fp) = xy_to_f(&collapse, t, x, y);
                let smp = ctx.sample(t, &f, &fp);
                accumulate(&mut stats, &smp);
                samples.push(smp);
            },
        );
        state = se;
        term = term1;
        steps_total = steps;
        let (x, y) = state.split_at(dim);
        let (f, fp) = xy_to_f(&collapse, te, x, y);
        if term != Termination::ReachedTarget || (te - t_end).abs() < 1e-12 {
            return Ok(Trajectory {
                model: spec.id,
                endpoint,
                samples,
                termination: term,
                end_time: te,
                end_f: f,
                end_fp: fp,
                monitors: stats,
            steps: steps_total,
            });
        }
        // Phase 2: switch to (f, f').
        state = f.iter().chain(fp.iter()).copied().collect();
    }

    let rhs_f = |_t: f64, s: &[f64], out: &mut [f64]| -> bool {
        let (f, fp) = s.split_at(dim);
        if f.iter().any(|&v| v <= 0.0) {
            return false;
        }
        match system.accel_f64(env, f, fp) {
            Ok(acc) => {
                out[..dim].copy_from_slice(fp);
                out[dim..].copy_from_slice(&acc);
                out.iter().all(|v| v.is_finite())
            }
            Err(_) => false,
        }
    };
    let event_f = |_t: f64, s: &[f64]| -> Option<Termination> {
        let (f, _) = s.split_at(dim);
        event_for(f, s, cfg)
    };
    let (te, se, term2, steps2) = integrate(
        rhs_f,
        t_switch,
        &state,
        t_end,
        cfg.tol,
        cfg.max_steps,
        event_f,
        |t, s| {
            let (f, fp) = s.split_at(dim);
            let smp = ctx.sample(t, f, fp);
            accumulate(&mut stats, &smp);
            samples.push(smp);
        },
    );
    term = term2;
    steps_total += steps2;
    let (f, fp) = se.split_at(dim);
    Ok(Trajectory {
        model: spec.id,
        endpoint,
        samples,
        termination: term,
        end_time: te,
        end_f: f.to_vec(),
        end_fp: fp.to_vec(),
        monitors: stats,
        steps: steps_total,
    })
}

fn event_for(f: &[f64], raw_state: &[f64], cfg: &ShootConfig) -> Option<Termination> {
    if let Some(i) = f.iter().position(|&v| v < cfg.collapse_delta) {
        return Some(Termination::Collapse { index: i });
    }
    if raw_state.iter().any(|v| v.abs() > cfg.blowup) {
        return Some(Termination::Blowup);
    }
    None
}

// ---------------------------------------------------------------------------
// Boundary defects
// ---------------------------------------------------------------------------

/// Per-condition breakdown of a boundary defect.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    /// `sqrt` of the summed squared violations.
    pub defect: f64,
    /// For each collapsing index: `f_i^2 + (f_i' + c_i)^2`.
    pub collapse_terms: Vec<(usize, f64)>,
    /// For each non-collapsing index: `f_i'^2`.
    pub slope_terms: Vec<(usize, f64)>,
    /// Within-group variances (the free parameters are eliminated by the
    /// group means).
    pub group_variances: Vec<f64>,
    pub group_means: Vec<f64>,
}

/// Defect of a terminal `(f, f')` state against the smooth-closing data of
/// the opposite orbit, in the seed's forward time (collapsing coordinates
/// must come in with slope `-c_i`).
pub fn boundary_defect(f: &[f64], fp: &[f64], target: &BoundaryData) -> DefectReport {
    let mut total = 0.0;
    let mut collapse_terms = Vec::new();
    let mut slope_terms = Vec::new();
    for (i, slot) in target.slots.iter().enumerate() {
        match slot {
            BoundarySlot::Collapse { c_sq } => {
                let c = c_sq.to_f64().sqrt();
                let term = f[i] * f[i] + (fp[i] + c) * (fp[i] + c);
                collapse_terms.push((i, term));
                total += term;
            }
            BoundarySlot::Group(_) => {
                let term = fp[i] * fp[i];
                slope_terms.push((i, term));
                total += term;
            }
        }
    }
    let mut group_variances = Vec::new();
    let mut group_means = Vec::new();
    for members in target.group_members() {
        let mean = members.iter().map(|&i| f[i]).sum::<f64>() / members.len() as f64;
        let var = members.iter().map(|&i| (f[i] - mean) * (f[i] - mean)).sum::<f64>();
        group_means.push(mean);
        group_variances.push(var);
        total += var;
    }
    DefectReport {
        defect: total.sqrt(),
        collapse_terms,
        slope_terms,
        group_variances,
        group_means,
    }
}

/// Kinds of invariant monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonitorKind {
    Swap45,
    Swap23,
    ModelBConstraint,
    Trace,
}

/// Maximum recorded deviation of the requested monitor over a trajectory.
pub fn invariant_monitor(traj: &Trajectory, kind: MonitorKind) -> f64 {
    match kind {
        MonitorKind::Swap45 | MonitorKind::Swap23 => traj.monitors.max_swap_deviation,
        MonitorKind::ModelBConstraint => traj.monitors.max_constraint_b,
        MonitorKind::Trace => traj.monitors.max_trace_residual,
    }
}

// ---------------------------------------------------------------------------
// Parameter scans
// ---------------------------------------------------------------------------

/// One grid point of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub zeta_sq: Rational,
    pub lambda: Rational,
    pub termination: Termination,
    /// Minimum defect against the opposite orbit over the `T` grid.
    pub min_defect: f64,
    /// `T` attaining the minimum.
    pub best_t: f64,
    pub monitors: MonitorStats,
    /// Model A only: float residual of the compatibility identity.
    pub compatibility_residual: Option<f64>,
}

/// Scans a `(zeta, lambda)` grid from `endpoint`, integrating to each `T` in
/// `t_grid` and reporting the minimum defect against the opposite orbit.
/// Rows are computed in parallel and returned in grid order. Kernel
/// parameters are fixed to zero and any secondary group parameter to 1.
pub fn scan(
    spec: &ModelSpec,
    endpoint: usize,
    zeta_grid: &[Rational],
    lambda_grid: &[Rational],
    t_grid: &[f64],
    cfg: &ShootConfig,
) -> Vec<ScanRow> {
    let points: Vec<(Rational, Rational)> = zeta_grid
        .iter()
        .flat_map(|z| lambda_grid.iter().map(move |l| (z.clone(), l.clone())))
        .collect();
    points
        .par_iter()
        .map(|(zeta, lambda)| scan_point(spec, endpoint, zeta, lambda, t_grid, cfg))
        .collect()
}

fn scan_point(
    spec: &ModelSpec,
    endpoint: usize,
    zeta_sq: &Rational,
    lambda: &Rational,
    t_grid: &[f64],
    cfg: &ShootConfig,
) -> ScanRow {
    let mut env = spec.base_env();
    env.insert("lambda", lambda.clone());
    for g in &spec.boundary_ivp[endpoint].groups {
        if g.starts_with("zeta") {
            env.insert(g, zeta_sq.clone());
        } else {
            env.insert(g, Rational::one());
        }
    }
    let ivp = spec.ivp(endpoint);
    let target = &spec.boundary_ivp[1 - endpoint];

    let mut min_defect = f64::INFINITY;
    let mut best_t = f64::NAN;
    let mut termination = Termination::StepUnderflow;
    let mut monitors = MonitorStats::default();
    let mut compat: Option<f64> = None;

    let kernel_dim = formal::compute_lm(ivp, &env, 0)
        .map(|l| l.kernel_basis().len())
        .unwrap_or(0);
    let free = vec![Rational::zero(); kernel_dim];

    for &t_end in t_grid {
        match shoot(spec, endpoint, &env, &free, t_end, cfg) {
            Ok(traj) => {
                let report = boundary_defect(&traj.end_f, &traj.end_fp, target);
                if report.defect < min_defect {
                    min_defect = report.defect;
                    best_t = t_end;
                    termination = traj.termination;
                }
                monitors.max_trace_residual = monitors.max_trace_residual.max(traj.monitors.max_trace_residual);
                monitors.max_swap_deviation = monitors.max_swap_deviation.max(traj.monitors.max_swap_deviation);
                monitors.max_constraint_b = monitors.max_constraint_b.max(traj.monitors.max_constraint_b);
                if spec.id == ModelId::A && compat.is_none() {
                    if let Ok(sol) = formal::solve_formal(ivp, &env, cfg.order, &free) {
                        if let Ok(v) = formal::compatibility_lambda_a(spec, &env, &sol) {
                            compat = Some((v.to_f64() - lambda.to_f64()).abs());
                        }
                    }
                }
            }
            Err(_) => {
                // Leave the row marked; other T values may still integrate.
            }
        }
    }
    ScanRow {
        zeta_sq: zeta_sq.clone(),
        lambda: lambda.clone(),
        termination,
        min_defect,
        best_t,
        monitors,
        compatibility_residual: compat,
    }
}

// ---------------------------------------------------------------------------
// Nelder-Mead (derivative-free simplex search with bounded restarts)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iter: usize,
    pub f_tol: f64,
    pub restarts: usize,
    /// Initial simplex displacement per coordinate.
    pub step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iter: 400,
            f_tol: 1e-12,
            restarts: 2,
            step: 0.1,
        }
    }
}

/// Nelder-Mead with restarts. Bounds are the objective's business: return
/// `f64::INFINITY` outside the feasible box.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &SimplexOptions) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut best_x = x0.to_vec();
    let mut best_f = f(x0);
    let mut evals = 1;
    for restart in 0..=opts.restarts {
        let step = opts.step / (1 << restart) as f64;
        let (x, fx, e) = nelder_mead_once(&f, &best_x, step, opts);
        evals += e;
        if fx < best_f {
            best_f = fx;
            best_x = x;
        }
    }
    (best_x, best_f, evals)
}

fn nelder_mead_once<F>(f: &F, x0: &[f64], step: f64, opts: &SimplexOptions) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64]| {
        evals += 1;
        f(x)
    };
    // Initial simplex: x0 plus per-coordinate displacements.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step * (1.0 + x[i].abs());
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    for _ in 0..opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < opts.f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n).map(|j| centroid[j] + (centroid[j] - worst.0[j])).collect();
        let f_r = eval(&reflect);
        if f_r < simplex[0].1 {
            let expand: Vec<f64> = (0..n).map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j])).collect();
            let f_e = eval(&expand);
            simplex[n] = if f_e < f_r { (expand, f_e) } else { (reflect, f_r) };
        } else if f_r < simplex[n - 1].1 {
            simplex[n] = (reflect, f_r);
        } else {
            let contract: Vec<f64> = (0..n).map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j])).collect();
            let f_c = eval(&contract);
            if f_c < worst.1 {
                simplex[n] = (contract, f_c);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        v.0[j] = best[j] + 0.5 * (v.0[j] - best[j]);
                    }
                    v.1 = eval(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

// ---------------------------------------------------------------------------
// Two-sided matching for model A
// ---------------------------------------------------------------------------

/// Inputs of a two-sided model A match.
#[derive(Debug, Clone, Serialize)]
pub struct MatchInputs {
    pub zeta0_sq: f64,
    pub s0: f64,
    pub zeta1_sq: f64,
    pub s1: f64,
    pub lambda: f64,
    pub t_total: f64,
}

/// Interface mismatch between the two one-sided trajectories at `T/2`.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub inputs: MatchInputs,
    /// `(f, f')` differences at the interface, 2s components.
    pub mismatch: Vec<f64>,
    pub norm: f64,
    pub side0_termination: Termination,
    pub side1_termination: Termination,
}

fn rational_approx(v: f64) -> Rational {
    // Exact binary representation: v * 2^k as integer over 2^k.
    let scaled = (v * (1u64 << 40) as f64).round() as i64;
    Rational::from_ratio(scaled, 1i64 << 40)
}

/// Integrates model A from both singular orbits to the midpoint `T/2` and
/// reports the `(f, f')` mismatch there. Side 1 runs in its reversed time;
/// its state maps to `(g, -g')`.
pub fn match_two_sided_a(
    spec: &ModelSpec,
    inputs: &MatchInputs,
    cfg: &ShootConfig,
    prescribed_f2pp0: Option<f64>,
) -> Result<MatchReport, ShootError> {
    assert_eq!(spec.id, ModelId::A);
    if inputs.zeta0_sq <= 0.0 || inputs.zeta1_sq <= 0.0 || inputs.t_total <= 2.0 * cfg.eps {
        return Err(ShootError::Infeasible("zeta slots must be positive and T > 2 eps".into()));
    }

    let lambda = rational_approx(inputs.lambda);
    let mut env0 = spec.base_env();
    env0.insert("lambda", lambda.clone());
    env0.insert("zeta0_sq", rational_approx(inputs.zeta0_sq));
    let mut env1 = spec.base_env();
    env1.insert("lambda", lambda.clone());
    env1.insert("zeta1_sq", rational_approx(inputs.zeta1_sq));

    let sol0 = formal::solve_formal(spec.ivp(0), &env0, cfg.order, &[rational_approx(inputs.s0)])?;
    let sol1 = formal::solve_formal(spec.ivp(1), &env1, cfg.order, &[rational_approx(inputs.s1)])?;

    // Necessary-condition guard (Prop-4.1(c) shape): the compatibility value
    // of both one-sided series must equal lambda; a user-prescribed f_2''(0)
    // is checked against the value the series forces.
    let compat0 = formal::compatibility_lambda_a(spec, &env0, &sol0)?;
    let compat1 = formal::compatibility_lambda_a(spec, &env1, &sol1)?;
    if compat0 != lambda || compat1 != lambda {
        return Err(ShootError::Infeasible(format!(
            "compatibility values {compat0}, {compat1} differ from lambda {lambda}"
        )));
    }
    if let Some(f2pp0) = prescribed_f2pp0 {
        let zeta0 = inputs.zeta0_sq.sqrt();
        let forced = sol0.x_coeffs[2][1].to_f64() / (2.0 * zeta0);
        if (forced - f2pp0).abs() > 1e-9 * (1.0 + forced.abs()) {
            return Err(ShootError::Infeasible(format!(
                "prescribed f_2''(0) = {f2pp0} violates the necessary condition; \
                 lambda and zeta_0 force f_2''(0) = {forced}"
            )));
        }
    }

    let t_half = inputs.t_total / 2.0;
    let run = |sol: &SeriesSolution, env: &ParamEnv| -> Result<(Vec<f64>, Vec<f64>, Termination), ShootError> {
        let traj = shoot_from_solution(spec, sol, env, t_half, cfg)?;
        Ok((traj.end_f.clone(), traj.end_fp.clone(), traj.termination))
    };
    let (f0, fp0, term0) = run(&sol0, &env0).map_err(|e| ShootError::Eval(format!("side 0: {e}")))?;
    let (f1, fp1, term1) = run(&sol1, &env1).map_err(|e| ShootError::Eval(format!("side 1: {e}")))?;

    // Side 1 in original time: f(T - tau) = g(tau), f'(T - tau) = -g'(tau).
    let mut mismatch = Vec::with_capacity(2 * spec.s);
    for i in 0..spec.s {
        mismatch.push(f0[i] - f1[i]);
    }
    for i in 0..spec.s {
        mismatch.push(fp0[i] + fp1[i]);
    }
    let norm = mismatch.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(MatchReport {
        inputs: inputs.clone(),
        mismatch,
        norm,
        side0_termination: term0,
        side1_termination: term1,
    })
}

/// Derivative-free local minimization of the interface mismatch over
/// `(zeta0, s0, zeta1, s1, lambda, T)`, with restarts. Reports the best
/// found value; no global claim is made.
pub fn match_minimize_a(
    spec: &ModelSpec,
    start: &MatchInputs,
    cfg: &ShootConfig,
    opts: &SimplexOptions,
) -> (MatchInputs, f64, usize) {
    let objective = |v: &[f64]| -> f64 {
        let inputs = MatchInputs {
            zeta0_sq: v[0],
            s0: v[1],
            zeta1_sq: v[2],
            s1: v[3],
            lambda: v[4],
            t_total: v[5],
        };
        if inputs.zeta0_sq <= 1e-3
            || inputs.zeta1_sq <= 1e-3
            || inputs.lambda <= 0.0
            || inputs.t_total <= 4.0 * cfg.eps
            || inputs.t_total > 40.0
        {
            return f64::INFINITY;
        }
        match match_two_sided_a(spec, &inputs, cfg, None) {
            Ok(report) => {
                if report.side0_termination == Termination::ReachedTarget
                    && report.side1_termination == Termination::ReachedTarget
                {
                    report.norm
                } else {
                    // Penalize early termination but keep the landscape usable.
                    report.norm + 10.0
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    let x0 = vec![
        start.zeta0_sq,
        start.s0,
        start.zeta1_sq,
        start.s1,
        start.lambda,
        start.t_total,
    ];
    let (x, fx, evals) = nelder_mead(objective, &x0, opts);
    (
        MatchInputs {
            zeta0_sq: x[0],
            s0: x[1],
            zeta1_sq: x[2],
            s1: x[3],
            lambda: x[4],
            t_total: x[5],
        },
        fx,
        evals,
    )
}

#[cfg(test)]
#[path = "shooting_tests.rs"]
mod tests;
