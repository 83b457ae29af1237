//! `cohom1` — cohomogeneity-one Einstein systems on complex projective
//! spaces: model inspection, identity verification, exact series solving,
//! shooting, parameter scans, two-sided matching and full reproduction runs.
//!
//! Exit codes: 0 on completion, 1 when a verification check fails, 2 on an
//! integration failure. The `COHOM1_THREADS` environment variable caps
//! parallelism. All exact quantities are entered as rationals (`3/2`);
//! floating-point input is accepted only for shooting-side tolerances.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use cohom1_core::algebra::Rational;
use cohom1_core::expr::ParamEnv;
use cohom1_core::models::{get_model, ModelId, ModelSpec};
use cohom1_core::shooting::{MatchInputs, ShootConfig, Termination};
use cohom1_core::{einstein, formal, shooting, verify};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cohom1", version, about = "Cohomogeneity-one Einstein ODE toolkit")]
struct Cli {
    /// Key-value configuration file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exclude timestamps so repeated runs produce byte-identical reports.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Model label: A, B, C, D or E.
    #[arg(long)]
    model: Option<String>,
    /// Model A parameter p (integer, p > 1, p >= q).
    #[arg(long)]
    p: Option<String>,
    /// Model A parameter q (integer, q >= 1).
    #[arg(long)]
    q: Option<String>,
    /// Model B/C parameter n.
    #[arg(long)]
    n: Option<String>,
}

#[derive(Args, Clone, Default)]
struct BindingArgs {
    /// Einstein constant, exact rational.
    #[arg(long)]
    lambda: Option<String>,
    /// Squared boundary parameter zeta_0^2.
    #[arg(long = "zeta0-sq")]
    zeta0_sq: Option<String>,
    /// Squared boundary parameter zeta_1^2.
    #[arg(long = "zeta1-sq")]
    zeta1_sq: Option<String>,
    /// Squared boundary parameter xi_1^2.
    #[arg(long = "xi1-sq")]
    xi1_sq: Option<String>,
    /// Kernel (free) parameters of the order-2 family, `name=value`.
    #[arg(long = "free", value_name = "NAME=RAT")]
    free: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the static data of a model: dimensions, brackets, Killing
    /// constants, boundary data and symmetry.
    Model {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Einstein-system checks.
    Einstein {
        #[command(subcommand)]
        sub: EinsteinCmd,
    },
    /// Solve the singular IVP as an exact formal power series.
    Series {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        bindings: BindingArgs,
        #[arg(long, default_value_t = 0)]
        endpoint: usize,
        #[arg(long, default_value_t = 12)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact identity suite for one model (or all).
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a seeded trajectory and report defects and monitors.
    Shoot {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        bindings: BindingArgs,
        #[arg(long, default_value_t = 0)]
        endpoint: usize,
        /// Total integration time in the seed's own parameter.
        #[arg(long = "t-end", default_value_t = 1.0)]
        t_end: f64,
        #[command(flatten)]
        numerics: NumericsArgs,
        /// Trajectory CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Report JSON output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan a (zeta^2, lambda) grid and report minimum defects.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        endpoint: usize,
        /// Comma-separated exact rationals for zeta^2.
        #[arg(long = "zeta-grid", default_value = "1/4,1,4")]
        zeta_grid: String,
        /// Comma-separated exact rationals for lambda.
        #[arg(long = "lambda-grid", default_value = "1,2,4")]
        lambda_grid: String,
        /// Comma-separated interval lengths T.
        #[arg(long = "t-grid", default_value = "0.5,0.8,1.1,1.4")]
        t_grid: String,
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sided matching for model A: integrate from both orbits to T/2.
    Match {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "1")]
        zeta0_sq: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        s0: String,
        #[arg(long, default_value = "1")]
        zeta1_sq: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        s1: String,
        #[arg(long, default_value = "2")]
        lambda: String,
        #[arg(long = "t-total", default_value_t = 1.0)]
        t_total: f64,
        /// Run the derivative-free minimizer from this starting point.
        #[arg(long)]
        minimize: bool,
        /// Allow lambda <= 0 during minimization.
        #[arg(long)]
        allow_nonpositive_lambda: bool,
        /// Prescribed f_2''(0); rejected before integration when it violates
        /// the necessary condition.
        #[arg(long, allow_hyphen_values = true)]
        f2pp0: Option<f64>,
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance-criteria suite end to end and write a bundle.
    Reproduce {
        /// Filter criteria by substring of their name (e.g. `nonexistence`).
        #[arg(long)]
        only: Option<String>,
        /// Output directory for the bundle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EinsteinCmd {
    /// Exact equivalence of the generic and transcribed systems.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct NumericsArgs {
    /// Per-step integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Seed offset from the singular orbit.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Series truncation order for seeding.
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Coordinate collapse threshold.
    #[arg(long, default_value_t = 1e-8)]
    collapse_delta: f64,
    /// Blowup threshold.
    #[arg(long, default_value_t = 1e8)]
    blowup: f64,
}

impl NumericsArgs {
    fn to_config(&self) -> ShootConfig {
        ShootConfig {
            order: self.order,
            eps: self.eps,
            tol: self.tol,
            collapse_delta: self.collapse_delta,
            blowup: self.blowup,
            ..ShootConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let mut raw: Vec<String> = std::env::args().collect();
    // A config file supplies defaults: its entries are inserted as flags
    // right after the subcommand, so explicit flags (parsed later) override.
    if let Some(path) = config::config_path_from(&raw) {
        match config::load(&path) {
            Ok(extra) => config::splice_defaults(&mut raw, extra),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse_from(raw);

    if let Ok(threads) = std::env::var("COHOM1_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_rat(s: &str, what: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| format!("{what}: {e}"))
}

fn model_from_args(args: &ModelArgs) -> Result<ModelSpec, String> {
    let id: ModelId = args
        .model
        .as_deref()
        .ok_or("`--model` is required")?
        .parse()
        .map_err(|e| format!("{e}"))?;
    let mut env = ParamEnv::new();
    for (name, value) in [("p", &args.p), ("q", &args.q), ("n", &args.n)] {
        if let Some(v) = value {
            env.insert(name, parse_rat(v, name)?);
        }
    }
    get_model(id, &env).map_err(|e| e.to_string())
}

fn bindings_env(spec: &ModelSpec, b: &BindingArgs) -> Result<ParamEnv, String> {
    let mut env = spec.base_env();
    env.insert("lambda", parse_rat(b.lambda.as_deref().unwrap_or("1"), "lambda")?);
    for (name, value) in [
        ("zeta0_sq", &b.zeta0_sq),
        ("zeta1_sq", &b.zeta1_sq),
        ("xi1_sq", &b.xi1_sq),
    ] {
        let v = parse_rat(value.as_deref().unwrap_or("1"), name)?;
        if !v.is_positive() {
            return Err(format!("{name} must be positive, got {v}"));
        }
        env.insert(name, v);
    }
    Ok(env)
}

fn free_params(spec: &ModelSpec, endpoint: usize, env: &ParamEnv, b: &BindingArgs) -> Result<Vec<Rational>, String> {
    let dim = formal::compute_lm(spec.ivp(endpoint), env, 0)
        .map_err(|e| e.to_string())?
        .kernel_basis()
        .len();
    let names = spec.kernel_param_names(endpoint);
    let mut values = vec![Rational::zero(); dim];
    for entry in &b.free {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| format!("`--free {entry}`: expected NAME=RAT"))?;
        let idx = names
            .iter()
            .position(|n| *n == name.trim())
            .filter(|&i| i < dim)
            .ok_or_else(|| format!("unknown free parameter `{name}` (family has {dim} parameter(s): {names:?})"))?;
        values[idx] = parse_rat(value, name)?;
    }
    Ok(values)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let deterministic = cli.deterministic;
    match cli.command {
        Command::Model { model, out } => {
            let spec = model_from_args(&model)?;
            let doc = output::model_report(&spec, deterministic);
            output::emit_json(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Einstein { sub } => match sub {
            EinsteinCmd::Check { model, trials, seed, out } => {
                let spec = model_from_args(&model)?;
                let diff = einstein::equivalence_check(&spec, trials, seed).map_err(|e| e.to_string())?;
                let pass = diff.is_zero();
                let doc = output::einstein_report(&spec, trials, &diff, pass, deterministic);
                output::emit_json(&doc, out.as_deref())?;
                Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
            }
        },
        Command::Series {
            model,
            bindings,
            endpoint,
            order,
            out,
        } => {
            if endpoint > 1 {
                return Err("endpoint must be 0 or 1".into());
            }
            let spec = model_from_args(&model)?;
            let env = bindings_env(&spec, &bindings)?;
            let free = free_params(&spec, endpoint, &env, &bindings)?;
            let ivp = spec.ivp(endpoint);
            let sol = formal::solve_formal(ivp, &env, order, &free).map_err(|e| e.to_string())?;
            let cert = formal::series_residual(ivp, &env, &sol).map_err(|e| e.to_string())?;
            let det_table = formal::verify_det_formula(ivp, &env, 20).ok();
            let doc = output::series_report(&spec, &env, &sol, &cert, det_table, deterministic);
            output::emit_json(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { model, out } => {
            let specs: Vec<ModelSpec> = if model.model.is_some() {
                vec![model_from_args(&model)?]
            } else {
                default_specs()?
            };
            let mut reports = Vec::new();
            let mut all_pass = true;
            for spec in &specs {
                let report = verify::verify_model(spec, 7);
                for check in &report.checks {
                    println!(
                        "model {} {:<34} [{}] {}",
                        spec.id,
                        check.name,
                        if check.pass { "PASS" } else { "FAIL" },
                        check.details
                    );
                }
                all_pass &= report.pass;
                reports.push(report);
            }
            let doc = output::verify_report(&reports, deterministic);
            output::emit_json_quiet(&doc, out.as_deref())?;
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Shoot {
            model,
            bindings,
            endpoint,
            t_end,
            numerics,
            csv,
            out,
        } => {
            if endpoint > 1 {
                return Err("endpoint must be 0 or 1".into());
            }
            let spec = model_from_args(&model)?;
            let env = bindings_env(&spec, &bindings)?;
            let free = free_params(&spec, endpoint, &env, &bindings)?;
            let cfg = numerics.to_config();
            let traj = shooting::shoot(&spec, endpoint, &env, &free, t_end, &cfg).map_err(|e| e.to_string())?;
            let target = &spec.boundary_ivp[1 - endpoint];
            let defect = shooting::boundary_defect(&traj.end_f, &traj.end_fp, target);
            if let Some(path) = &csv {
                output::write_trajectory_csv(&spec, &traj, path)?;
            }
            let doc = output::shoot_report(&spec, &traj, &defect, &cfg, deterministic);
            output::emit_json(&doc, out.as_deref())?;
            Ok(match traj.termination {
                Termination::StepUnderflow => ExitCode::from(2),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::Scan {
            model,
            endpoint,
            zeta_grid,
            lambda_grid,
            t_grid,
            numerics,
            out,
        } => {
            if endpoint > 1 {
                return Err("endpoint must be 0 or 1".into());
            }
            let spec = model_from_args(&model)?;
            let zetas = parse_rat_list(&zeta_grid)?;
            let lambdas = parse_rat_list(&lambda_grid)?;
            let ts = parse_f64_list(&t_grid)?;
            let cfg = numerics.to_config();
            let rows = shooting::scan(&spec, endpoint, &zetas, &lambdas, &ts, &cfg);
            let failed = rows.iter().any(|r| r.termination == Termination::StepUnderflow);
            let doc = output::scan_report(&spec, endpoint, &rows, &cfg, deterministic);
            output::emit_json(&doc, out.as_deref())?;
            Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Match {
            model,
            zeta0_sq,
            s0,
            zeta1_sq,
            s1,
            lambda,
            t_total,
            minimize,
            allow_nonpositive_lambda,
            f2pp0,
            numerics,
            out,
        } => {
            let mut margs = model;
            if margs.model.is_none() {
                margs.model = Some("A".into());
            }
            let spec = model_from_args(&margs)?;
            if spec.id != ModelId::A {
                return Err("two-sided matching is specific to model A".into());
            }
            let lambda_v = parse_rat(&lambda, "lambda")?.to_f64();
            if lambda_v <= 0.0 && !allow_nonpositive_lambda {
                return Err("lambda <= 0 requires --allow-nonpositive-lambda".into());
            }
            let inputs = MatchInputs {
                zeta0_sq: parse_rat(&zeta0_sq, "zeta0_sq")?.to_f64(),
                s0: parse_rat(&s0, "s0")?.to_f64(),
                zeta1_sq: parse_rat(&zeta1_sq, "zeta1_sq")?.to_f64(),
                s1: parse_rat(&s1, "s1")?.to_f64(),
                lambda: lambda_v,
                t_total,
            };
            let cfg = numerics.to_config();
            let report = shooting::match_two_sided_a(&spec, &inputs, &cfg, f2pp0).map_err(|e| e.to_string())?;
            let minimized = if minimize {
                let opts = shooting::SimplexOptions::default();
                Some(shooting::match_minimize_a(&spec, &inputs, &cfg, &opts))
            } else {
                None
            };
            let doc = output::match_report(&spec, &report, minimized, deterministic);
            output::emit_json(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce { only, out } => {
            let results = verify::run_criteria(only.as_deref());
            if results.is_empty() {
                return Err(format!("`--only {}` matched no criteria", only.unwrap_or_default()));
            }
            let mut all_pass = true;
            for r in &results {
                println!(
                    "criterion {}: {:<28} [{}] {}",
                    r.index,
                    r.name,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.details
                );
                all_pass &= r.pass;
            }
            let dir = out.unwrap_or_else(|| PathBuf::from("cohom1-report"));
            output::write_reproduce_bundle(&dir, &results, deterministic)?;
            println!("bundle written to {}", dir.display());
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn default_specs() -> Result<Vec<ModelSpec>, String> {
    let a = |p: i64, q: i64| {
        let env = ParamEnv::new()
            .set("p", Rational::from_int(p))
            .set("q", Rational::from_int(q));
        get_model(ModelId::A, &env)
    };
    let n = |id: ModelId, n: i64| get_model(id, &ParamEnv::new().set("n", Rational::from_int(n)));
    Ok(vec![
        a(2, 1).map_err(|e| e.to_string())?,
        n(ModelId::B, 2).map_err(|e| e.to_string())?,
        n(ModelId::C, 3).map_err(|e| e.to_string())?,
        get_model(ModelId::D, &ParamEnv::new()).map_err(|e| e.to_string())?,
        get_model(ModelId::E, &ParamEnv::new()).map_err(|e| e.to_string())?,
    ])
}

fn parse_rat_list(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',')
        .map(|part| parse_rat(part.trim(), "grid entry"))
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| part.trim().parse::<f64>().map_err(|e| format!("grid entry `{part}`: {e}")))
        .collect()
}
