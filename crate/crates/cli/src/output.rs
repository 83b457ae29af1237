//! Report construction and serialization. JSON schema version 1; all maps
//! are emitted in fixed field order so `--deterministic` runs are
//! byte-identical.

use cohom1_core::algebra::Rational;
use cohom1_core::expr::ParamEnv;
use cohom1_core::formal::{DetRow, ResidualCertificate, SeriesSolution};
use cohom1_core::models::{ModelId, ModelSpec};
use cohom1_core::shooting::{DefectReport, MatchInputs, MatchReport, ScanRow, ShootConfig, Trajectory};
use cohom1_core::verify::{CriterionResult, VerifyReport};
use serde::Serialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unix_time: Option<u64>,
}

fn header(deterministic: bool) -> Header {
    Header {
        tool: "cohom1",
        schema: SCHEMA_VERSION,
        unix_time: if deterministic {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        },
    }
}

pub fn emit_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Writes only when a path is given (for subcommands with their own stdout).
pub fn emit_json_quiet<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => emit_json(doc, Some(path)),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Model inspection
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct ModelReport {
    pub header: Header,
    pub model: ModelId,
    pub parameters: Vec<(String, String)>,
    pub summands: usize,
    pub dimensions: Vec<i64>,
    pub killing_constants: Vec<Rational>,
    pub triple_brackets: Vec<BracketEntry>,
    pub boundary: Vec<BoundaryReport>,
    pub symmetry_swap: Option<Vec<usize>>,
    pub has_nondiagonal_constraint: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention_note: Option<String>,
}

#[derive(Serialize)]
pub struct BracketEntry {
    pub indices: [usize; 3],
    pub value: Rational,
}

#[derive(Serialize)]
pub struct BoundaryReport {
    pub endpoint: usize,
    pub sphere_dimension: i64,
    pub collapsing: Vec<CollapseEntry>,
    pub groups: Vec<GroupEntry>,
    /// Signed slopes in the unscaled convention.
    pub fp_values: Vec<f64>,
}

#[derive(Serialize)]
pub struct CollapseEntry {
    pub index: usize,
    pub c_sq: Rational,
}

#[derive(Serialize)]
pub struct GroupEntry {
    pub parameter: String,
    pub members: Vec<usize>,
}

pub fn model_report(spec: &ModelSpec, deterministic: bool) -> ModelReport {
    let boundary = (0..2)
        .map(|endpoint| {
            let bd = spec.boundary_conditions(endpoint);
            BoundaryReport {
                endpoint,
                sphere_dimension: bd.sphere_dim,
                collapsing: bd
                    .collapsing()
                    .into_iter()
                    .map(|i| CollapseEntry {
                        index: i + 1,
                        c_sq: bd.c_sq(i).unwrap().clone(),
                    })
                    .collect(),
                groups: bd
                    .groups
                    .iter()
                    .enumerate()
                    .map(|(g, name)| GroupEntry {
                        parameter: name.to_string(),
                        members: bd.group_members()[g].iter().map(|&i| i + 1).collect(),
                    })
                    .collect(),
                fp_values: bd.fp_values(),
            }
        })
        .collect();
    ModelReport {
        header: header(deterministic),
        model: spec.id,
        parameters: spec.int_params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        summands: spec.s,
        dimensions: spec.dims.clone(),
        killing_constants: spec.b.clone(),
        triple_brackets: spec
            .brackets
            .iter()
            .map(|(k, v)| BracketEntry {
                indices: *k,
                value: v.clone(),
            })
            .collect(),
        boundary,
        symmetry_swap: spec.symmetry_map().map(|p| p.iter().map(|&i| i + 1).collect()),
        has_nondiagonal_constraint: spec.nondiagonal_constraint.is_some(),
        warnings: spec.warnings.clone(),
        convention_note: (spec.id == ModelId::A).then(|| {
            "series and trajectories use the rescaled convention (f1 halved); \
             the unscaled f1 is twice the reported value"
                .to_string()
        }),
    }
}

// ---------------------------------------------------------------------------
// Einstein check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct EinsteinReport {
    pub header: Header,
    pub model: ModelId,
    pub trials: usize,
    pub max_difference: Rational,
    pub pass: bool,
}

pub fn einstein_report(spec: &ModelSpec, trials: usize, diff: &Rational, pass: bool, deterministic: bool) -> EinsteinReport {
    EinsteinReport {
        header: header(deterministic),
        model: spec.id,
        trials,
        max_difference: diff.clone(),
        pass,
    }
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SeriesReport {
    pub header: Header,
    pub model: ModelId,
    pub endpoint: usize,
    pub order: usize,
    pub parameters: Vec<(String, String)>,
    /// `x^m` in the factorial convention, one vector per order.
    pub x_coefficients: Vec<Vec<Rational>>,
    /// Plain Taylor coefficients, one array per component.
    pub x_series_per_component: Vec<Vec<Rational>>,
    pub kernel_basis: Vec<Vec<Rational>>,
    pub free_parameters: Vec<Rational>,
    pub d0: Vec<Rational>,
    pub x2_particular: Vec<Rational>,
    pub residual_first_nonzero: Option<i64>,
    pub residual_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_table: Option<Vec<DetTableEntry>>,
}

#[derive(Serialize)]
pub struct DetTableEntry {
    pub m: usize,
    pub det: Rational,
    pub formula: Rational,
    pub equal: bool,
}

pub fn series_report(
    spec: &ModelSpec,
    env: &ParamEnv,
    sol: &SeriesSolution,
    cert: &ResidualCertificate,
    det_table: Option<Vec<DetRow>>,
    deterministic: bool,
) -> SeriesReport {
    SeriesReport {
        header: header(deterministic),
        model: spec.id,
        endpoint: sol.endpoint,
        order: sol.order,
        parameters: env.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        x_coefficients: sol.x_coeffs.iter().map(|v| v.0.clone()).collect(),
        x_series_per_component: sol
            .x_series()
            .iter()
            .map(|s| s.coeffs().to_vec())
            .collect(),
        kernel_basis: sol.kernel_basis.iter().map(|v| v.0.clone()).collect(),
        free_parameters: sol.free_params.clone(),
        d0: sol.d0.0.clone(),
        x2_particular: sol.x2_particular.0.clone(),
        residual_first_nonzero: cert.first_nonzero,
        residual_pass: cert.passes(),
        det_table: det_table.map(|rows| {
            rows.into_iter()
                .map(|r| DetTableEntry {
                    m: r.m,
                    det: r.det,
                    formula: r.formula,
                    equal: r.equal,
                })
                .collect()
        }),
    }
}

// ---------------------------------------------------------------------------
// Verify / shoot / scan / match / reproduce
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct VerifyDoc {
    pub header: Header,
    pub reports: Vec<VerifyReport>,
    pub pass: bool,
}

pub fn verify_report(reports: &[VerifyReport], deterministic: bool) -> VerifyDoc {
    VerifyDoc {
        header: header(deterministic),
        pass: reports.iter().all(|r| r.pass),
        reports: reports.to_vec(),
    }
}

#[derive(Serialize)]
pub struct ShootDoc {
    pub header: Header,
    pub model: ModelId,
    pub endpoint: usize,
    pub config: ShootConfig,
    pub termination: cohom1_core::shooting::Termination,
    pub end_time: f64,
    pub end_f: Vec<f64>,
    pub end_fp: Vec<f64>,
    pub monitors: cohom1_core::shooting::MonitorStats,
    pub defect: DefectReport,
    pub samples: usize,
    pub steps: usize,
}

pub fn shoot_report(
    spec: &ModelSpec,
    traj: &Trajectory,
    defect: &DefectReport,
    cfg: &ShootConfig,
    deterministic: bool,
) -> ShootDoc {
    ShootDoc {
        header: header(deterministic),
        model: spec.id,
        endpoint: traj.endpoint,
        config: cfg.clone(),
        termination: traj.termination,
        end_time: traj.end_time,
        end_f: traj.end_f.clone(),
        end_fp: traj.end_fp.clone(),
        monitors: traj.monitors.clone(),
        defect: defect.clone(),
        samples: traj.samples.len(),
        steps: traj.steps,
    }
}

#[derive(Serialize)]
pub struct ScanDoc {
    pub header: Header,
    pub model: ModelId,
    pub endpoint: usize,
    pub config: ShootConfig,
    pub rows: Vec<ScanRow>,
}

pub fn scan_report(spec: &ModelSpec, endpoint: usize, rows: &[ScanRow], cfg: &ShootConfig, deterministic: bool) -> ScanDoc {
    ScanDoc {
        header: header(deterministic),
        model: spec.id,
        endpoint,
        config: cfg.clone(),
        rows: rows.to_vec(),
    }
}

#[derive(Serialize)]
pub struct MatchDoc {
    pub header: Header,
    pub model: ModelId,
    pub report: MatchReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimized: Option<MinimizedDoc>,
}

#[derive(Serialize)]
pub struct MinimizedDoc {
    pub inputs: MatchInputs,
    pub norm: f64,
    pub evaluations: usize,
}

pub fn match_report(
    spec: &ModelSpec,
    report: &MatchReport,
    minimized: Option<(MatchInputs, f64, usize)>,
    deterministic: bool,
) -> MatchDoc {
    MatchDoc {
        header: header(deterministic),
        model: spec.id,
        report: report.clone(),
        minimized: minimized.map(|(inputs, norm, evaluations)| MinimizedDoc {
            inputs,
            norm,
            evaluations,
        }),
    }
}

// ---------------------------------------------------------------------------
// CSV and bundles
// ---------------------------------------------------------------------------

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Trajectory CSV: `t, f_1.., f_1'.., trace, swap, constraint[, f1_unscaled]`.
/// Model A appends the unscaled `f_1` (twice the rescaled one).
pub fn write_trajectory_csv(spec: &ModelSpec, traj: &Trajectory, path: &Path) -> Result<(), String> {
    let mut out = String::new();
    let s = spec.s;
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend((1..=s).map(|i| format!("f{i}")));
    cols.extend((1..=s).map(|i| format!("fp{i}")));
    cols.extend(["trace_residual".into(), "swap_deviation".into(), "constraint_b".into()]);
    if spec.id == ModelId::A {
        cols.push("f1_unscaled".into());
    }
    out.push_str(&cols.join(","));
    out.push('\n');
    for sample in &traj.samples {
        let mut row: Vec<String> = vec![fmt_f64(sample.t)];
        row.extend(sample.f.iter().map(|&v| fmt_f64(v)));
        row.extend(sample.fp.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(sample.trace_residual));
        row.push(fmt_f64(sample.swap_deviation));
        row.push(fmt_f64(sample.constraint_b));
        if spec.id == ModelId::A {
            row.push(fmt_f64(2.0 * sample.f[0]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
pub struct ReproduceSummary {
    pub header: Header,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

/// Writes the reproduction bundle: `summary.json`, the determinant tables of
/// the five endpoint systems with closed determinant formulas, and the
/// nonexistence witness grid.
pub fn write_reproduce_bundle(dir: &Path, results: &[CriterionResult], deterministic: bool) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let summary = ReproduceSummary {
        header: header(deterministic),
        criteria: results.to_vec(),
        pass: results.iter().all(|r| r.pass),
    };
    emit_json(&summary, Some(&dir.join("summary.json")))?;

    if results.iter().any(|r| r.name.contains("determinant")) {
        write_det_tables(&dir.join("det_tables.csv"))?;
    }
    if results.iter().any(|r| r.name.contains("nonexistence")) {
        write_witness_grid(&dir.join("nonexistence_witness.csv"))?;
    }
    Ok(())
}

fn write_det_tables(path: &Path) -> Result<(), String> {
    use cohom1_core::models::get_model;
    let mut out = String::from("model,parameters,endpoint,m,det,formula\n");
    let cases: Vec<(ModelSpec, usize)> = vec![
        (
            get_model(ModelId::A, &ParamEnv::new().set("p", Rational::from_int(2)).set("q", Rational::from_int(1))).unwrap(),
            0,
        ),
        (get_model(ModelId::B, &ParamEnv::new().set("n", Rational::from_int(3))).unwrap(), 1),
        (get_model(ModelId::C, &ParamEnv::new().set("n", Rational::from_int(3))).unwrap(), 0),
        (get_model(ModelId::D, &ParamEnv::new()).unwrap(), 1),
        (get_model(ModelId::E, &ParamEnv::new()).unwrap(), 0),
    ];
    for (spec, endpoint) in cases {
        let mut env = spec.base_env();
        env.insert("lambda", Rational::from_int(1));
        for g in &spec.boundary_ivp[endpoint].groups {
            env.insert(g, Rational::from_int(1));
        }
        let rows = cohom1_core::formal::verify_det_formula(spec.ivp(endpoint), &env, 20).map_err(|e| e.to_string())?;
        let params: Vec<String> = spec.int_params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                spec.id,
                params.join(" "),
                endpoint,
                r.m,
                r.det,
                r.formula
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_witness_grid(path: &Path) -> Result<(), String> {
    use cohom1_core::models::get_model;
    use cohom1_core::shooting::scan;
    let cfg = ShootConfig {
        tol: 1e-10,
        ..ShootConfig::default()
    };
    let zeta_grid = [
        Rational::from_ratio(1, 4),
        Rational::from_int(1),
        Rational::from_int(4),
    ];
    let lambda_grid = [Rational::from_int(1), Rational::from_int(2), Rational::from_int(4)];
    let t_grid = [0.5, 0.8, 1.1, 1.4];
    let cases: Vec<(ModelSpec, usize)> = vec![
        (get_model(ModelId::B, &ParamEnv::new().set("n", Rational::from_int(2))).unwrap(), 1),
        (get_model(ModelId::C, &ParamEnv::new().set("n", Rational::from_int(3))).unwrap(), 0),
        (get_model(ModelId::D, &ParamEnv::new()).unwrap(), 1),
        (get_model(ModelId::E, &ParamEnv::new()).unwrap(), 0),
    ];
    let mut out = String::from("model,endpoint,zeta_sq,lambda,min_defect,best_t,max_swap_deviation,termination\n");
    for (spec, endpoint) in cases {
        for row in scan(&spec, endpoint, &zeta_grid, &lambda_grid, &t_grid, &cfg) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:?}\n",
                spec.id,
                endpoint,
                row.zeta_sq,
                row.lambda,
                fmt_f64(row.min_defect),
                fmt_f64(row.best_t),
                fmt_f64(row.monitors.max_swap_deviation),
                row.termination
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))
}
