//! Config-driven pipelines writing CSV, JSON and plot-data artifacts.
//!
//! Every run ends with `manifest.json`, listing each artifact with its SHA-256.
//! No artifact contains timestamps, so identical configs give identical hashes.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::asymptotics::{
    finite_q_residual, hyperdiffusive_compare, run_sweep, scaling_check, AsymptoticsError, HyperdiffusiveOptions,
    Regime, SweepOptions, SweepReport, SweepSummary,
};
use crate::geometry::{
    build_grid_domain, distance_field, fmt17, inradius, lr_norm, max_set, ridge_set, GeometryError, GridDomain,
    PointSet, ScalarField, Shape,
};
use crate::inflap::{
    cone_solution, residual_field, solve_inf_laplace, InfLapError, InfLapOptions, ObstacleProblem,
};
use crate::plap::{minimize_extremal, sup_norm_extremal, SolveStatus, SolverError, SolverOptions};

pub use config::{
    parse_config, parse_profile, Command, DomainSpec, InflapSpec, ObstacleKind, ReportSpec, RidgeSpec, RunConfig,
    SolveSpec, SolverSpec, SweepSpec,
};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "SOBOLEV_LAB_OUT";

/// Output root when neither flag, config nor environment names one.
pub const DEFAULT_OUTPUT: &str = "sobolev-lab-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    InfLap(#[from] InfLapError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Exit status: success with passing verdicts.
pub const EXIT_PASS: i32 = 0;
/// Exit status: a module error or a solver that did not converge.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status: the run completed but a verdict failed.
pub const EXIT_VERDICT_FAIL: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    /// Everything written except the manifest itself.
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

/// Output directory: the flag, else the config's `output`, else `$SOBOLEV_LAB_OUT`,
/// else [`DEFAULT_OUTPUT`].
pub fn resolve_output(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

struct Writer {
    dir: PathBuf,
    list: Vec<Artifact>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Writer { dir: dir.to_path_buf(), list: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.list.push(Artifact { file: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    fn field(&mut self, name: &str, f: &ScalarField) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f.write_csv(&mut buf).map_err(|e| CliError::io(&self.dir.join(name), e))?;
        self.put(name, &buf)
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
        s.push('\n');
        self.put(name, s.as_bytes())
    }

    fn finish(self) -> Result<Vec<Artifact>, CliError> {
        let path = self.dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&json!({ "artifacts": self.list })).expect("serializable");
        fs::write(&path, body + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(self.list)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn domain_of(cfg: &RunConfig) -> Result<Arc<GridDomain>, CliError> {
    let spec = cfg.domain.as_ref().ok_or_else(|| CliError::Validation {
        key: "domain".into(),
        message: "missing [domain] table".into(),
    })?;
    Ok(build_grid_domain(spec.shape.clone(), spec.h)?)
}

/// Runs the configured pipeline, writing artifacts into `out_dir`.
///
/// Errors are returned for problems that prevent a run (exit status 1); completed
/// runs report their status in [`Outcome::exit_code`].
pub fn execute(cfg: &RunConfig, out_dir: &Path, mut log: impl FnMut(&str)) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut w = Writer::new(out_dir)?;
    log(&format!("{:?} -> {}", cfg.command, out_dir.display()));
    let (exit_code, summary) = match cfg.command {
        Command::Dist => run_dist(cfg, &mut w)?,
        Command::Ridge => run_ridge(cfg, &mut w)?,
        Command::Solve => run_solve(cfg, &mut w, &mut log)?,
        Command::Inflap => run_inflap(cfg, &mut w)?,
        Command::Sweep => run_sweep_cmd(cfg, &mut w, &mut log)?,
        Command::Report => run_report(cfg)?,
    };
    w.json("summary.json", &summary)?;
    let artifacts = w.finish()?;
    Ok(Outcome { exit_code, out_dir: out_dir.to_path_buf(), artifacts, summary })
}

fn header(cfg: &RunConfig, domain: &GridDomain) -> Value {
    json!({
        "command": to_value(&cfg.command),
        "shape": to_value(domain.shape()),
        "h": domain.h(),
        "interior_nodes": domain.interior().len(),
        "measure": domain.measure(),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn run_dist(cfg: &RunConfig, w: &mut Writer) -> Result<(i32, Value), CliError> {
    let domain = domain_of(cfg)?;
    let d = distance_field(&domain);
    let m = max_set(&d, domain.h());
    w.field("distance.csv", &d)?;
    w.field("max_set.csv", &m.indicator())?;
    let summary = merge(
        header(cfg, &domain),
        json!({
            "inradius": inradius(&d),
            "l1_norm": lr_norm(&d, 1.0)?,
            "l2_norm": lr_norm(&d, 2.0)?,
            "max_set_size": m.len(),
        }),
    );
    Ok((EXIT_PASS, summary))
}

fn run_ridge(cfg: &RunConfig, w: &mut Writer) -> Result<(i32, Value), CliError> {
    let domain = domain_of(cfg)?;
    let d = distance_field(&domain);
    let m = max_set(&d, domain.h());
    let r = ridge_set(&domain, cfg.ridge.angle_tol);
    w.field("ridge.csv", &r.indicator())?;
    w.field("max_set.csv", &m.indicator())?;
    let contained = m.is_subset_of(&r);
    let summary = merge(
        header(cfg, &domain),
        json!({
            "angle_tol": cfg.ridge.angle_tol,
            "ridge_size": r.len(),
            "max_set_size": m.len(),
            "max_set_in_ridge": contained,
        }),
    );
    Ok((if contained { EXIT_PASS } else { EXIT_VERDICT_FAIL }, summary))
}

fn run_solve(cfg: &RunConfig, w: &mut Writer, log: &mut impl FnMut(&str)) -> Result<(i32, Value), CliError> {
    let domain = domain_of(cfg)?;
    let SolveSpec { p, q, sup_norm } = cfg.solve;
    let opts = cfg.solver.options();
    let res = minimize_extremal(&domain, p, q, &opts)?;
    log(&format!("p={p} q={q}: lambda^(1/p)={} after {} iterations", res.lambda_root, res.iterations));
    w.field("extremal.csv", &res.u)?;
    let mut hist = String::from("# iteration ln_quotient\n");
    for (k, v) in res.history.iter().enumerate() {
        hist.push_str(&format!("{k} {}\n", fmt17(*v)));
    }
    w.put("history.dat", hist.as_bytes())?;

    let mut exit = if res.status == SolveStatus::Converged { EXIT_PASS } else { EXIT_FAILURE };
    let mut summary = merge(header(cfg, &domain), json!({ "extremal": to_value(&res.report()) }));
    if sup_norm {
        let s = sup_norm_extremal(&domain, p, &SolverOptions { grad_tol: 1e-5, ..opts })?;
        let measure = domain.measure();
        let lo = s.lambda_p * measure.powf(-1.0 / q);
        let hi = measure.powf(1.0 / p) / lr_norm(&distance_field(&domain), q)?;
        let slack = cfg.sweep.slack;
        let inside = res.lambda_root >= lo - slack && res.lambda_root <= hi + slack;
        if !inside && exit == EXIT_PASS {
            exit = EXIT_VERDICT_FAIL;
        }
        w.field("sup_norm_extremal.csv", &s.u)?;
        summary = merge(
            summary,
            json!({
                "lambda_p": s.lambda_p,
                "lambda_p_status": to_value(&s.status),
                "sandwich_lo": lo,
                "sandwich_hi": hi,
                "slack": slack,
                "sandwich": if inside { "pass" } else { "fail" },
            }),
        );
    }
    Ok((exit, summary))
}

fn inflap_options(spec: &InflapSpec, h: f64) -> InfLapOptions {
    InfLapOptions {
        eps_radius: Some(spec.eps_factor * h),
        tol: spec.tol,
        max_sweeps: spec.max_sweeps,
        mode: spec.mode,
        ..Default::default()
    }
}

fn run_inflap(cfg: &RunConfig, w: &mut Writer) -> Result<(i32, Value), CliError> {
    let domain = domain_of(cfg)?;
    let spec = &cfg.inflap;
    let d = distance_field(&domain);
    let prob = match spec.obstacle {
        ObstacleKind::MaxSet => ObstacleProblem::new(&domain, max_set(&d, domain.h()), spec.m_val),
        ObstacleKind::Point => {
            ObstacleProblem::new(&domain, PointSet::new(&domain, vec![domain.nearest_node(spec.point)], 0.0), spec.m_val)
        }
        ObstacleKind::None => ObstacleProblem::dirichlet(ScalarField::from_fn(&domain, |_| spec.boundary_value)),
    };
    let sol = solve_inf_laplace(&prob, &inflap_options(spec, domain.h()))?;
    let exclude = prob.obstacle.union(&ridge_set(&domain, cfg.ridge.angle_tol));
    let (res_field, res) = residual_field(&sol.u, &exclude, 2.0 * domain.h());
    w.field("inflap.csv", &sol.u)?;
    w.field("residual.csv", &res_field)?;

    let gap = |f: &ScalarField| domain.interior().iter().map(|&id| (sol.u.get(id) - f.get(id)).abs()).fold(0.0, f64::max);
    let tent = d.scaled(1.0 / inradius(&d));
    let cone_gap = match domain.shape() {
        Shape::Disk { .. } => Some(gap(&cone_solution(&domain)?)),
        _ => None,
    };
    let exit = if !sol.converged {
        EXIT_FAILURE
    } else if sol.comparison_violations > 0 {
        EXIT_VERDICT_FAIL
    } else {
        EXIT_PASS
    };
    let summary = merge(
        header(cfg, &domain),
        json!({
            "obstacle_size": prob.obstacle.len(),
            "iterations": sol.iterations,
            "converged": sol.converged,
            "sup_update": sol.sup_update,
            "tol": sol.tol,
            "eps_radius": sol.eps_radius,
            "comparison_violations": sol.comparison_violations,
            "increases": sol.increases,
            "residual": to_value(&res),
            "gap_to_tent": gap(&tent),
            "gap_to_cone": cone_gap,
        }),
    );
    Ok((exit, summary))
}

fn summary_value(s: &SweepSummary) -> Value {
    to_value(s)
}

fn run_sweep_cmd(cfg: &RunConfig, w: &mut Writer, log: &mut impl FnMut(&str)) -> Result<(i32, Value), CliError> {
    let domain = domain_of(cfg)?;
    let spec = &cfg.sweep;
    let solver = cfg.solver.options();
    let opts = SweepOptions {
        lambda_p: spec.lambda_p.then(|| SolverOptions { grad_tol: 1e-5, ..solver.clone() }),
        solver,
        warm_start: spec.warm_start,
        limit_tol: spec.limit_tol,
        slack: spec.slack,
        sup_tol: spec.sup_tol,
        shape_tol: spec.shape_tol,
    };
    let run = run_sweep(&domain, &spec.ladder, &spec.profile, &opts)?;
    for r in &run.report.rows {
        log(&format!("p={} q={}: lambda^(1/p)={} ({})", r.p, r.q, r.lambda_root, r.status));
    }
    let mut csv = Vec::new();
    run.report.write_csv(&mut csv)?;
    w.put("report.csv", &csv)?;
    for (name, body) in run.report.plot_data() {
        w.put(name, body.as_bytes())?;
    }
    let last = run.extremals.last().expect("nonempty ladder");
    w.field("u_final.csv", &last.u)?;

    let sweep_summary = run.report.summary()?;
    let mut fail = sweep_summary.any_fail();
    let mut summary = merge(
        header(cfg, &domain),
        json!({
            "profile": to_value(&spec.profile),
            "ladder": spec.ladder,
            "verdicts": summary_value(&sweep_summary),
            "flagged_rungs": run.report.rows.iter().filter(|r| r.status != "converged").count(),
        }),
    );

    if run.report.regime == Regime::Hyperdiffusive && spec.compare {
        let hopts = HyperdiffusiveOptions {
            tol_m: spec.tol_m,
            cone_slack: spec.cone_slack,
            inflap: inflap_options(&cfg.inflap, domain.h()),
        };
        let value = match hyperdiffusive_compare(&domain, &run.report, &last.u, &hopts) {
            Ok(c) => {
                w.field("inflap_m.csv", &c.inflap.u)?;
                fail |= !(c.containment && c.cone_bound);
                json!({
                    "m_size": c.m.len(),
                    "containment": c.containment,
                    "sup_gap": c.sup_gap,
                    "cone_excess": c.cone_excess,
                    "cone_bound": c.cone_bound,
                    "inflap_sweeps": c.inflap.iterations,
                })
            }
            Err(AsymptoticsError::EmptyM { threshold }) => {
                fail = true;
                json!({ "error": "empty_m", "threshold": threshold })
            }
            Err(e) => return Err(e.into()),
        };
        summary = merge(summary, json!({ "compare": value }));
    }
    if let Regime::Proportional { ratio } = run.report.regime {
        let dist = distance_field(&domain);
        let diag = finite_q_residual(&last.u, ratio, 1.0 / inradius(&dist));
        w.field("min_eq_residual.csv", &diag.field)?;
        summary = merge(summary, json!({ "min_eq_residual": to_value(&diag) }));
    }
    if let Some(mu) = &spec.mu {
        let v = match scaling_check(last, mu, &run.report.regime) {
            Ok(s) => {
                w.field("v_final.csv", &s.v)?;
                json!({ "mu": to_value(mu), "factor": s.factor, "predicted": s.predicted, "ratio_err": s.ratio_err })
            }
            Err(e) => json!({ "mu": to_value(mu), "error": e.to_string() }),
        };
        summary = merge(summary, json!({ "scaling": v }));
    }
    Ok((if fail { EXIT_VERDICT_FAIL } else { EXIT_PASS }, summary))
}

fn run_report(cfg: &RunConfig) -> Result<(i32, Value), CliError> {
    let input = cfg.report.input.as_ref().expect("validated");
    let file = fs::File::open(input).map_err(|e| CliError::io(input, e))?;
    let rows = SweepReport::read_rows(file)?;
    let s = SweepSummary::from_rows(&rows)?;
    let summary = json!({
        "command": "report",
        "input": input.display().to_string(),
        "verdicts": summary_value(&s),
    });
    Ok((if s.any_fail() { EXIT_VERDICT_FAIL } else { EXIT_PASS }, summary))
}
