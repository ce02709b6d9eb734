use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{MuProfile, QProfile};
use crate::geometry::{Point, Shape, DEFAULT_RIDGE_ANGLE};
use crate::inflap::SweepMode;
use crate::plap::{Direction, SolverOptions};

use super::CliError;

/// Pipeline selected by a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Dist,
    Ridge,
    Solve,
    Inflap,
    Sweep,
    Report,
}

impl Command {
    pub const ALL: [&'static str; 6] = ["dist", "ridge", "solve", "inflap", "sweep", "report"];

    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "dist" => Command::Dist,
            "ridge" => Command::Ridge,
            "solve" => Command::Solve,
            "inflap" => Command::Inflap,
            "sweep" => Command::Sweep,
            "report" => Command::Report,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: Shape,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSpec {
    pub p: f64,
    pub q: f64,
    /// Also compute `Lambda_p` and the sandwich bounds.
    pub sup_norm: bool,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec { p: 4.0, q: 2.0, sup_norm: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub initial_step: Option<f64>,
    pub backtrack: f64,
    pub armijo: f64,
    /// `"lbfgs"` or `"steepest"`.
    pub direction: String,
    pub memory: usize,
    pub multistart: usize,
    pub rng_seed: u64,
    pub pin_search: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverSpec {
            max_iters: o.max_iters,
            grad_tol: o.grad_tol,
            initial_step: o.initial_step,
            backtrack: o.backtrack,
            armijo: o.armijo,
            direction: "lbfgs".into(),
            memory: 10,
            multistart: o.multistart,
            rng_seed: o.rng_seed,
            pin_search: o.pin_search,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            initial_step: self.initial_step,
            backtrack: self.backtrack,
            armijo: self.armijo,
            direction: if self.direction == "steepest" {
                Direction::Steepest
            } else {
                Direction::Lbfgs { memory: self.memory }
            },
            multistart: self.multistart,
            rng_seed: self.rng_seed,
            pin_search: self.pin_search,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RidgeSpec {
    pub angle_tol: f64,
}

impl Default for RidgeSpec {
    fn default() -> Self {
        RidgeSpec { angle_tol: DEFAULT_RIDGE_ANGLE }
    }
}

/// Where the obstacle of an inflap run sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    /// `max_set(d, h)`.
    MaxSet,
    /// The node nearest to `point`.
    Point,
    /// No obstacle: constant boundary data only.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflapSpec {
    pub obstacle: ObstacleKind,
    pub point: Point,
    pub m_val: f64,
    pub boundary_value: f64,
    /// Stencil radius in units of `h`.
    pub eps_factor: f64,
    pub tol: Option<f64>,
    pub max_sweeps: usize,
    pub mode: SweepMode,
}

impl Default for InflapSpec {
    fn default() -> Self {
        InflapSpec {
            obstacle: ObstacleKind::MaxSet,
            point: [0.0, 0.0],
            m_val: 1.0,
            boundary_value: 0.0,
            eps_factor: 3.0,
            tol: None,
            max_sweeps: 1_000_000,
            mode: SweepMode::GaussSeidel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub ladder: Vec<f64>,
    pub profile: QProfile,
    pub warm_start: bool,
    /// Compute `Lambda_p` per rung for the lower sandwich bound.
    pub lambda_p: bool,
    pub limit_tol: f64,
    pub slack: f64,
    pub sup_tol: f64,
    pub shape_tol: f64,
    /// Run the obstacle comparison after a hyperdiffusive sweep.
    pub compare: bool,
    pub tol_m: f64,
    pub cone_slack: f64,
    /// Rescale the final extremal with this `mu_p`.
    pub mu: Option<MuProfile>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            ladder: vec![4.0, 8.0, 16.0],
            profile: QProfile::Power { alpha: 2.0 },
            warm_start: true,
            lambda_p: true,
            limit_tol: 0.15,
            slack: 0.05,
            sup_tol: 0.1,
            shape_tol: 0.1,
            compare: true,
            tol_m: 0.02,
            cone_slack: 0.05,
            mu: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSpec {
    /// A `report.csv` written by an earlier sweep.
    pub input: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: String,
    output: Option<PathBuf>,
    domain: Option<DomainSpec>,
    #[serde(default)]
    solve: SolveSpec,
    #[serde(default)]
    solver: SolverSpec,
    #[serde(default)]
    ridge: RidgeSpec,
    #[serde(default)]
    inflap: InflapSpec,
    #[serde(default)]
    sweep: SweepSpec,
    #[serde(default)]
    report: ReportSpec,
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Output directory from the config; see [`super::resolve_output`].
    pub output: Option<PathBuf>,
    /// Absent only for `report`.
    pub domain: Option<DomainSpec>,
    pub solve: SolveSpec,
    pub solver: SolverSpec,
    pub ridge: RidgeSpec,
    pub inflap: InflapSpec,
    pub sweep: SweepSpec,
    pub report: ReportSpec,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a TOML experiment config.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let command = Command::parse(&raw.command).ok_or_else(|| CliError::Validation {
        key: "command".into(),
        message: format!("unknown command {:?}; expected one of {}", raw.command, Command::ALL.join(", ")),
    })?;
    let cfg = RunConfig {
        command,
        output: raw.output,
        domain: raw.domain,
        solve: raw.solve,
        solver: raw.solver,
        ridge: raw.ridge,
        inflap: raw.inflap,
        sweep: raw.sweep,
        report: raw.report,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { key: key.into(), message: message.into() }
}

impl RunConfig {
    /// Range checks for every parameter the selected command reads.
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.domain, self.command) {
            (None, Command::Report) => {}
            (None, _) => return Err(invalid("domain", "missing [domain] table")),
            (Some(d), _) => {
                if !(d.h.is_finite() && d.h > 0.0) {
                    return Err(invalid("domain.h", format!("grid spacing must be positive, got {}", d.h)));
                }
                d.shape.check().map_err(|m| invalid("domain.shape", m))?;
            }
        }
        let s = &self.solver;
        if s.max_iters < 1 {
            return Err(invalid("solver.max_iters", "must be at least 1"));
        }
        if !(s.grad_tol > 0.0) {
            return Err(invalid("solver.grad_tol", "must be positive"));
        }
        if !(s.backtrack > 0.0 && s.backtrack < 1.0) {
            return Err(invalid("solver.backtrack", "must lie in (0, 1)"));
        }
        if !(s.armijo > 0.0 && s.armijo < 1.0) {
            return Err(invalid("solver.armijo", "must lie in (0, 1)"));
        }
        if !matches!(s.direction.as_str(), "lbfgs" | "steepest") {
            return Err(invalid("solver.direction", "expected \"lbfgs\" or \"steepest\""));
        }
        if s.direction == "lbfgs" && s.memory == 0 {
            return Err(invalid("solver.memory", "must be at least 1"));
        }
        match self.command {
            Command::Solve => {
                if !(self.solve.p.is_finite() && self.solve.p >= 1.0) {
                    return Err(invalid("solve.p", "p >= 1 required"));
                }
                if !(self.solve.q.is_finite() && self.solve.q >= 1.0) {
                    return Err(invalid("solve.q", format!("q >= 1 required, got {}", self.solve.q)));
                }
            }
            Command::Ridge => {
                if !(self.ridge.angle_tol >= 0.0) {
                    return Err(invalid("ridge.angle_tol", "must be nonnegative"));
                }
            }
            Command::Inflap => {
                let f = &self.inflap;
                if !(f.eps_factor >= 1.0 && f.eps_factor.is_finite()) {
                    return Err(invalid("inflap.eps_factor", "stencil radius must be at least h"));
                }
                if f.max_sweeps < 1 {
                    return Err(invalid("inflap.max_sweeps", "must be at least 1"));
                }
                if !f.m_val.is_finite() || !f.boundary_value.is_finite() {
                    return Err(invalid("inflap.m_val", "data must be finite"));
                }
            }
            Command::Sweep => {
                let w = &self.sweep;
                if w.ladder.is_empty() {
                    return Err(invalid("sweep.ladder", "must not be empty"));
                }
                if w.ladder.iter().any(|&p| !(p.is_finite() && p > 2.0)) {
                    return Err(invalid("sweep.ladder", "every p must exceed 2"));
                }
                if w.ladder.windows(2).any(|x| x[1] <= x[0]) {
                    return Err(invalid("sweep.ladder", "must be increasing"));
                }
                w.profile.validate(&w.ladder).map_err(|e| invalid("sweep.profile", e.to_string()))?;
                for (key, v) in [
                    ("sweep.limit_tol", w.limit_tol),
                    ("sweep.slack", w.slack),
                    ("sweep.sup_tol", w.sup_tol),
                    ("sweep.shape_tol", w.shape_tol),
                    ("sweep.tol_m", w.tol_m),
                    ("sweep.cone_slack", w.cone_slack),
                ] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(invalid(key, "must be nonnegative"));
                    }
                }
            }
            Command::Report => {
                if self.report.input.is_none() {
                    return Err(invalid("report.input", "path to a report.csv is required"));
                }
            }
            Command::Dist => {}
        }
        Ok(())
    }
}

/// Parses a `--profile` flag: `constant_r:R`, `proportional:Q`, `power:ALPHA` or
/// `custom:COEFF,EXPONENT`.
pub fn parse_profile(s: &str) -> Result<QProfile, CliError> {
    let bad = || invalid("--profile", format!("cannot parse {s:?}"));
    let (kind, args) = s.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args.split(',').map(|a| a.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    Ok(match (kind, nums.as_slice()) {
        ("constant_r", [r]) => QProfile::ConstantR { r: *r },
        ("proportional", [ratio]) => QProfile::Proportional { ratio: *ratio },
        ("power", [alpha]) => QProfile::Power { alpha: *alpha },
        ("custom", [coeff, exponent]) => QProfile::Custom { coeff: *coeff, exponent: *exponent },
        _ => return Err(bad()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
command = "solve"
[domain]
h = 0.0625
shape = { kind = "disk", radius = 1.0 }
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.solve, SolveSpec::default());
        assert_eq!(c.solver, SolverSpec::default());
    }

    #[test]
    fn q_below_one_names_the_key() {
        let text = format!("{MINIMAL}[solve]\np = 4.0\nq = 0.5\n");
        match parse_config(&text) {
            Err(CliError::Validation { key, message }) => {
                assert_eq!(key, "solve.q");
                assert!(message.contains("q >= 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_command_is_rejected() {
        let text = MINIMAL.replace("\"solve\"", "\"bake\"");
        assert!(matches!(parse_config(&text), Err(CliError::Validation { key, .. }) if key == "command"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let text = format!("{MINIMAL}[solve]\np = = 3\n");
        match parse_config(&text) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profiles_from_flags() {
        assert_eq!(parse_profile("power:2").unwrap(), QProfile::Power { alpha: 2.0 });
        assert_eq!(parse_profile("custom:1,0.5").unwrap(), QProfile::Custom { coeff: 1.0, exponent: 0.5 });
        assert!(parse_profile("power").is_err());
    }
}
