use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance_field, fmt17, inradius, lr_norm, GridDomain, ScalarField, Shape};
use crate::plap::{minimize_extremal, sup_norm_extremal, ExtremalResult, Seed, SolveStatus, SolverOptions};

use super::{predicted_limit, AsymptoticsError, QProfile, Regime};

/// Slack for "nonincreasing" comparisons between consecutive rungs.
const TREND_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    /// Options for the per-rung `Lambda_p` solve; `None` skips it and leaves the
    /// lower sandwich bound undefined.
    pub lambda_p: Option<SolverOptions>,
    /// Start each rung from the previous rung's extremal.
    pub warm_start: bool,
    /// Largest admissible final `|lambda^{1/p} - limit|`.
    pub limit_tol: f64,
    /// Discretization slack of the sandwich bounds.
    pub slack: f64,
    /// Largest admissible final `| ||u||_inf - 1 |`.
    pub sup_tol: f64,
    /// Largest admissible final gap to the limit profile `d / ||d||_r`.
    pub shape_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solver: SolverOptions::default(),
            lambda_p: Some(SolverOptions { grad_tol: 1e-5, ..Default::default() }),
            warm_start: true,
            limit_tol: 0.15,
            slack: 0.05,
            sup_tol: 0.1,
            shape_tol: 0.1,
        }
    }
}

/// One rung of a sweep. Tolerances are repeated on every row so that verdicts
/// can be recomputed from the table alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub regime: String,
    pub log_lambda: f64,
    /// `exp(ln lambda / p)`.
    pub lambda_root: f64,
    /// `lambda.powf(1/p)`; infinite or zero when `lambda` itself is not representable.
    pub lambda_root_direct: f64,
    pub sup_norm: f64,
    /// Predicted limit of `sup_norm`.
    pub sup_target: f64,
    pub predicted_limit: f64,
    pub limit_error: f64,
    /// `Lambda_p`, NaN when not computed.
    pub lambda_p: f64,
    pub measure: f64,
    pub sandwich_lo: f64,
    pub sandwich_hi: f64,
    /// `||u - d/||d||_inf||_inf`.
    pub gap_tent: f64,
    /// `||u - d/||d||_r||_inf` with `r` the regime's limit exponent.
    pub gap_r: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub residual: f64,
    pub clip_events: usize,
    pub status: String,
    pub start: String,
    pub limit_tol: f64,
    pub slack: f64,
    pub sup_tol: f64,
    pub shape_tol: f64,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let f = |v: f64| fmt17(v);
        vec![
            f(self.p),
            f(self.q),
            self.regime.clone(),
            f(self.log_lambda),
            f(self.lambda_root),
            f(self.lambda_root_direct),
            f(self.sup_norm),
            f(self.sup_target),
            f(self.predicted_limit),
            f(self.limit_error),
            f(self.lambda_p),
            f(self.measure),
            f(self.sandwich_lo),
            f(self.sandwich_hi),
            f(self.gap_tent),
            f(self.gap_r),
            self.iterations.to_string(),
            f(self.grad_norm),
            f(self.residual),
            self.clip_events.to_string(),
            self.status.clone(),
            self.start.clone(),
            f(self.limit_tol),
            f(self.slack),
            f(self.sup_tol),
            f(self.shape_tol),
        ]
    }

    /// Whether the row lies inside the slackened sandwich; an undefined lower bound
    /// is not checked.
    pub fn within_sandwich(&self) -> bool {
        let lo_ok = self.sandwich_lo.is_nan() || self.lambda_root >= self.sandwich_lo - self.slack;
        lo_ok && self.lambda_root <= self.sandwich_hi + self.slack
    }
}

const HEADER: [&str; 26] = [
    "p",
    "q",
    "regime",
    "log_lambda",
    "lambda_root",
    "lambda_root_direct",
    "sup_norm",
    "sup_target",
    "predicted_limit",
    "limit_error",
    "lambda_p",
    "measure",
    "sandwich_lo",
    "sandwich_hi",
    "gap_tent",
    "gap_r",
    "iterations",
    "grad_norm",
    "residual",
    "clip_events",
    "status",
    "start",
    "limit_tol",
    "slack",
    "sup_tol",
    "shape_tol",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Too few rungs to judge a trend.
    Indeterminate,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn nonincreasing_tail(xs: &[f64]) -> Option<bool> {
    if xs.len() < 2 {
        return None;
    }
    let tail = &xs[xs.len().saturating_sub(3)..];
    Some(tail.windows(2).all(|w| w[1] <= w[0] + TREND_EPS))
}

fn regime_of(rows: &[SweepRow]) -> Result<&str, AsymptoticsError> {
    rows.first().map(|r| r.regime.as_str()).ok_or(AsymptoticsError::EmptyReport)
}

fn static_name(name: &str) -> &'static str {
    match name {
        "finite_limit" => "finite_limit",
        "zero_ratio" => "zero_ratio",
        "proportional" => "proportional",
        "hyperdiffusive" => "hyperdiffusive",
        _ => "unknown",
    }
}

/// PASS when `|lambda^{1/p} - limit|` is nonincreasing over the last three rungs
/// and the final error is at most `limit_tol`.
pub fn limit_verdict(rows: &[SweepRow]) -> Verdict {
    let errs: Vec<f64> = rows.iter().map(|r| r.limit_error).collect();
    match nonincreasing_tail(&errs) {
        None => Verdict::Indeterminate,
        Some(trend) => {
            let last = rows.last().expect("nonempty");
            Verdict::from_bool(trend && last.limit_error <= last.limit_tol)
        }
    }
}

/// PASS when every row satisfies the slackened sandwich bounds.
pub fn sandwich_verdict(rows: &[SweepRow]) -> Verdict {
    if rows.is_empty() {
        Verdict::Indeterminate
    } else {
        Verdict::from_bool(rows.iter().all(SweepRow::within_sandwich))
    }
}

/// PASS when `| ||u||_inf - 1 |` is nonincreasing over the last three rungs and the
/// final value is at most `sup_tol`. Requires `q(p) -> infinity`.
pub fn sup_norm_verdict(rows: &[SweepRow]) -> Result<Verdict, AsymptoticsError> {
    let regime = regime_of(rows)?;
    if regime == "finite_limit" {
        return Err(AsymptoticsError::WrongRegime { expected: "q -> infinity", found: "finite_limit" });
    }
    let errs: Vec<f64> = rows.iter().map(|r| (r.sup_norm - 1.0).abs()).collect();
    Ok(match nonincreasing_tail(&errs) {
        None => Verdict::Indeterminate,
        Some(trend) => Verdict::from_bool(trend && errs[errs.len() - 1] <= rows[rows.len() - 1].sup_tol),
    })
}

/// PASS when the gap to `d/||d||_inf` is nonincreasing over the last three rungs.
/// Requires `q(p) -> infinity` with `q/p -> 0`.
pub fn q0_verdict(rows: &[SweepRow]) -> Result<Verdict, AsymptoticsError> {
    let regime = regime_of(rows)?;
    if regime != "zero_ratio" {
        return Err(AsymptoticsError::WrongRegime { expected: "zero_ratio", found: static_name(regime) });
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap_tent).collect();
    Ok(nonincreasing_tail(&gaps).map_or(Verdict::Indeterminate, Verdict::from_bool))
}

/// PASS when the final extremal is within `shape_tol` of `d/||d||_r`.
/// Requires a finite limit `r`.
pub fn shape_verdict(rows: &[SweepRow]) -> Result<Verdict, AsymptoticsError> {
    let regime = regime_of(rows)?;
    if regime != "finite_limit" {
        return Err(AsymptoticsError::WrongRegime { expected: "finite_limit", found: static_name(regime) });
    }
    let last = rows.last().expect("nonempty");
    Ok(Verdict::from_bool(last.gap_r <= last.shape_tol))
}

/// `sup_norm_verdict` applied to a report.
pub fn sup_norm_trend(report: &SweepReport) -> Result<Verdict, AsymptoticsError> {
    sup_norm_verdict(&report.rows)
}

/// `q0_verdict` applied to a report.
pub fn q0_limit_check(report: &SweepReport) -> Result<Verdict, AsymptoticsError> {
    q0_verdict(&report.rows)
}

/// Verdicts and headline numbers of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub regime: String,
    pub rungs: usize,
    pub final_p: f64,
    pub final_lambda_root: f64,
    pub final_limit_error: f64,
    pub final_sup_norm: f64,
    pub limit: Verdict,
    pub sandwich: Verdict,
    /// `None` where the check does not apply to the regime.
    pub sup_norm: Option<Verdict>,
    pub q0: Option<Verdict>,
    pub shape: Option<Verdict>,
}

impl SweepSummary {
    pub fn from_rows(rows: &[SweepRow]) -> Result<Self, AsymptoticsError> {
        let last = rows.last().ok_or(AsymptoticsError::EmptyReport)?;
        Ok(SweepSummary {
            regime: last.regime.clone(),
            rungs: rows.len(),
            final_p: last.p,
            final_lambda_root: last.lambda_root,
            final_limit_error: last.limit_error,
            final_sup_norm: last.sup_norm,
            limit: limit_verdict(rows),
            sandwich: sandwich_verdict(rows),
            sup_norm: sup_norm_verdict(rows).ok(),
            q0: q0_verdict(rows).ok(),
            shape: shape_verdict(rows).ok(),
        })
    }

    /// Whether any applicable verdict failed.
    pub fn any_fail(&self) -> bool {
        [Some(self.limit), Some(self.sandwich), self.sup_norm, self.q0, self.shape].contains(&Some(Verdict::Fail))
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub shape: Shape,
    pub h: f64,
    pub profile: QProfile,
    pub regime: Regime,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn summary(&self) -> Result<SweepSummary, AsymptoticsError> {
        SweepSummary::from_rows(&self.rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AsymptoticsError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| AsymptoticsError::BadReport(e.to_string());
        w.write_record(HEADER).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.record()).map_err(io)?;
        }
        w.flush().map_err(|e| AsymptoticsError::BadReport(e.to_string()))
    }

    /// Parses rows written by [`SweepReport::write_csv`].
    pub fn read_rows<R: Read>(input: R) -> Result<Vec<SweepRow>, AsymptoticsError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| AsymptoticsError::BadReport(e.to_string()))?;
        if header.iter().ne(HEADER.iter().copied()) {
            return Err(AsymptoticsError::BadReport("unexpected header".into()));
        }
        r.deserialize()
            .map(|row| row.map_err(|e: csv::Error| AsymptoticsError::BadReport(e.to_string())))
            .collect()
    }

    /// Two-column `p value` data for `lambda^{1/p}` and the limit error.
    pub fn plot_data(&self) -> [(&'static str, String); 2] {
        let col = |title: &str, f: &dyn Fn(&SweepRow) -> f64| {
            let mut s = format!("# p {title}\n");
            for r in &self.rows {
                s.push_str(&format!("{} {}\n", fmt17(r.p), fmt17(f(r))));
            }
            s
        };
        [
            ("lambda_vs_p.dat", col("lambda_root", &|r| r.lambda_root)),
            ("gap_vs_p.dat", col("limit_error", &|r| r.limit_error)),
        ]
    }
}

/// A report together with the computed extremals, one per rung.
#[derive(Clone, Debug)]
pub struct SweepRun {
    pub report: SweepReport,
    pub extremals: Vec<ExtremalResult>,
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::NoConvergence => "no_convergence",
        SolveStatus::NonPositive => "non_positive",
    }
}

/// Solves one extremal per rung of `ladder` with `q = profile.q(p)`.
///
/// Rungs run in order; a flagged rung (no convergence, lost positivity) is kept in
/// the table with its status and the sweep continues.
pub fn run_sweep(
    domain: &Arc<GridDomain>,
    ladder: &[f64],
    profile: &QProfile,
    opts: &SweepOptions,
) -> Result<SweepRun, AsymptoticsError> {
    if ladder.is_empty() {
        return Err(AsymptoticsError::BadLadder("empty".into()));
    }
    if ladder.iter().any(|&p| !(p.is_finite() && p > 2.0)) {
        return Err(AsymptoticsError::BadLadder("every p must be finite and exceed 2".into()));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AsymptoticsError::BadLadder("p must increase along the ladder".into()));
    }
    profile.validate(ladder)?;
    let regime = profile.regime();
    let dist = distance_field(domain);
    let limit = predicted_limit(profile, &dist)?;
    let r = regime.profile_exponent();
    let d_r = lr_norm(&dist, r)?;
    let tent = dist.scaled(1.0 / inradius(&dist));
    let profile_field = dist.scaled(1.0 / d_r);
    let sup_target = inradius(&dist) / d_r;
    let measure = domain.measure();

    let mut rows = Vec::with_capacity(ladder.len());
    let mut extremals: Vec<ExtremalResult> = Vec::with_capacity(ladder.len());
    let mut sup_seed: Option<ScalarField> = None;
    for &p in ladder {
        let q = profile.q(p);
        let mut sopts = opts.solver.clone();
        if opts.warm_start {
            if let Some(prev) = extremals.last() {
                sopts.seed = Seed::Warm(prev.u.clone());
            }
        }
        let res = minimize_extremal(domain, p, q, &sopts)?;

        let lambda_p = match &opts.lambda_p {
            Some(lo) => {
                let mut lo = lo.clone();
                if let (true, Some(s)) = (opts.warm_start, &sup_seed) {
                    lo.seed = Seed::Warm(s.clone());
                }
                let s = sup_norm_extremal(domain, p, &lo)?;
                sup_seed = Some(s.u.clone());
                s.lambda_p
            }
            None => f64::NAN,
        };

        let interior_gap = |f: &ScalarField| {
            domain.interior().iter().map(|&id| (res.u.get(id) - f.get(id)).abs()).fold(0.0, f64::max)
        };
        rows.push(SweepRow {
            p,
            q,
            regime: regime.name().to_string(),
            log_lambda: res.log_lambda,
            lambda_root: res.lambda_root,
            lambda_root_direct: res.lambda.powf(1.0 / p),
            sup_norm: res.u.sup_norm(),
            sup_target: if r.is_infinite() { 1.0 } else { sup_target },
            predicted_limit: limit,
            limit_error: (res.lambda_root - limit).abs(),
            lambda_p,
            measure,
            sandwich_lo: lambda_p * measure.powf(-1.0 / q),
            sandwich_hi: measure.powf(1.0 / p) / lr_norm(&dist, q)?,
            gap_tent: interior_gap(&tent),
            gap_r: interior_gap(&profile_field),
            iterations: res.iterations,
            grad_norm: res.grad_norm,
            residual: res.residual,
            clip_events: res.clip_events,
            status: status_name(res.status).to_string(),
            start: res.start.to_string(),
            limit_tol: opts.limit_tol,
            slack: opts.slack,
            sup_tol: opts.sup_tol,
            shape_tol: opts.shape_tol,
        });
        extremals.push(res);
    }
    Ok(SweepRun {
        report: SweepReport { shape: domain.shape().clone(), h: domain.h(), profile: profile.clone(), regime, rows },
        extremals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid_domain;

    fn row(p: f64, err: f64, sup: f64, regime: &str) -> SweepRow {
        SweepRow {
            p,
            q: p * p,
            regime: regime.into(),
            log_lambda: 0.0,
            lambda_root: 1.0 + err,
            lambda_root_direct: 1.0 + err,
            sup_norm: sup,
            sup_target: 1.0,
            predicted_limit: 1.0,
            limit_error: err,
            lambda_p: f64::NAN,
            measure: 1.0,
            sandwich_lo: f64::NAN,
            sandwich_hi: 2.0,
            gap_tent: err,
            gap_r: err,
            iterations: 1,
            grad_norm: 0.0,
            residual: 0.0,
            clip_events: 0,
            status: "converged".into(),
            start: "distance".into(),
            limit_tol: 0.15,
            slack: 0.05,
            sup_tol: 0.1,
            shape_tol: 0.1,
        }
    }

    #[test]
    fn verdicts_from_rows() {
        let rows = vec![row(4.0, 0.5, 1.5, "hyperdiffusive"), row(8.0, 0.2, 1.2, "hyperdiffusive"), row(16.0, 0.1, 1.05, "hyperdiffusive")];
        assert_eq!(limit_verdict(&rows), Verdict::Pass);
        assert_eq!(sup_norm_verdict(&rows).unwrap(), Verdict::Pass);
        assert_eq!(limit_verdict(&rows[..1]), Verdict::Indeterminate);
        assert_eq!(sup_norm_verdict(&rows[..1]).unwrap(), Verdict::Indeterminate);
        assert!(matches!(q0_verdict(&rows), Err(AsymptoticsError::WrongRegime { .. })));
        let mut bad = rows.clone();
        bad[2].limit_error = 0.3;
        assert_eq!(limit_verdict(&bad), Verdict::Fail);
        let finite = vec![row(4.0, 0.5, 3.0, "finite_limit")];
        assert!(matches!(sup_norm_verdict(&finite), Err(AsymptoticsError::WrongRegime { .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, 1.0 / 8.0).unwrap();
        let opts = SweepOptions { lambda_p: None, ..Default::default() };
        let run = run_sweep(&d, &[3.0, 4.0], &QProfile::ConstantR { r: 2.0 }, &opts).unwrap();
        let mut buf = Vec::new();
        run.report.write_csv(&mut buf).unwrap();
        let rows = SweepReport::read_rows(&buf[..]).unwrap();
        assert_eq!(rows.len(), 2);
        for (a, b) in rows.iter().zip(&run.report.rows) {
            assert_eq!(a.lambda_root.to_bits(), b.lambda_root.to_bits());
            assert_eq!(a.limit_error.to_bits(), b.limit_error.to_bits());
            assert!(a.lambda_p.is_nan());
        }
        assert_eq!(SweepSummary::from_rows(&rows).unwrap(), run.report.summary().unwrap());
    }

    #[test]
    fn ladder_is_validated() {
        let d = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, 0.25).unwrap();
        let p = QProfile::ConstantR { r: 1.0 };
        let o = SweepOptions::default();
        assert!(matches!(run_sweep(&d, &[8.0, 4.0], &p, &o), Err(AsymptoticsError::BadLadder(_))));
        assert!(matches!(run_sweep(&d, &[2.0], &p, &o), Err(AsymptoticsError::BadLadder(_))));
    }
}
