use std::sync::Arc;

use serde::Serialize;

use crate::geometry::{distance_field, inradius, max_set, GridDomain, PointSet, ScalarField};
use crate::inflap::{min_eq_residual, solve_inf_laplace, InfLapOptions, InfLapSolution, ObstacleProblem};
use crate::plap::{least_energy_factor, ExtremalResult};

use super::{AsymptoticsError, MuProfile, Regime, SweepReport};

#[derive(Clone, Debug)]
pub struct HyperdiffusiveOptions {
    /// `M` collects the nodes where the extremal is at least `1 - tol_m`.
    pub tol_m: f64,
    /// Allowed excess of the extremal over `Lambda_inf d`.
    pub cone_slack: f64,
    pub inflap: InfLapOptions,
}

impl Default for HyperdiffusiveOptions {
    fn default() -> Self {
        HyperdiffusiveOptions { tol_m: 0.02, cone_slack: 0.05, inflap: InfLapOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct HyperdiffusiveComparison {
    pub m: PointSet,
    /// `M` lies in `max_set(d, h + tol_m * inradius)`.
    pub containment: bool,
    /// `||u_final - w||_inf` over interior nodes, `w` the obstacle solution with
    /// `w = 1` on `M`.
    pub sup_gap: f64,
    /// `max (u_final - Lambda_inf d)` over interior nodes.
    pub cone_excess: f64,
    pub cone_bound: bool,
    pub inflap: InfLapSolution,
}

/// Compares the largest-p extremal of a hyperdiffusive sweep with the
/// infinity-harmonic obstacle problem on its near-maximum set.
pub fn hyperdiffusive_compare(
    domain: &Arc<GridDomain>,
    report: &SweepReport,
    u_final: &ScalarField,
    opts: &HyperdiffusiveOptions,
) -> Result<HyperdiffusiveComparison, AsymptoticsError> {
    if report.regime != Regime::Hyperdiffusive {
        return Err(AsymptoticsError::WrongRegime { expected: "hyperdiffusive", found: report.regime.name() });
    }
    let threshold = 1.0 - opts.tol_m;
    let nodes: Vec<usize> = domain.interior().iter().copied().filter(|&id| u_final.get(id) >= threshold).collect();
    if nodes.is_empty() {
        return Err(AsymptoticsError::EmptyM { threshold });
    }
    let m = PointSet::new(domain, nodes, opts.tol_m);
    let dist = distance_field(domain);
    let rho = inradius(&dist);
    let containment = m.is_subset_of(&max_set(&dist, domain.h() + opts.tol_m * rho));

    let inflap = solve_inf_laplace(&ObstacleProblem::new(domain, m.clone(), 1.0), &opts.inflap)?;
    let mut sup_gap = 0.0f64;
    let mut cone_excess = f64::NEG_INFINITY;
    for &id in domain.interior() {
        let u = u_final.get(id);
        sup_gap = sup_gap.max((u - inflap.u.get(id)).abs());
        cone_excess = cone_excess.max(u - dist.get(id) / rho);
    }
    Ok(HyperdiffusiveComparison {
        m,
        containment,
        sup_gap,
        cone_excess,
        cone_bound: cone_excess <= opts.cone_slack,
        inflap,
    })
}

#[derive(Clone, Debug)]
pub struct ScalingCheck {
    pub v: ScalarField,
    /// `(lambda / mu)^{1/(q-p)}`, so that `v = factor * u`.
    pub factor: f64,
    /// Limit value of `||v||_inf / ||u||_inf`, with `lambda^{1/p}` in place of its limit.
    pub predicted: f64,
    pub ratio_err: f64,
}

/// Rescales an extremal into the solution of `-Delta_p v = mu_p |v|^{q-2} v` and
/// compares the sup-norm ratio with its predicted limit.
///
/// With `Q = lim q/p` and `k = 1/(Q-1)` the prediction is `(lambda^{1/p}/Lambda)^k`
/// for `mu_p = Lambda^p` and `lambda^{k/p} Theta^{-(1+k)}` for `mu_p = Theta^q`;
/// both reduce to their hyperdiffusive values `1` and `1/Theta` as `Q -> infinity`.
pub fn scaling_check(res: &ExtremalResult, mu: &MuProfile, regime: &Regime) -> Result<ScalingCheck, AsymptoticsError> {
    let log_mu = mu.log_mu(res.p, res.q, res.log_lambda)?;
    let factor = least_energy_factor(res, log_mu)?;
    let big_q = regime.ratio_limit();
    if big_q == 1.0 && !matches!(mu, MuProfile::LambdaItself) {
        return Err(AsymptoticsError::BadProfile("the predicted factor is undefined for q/p -> 1".into()));
    }
    let k = if big_q.is_infinite() { 0.0 } else { 1.0 / (big_q - 1.0) };
    let predicted = match *mu {
        MuProfile::LambdaItself => 1.0,
        MuProfile::LambdaPower { lambda } => (res.lambda_root / lambda).powf(k),
        MuProfile::ThetaPower { theta } => res.lambda_root.powf(k) * theta.powf(-(1.0 + k)),
    };
    let v = res.u.scaled(factor);
    let ratio = v.sup_norm() / res.u.sup_norm();
    Ok(ScalingCheck { v, factor, predicted, ratio_err: (ratio - predicted).abs() })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinEqDiagnostic {
    #[serde(skip)]
    pub field: ScalarField,
    /// Extremes over nodes at least `2h` from the boundary and from the maximum set of `d`.
    pub min: f64,
    pub max: f64,
    pub nodes: usize,
}

/// Residual of `min(|grad v| - Lambda v^Q, -Delta_inf v) = 0` for a sweep's final
/// extremal. Diagnostic only.
pub fn finite_q_residual(u_final: &ScalarField, q_ratio: f64, lambda: f64) -> MinEqDiagnostic {
    let domain = u_final.domain();
    let field = min_eq_residual(u_final, lambda, q_ratio);
    let dist = distance_field(domain);
    let margin = 2.0 * domain.h();
    let top: Vec<[f64; 2]> = max_set(&dist, domain.h()).nodes().iter().map(|&id| domain.coords(id)).collect();
    let (mut min, mut max, mut nodes) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for &id in domain.interior() {
        let x = domain.coords(id);
        if dist.get(id) < margin || top.iter().any(|y| (x[0] - y[0]).hypot(x[1] - y[1]) < margin) {
            continue;
        }
        let r = field.get(id);
        min = min.min(r);
        max = max.max(r);
        nodes += 1;
    }
    MinEqDiagnostic { field, min, max, nodes }
}
