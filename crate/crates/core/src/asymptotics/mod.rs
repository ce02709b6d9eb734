//! p-ladder experiments and their predicted `p -> infinity` limits.
//!
//! A [`QProfile`] fixes the growth law `p -> q(p)` and with it the limit regime.
//! [`run_sweep`] solves one extremal per rung and tabulates the observables in a
//! [`SweepReport`]. Every verdict is a pure function of the table rows, so a report
//! read back from CSV yields the same verdicts.

mod checks;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{inradius, lr_norm, GeometryError, ScalarField};
use crate::inflap::InfLapError;
use crate::plap::SolverError;

pub use checks::{
    finite_q_residual, hyperdiffusive_compare, scaling_check, HyperdiffusiveComparison, HyperdiffusiveOptions,
    MinEqDiagnostic, ScalingCheck,
};
pub use sweep::{
    limit_verdict, q0_limit_check, q0_verdict, run_sweep, sandwich_verdict, shape_verdict, sup_norm_trend,
    sup_norm_verdict, SweepOptions, SweepReport, SweepRow, SweepRun, SweepSummary, Verdict,
};

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("invalid q profile: {0}")]
    BadProfile(String),
    #[error("invalid p ladder: {0}")]
    BadLadder(String),
    #[error("the check needs the {expected} regime, the report is {found}")]
    WrongRegime { expected: &'static str, found: &'static str },
    #[error("no node reaches 1 - tol_M = {threshold}")]
    EmptyM { threshold: f64 },
    #[error("report has no rows")]
    EmptyReport,
    #[error("malformed report: {0}")]
    BadReport(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    InfLap(#[from] InfLapError),
}

/// Growth law of the Lebesgue exponent along a p-ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QProfile {
    /// `q = r` for every `p`.
    ConstantR { r: f64 },
    /// `q = ratio * p`.
    Proportional { ratio: f64 },
    /// `q = p^alpha` with `alpha > 1`.
    Power { alpha: f64 },
    /// `q = coeff * p^exponent`; the exponent alone decides the regime.
    Custom { coeff: f64, exponent: f64 },
}

/// Limit behaviour selected by a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// `q(p) -> r < infinity`.
    FiniteLimit { r: f64 },
    /// `q(p) -> infinity` with `q/p -> 0`.
    ZeroRatio,
    /// `q/p -> ratio` in `(0, infinity)`.
    Proportional { ratio: f64 },
    /// `q/p -> infinity`.
    Hyperdiffusive,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::FiniteLimit { .. } => "finite_limit",
            Regime::ZeroRatio => "zero_ratio",
            Regime::Proportional { .. } => "proportional",
            Regime::Hyperdiffusive => "hyperdiffusive",
        }
    }

    /// Limit of `q/p`: zero, finite, or infinite.
    pub fn ratio_limit(&self) -> f64 {
        match *self {
            Regime::FiniteLimit { .. } | Regime::ZeroRatio => 0.0,
            Regime::Proportional { ratio } => ratio,
            Regime::Hyperdiffusive => f64::INFINITY,
        }
    }

    /// Exponent `r` of the normalization the extremals approach: `r` itself for a
    /// finite limit, infinity otherwise.
    pub fn profile_exponent(&self) -> f64 {
        match *self {
            Regime::FiniteLimit { r } => r,
            _ => f64::INFINITY,
        }
    }
}

impl QProfile {
    pub fn q(&self, p: f64) -> f64 {
        match *self {
            QProfile::ConstantR { r } => r,
            QProfile::Proportional { ratio } => ratio * p,
            QProfile::Power { alpha } => p.powf(alpha),
            QProfile::Custom { coeff, exponent } => coeff * p.powf(exponent),
        }
    }

    pub fn regime(&self) -> Regime {
        match *self {
            QProfile::ConstantR { r } => Regime::FiniteLimit { r },
            QProfile::Proportional { ratio } => Regime::Proportional { ratio },
            QProfile::Power { .. } => Regime::Hyperdiffusive,
            QProfile::Custom { coeff, exponent } => {
                if exponent == 0.0 {
                    Regime::FiniteLimit { r: coeff }
                } else if exponent < 1.0 {
                    Regime::ZeroRatio
                } else if exponent == 1.0 {
                    Regime::Proportional { ratio: coeff }
                } else {
                    Regime::Hyperdiffusive
                }
            }
        }
    }

    /// Checks the parameters and that `q(p) >= 1` on every rung.
    pub fn validate(&self, ladder: &[f64]) -> Result<(), AsymptoticsError> {
        let bad = |m: String| Err(AsymptoticsError::BadProfile(m));
        match *self {
            QProfile::ConstantR { r } if !(r.is_finite() && r >= 1.0) => return bad(format!("r must be at least 1, got {r}")),
            QProfile::Proportional { ratio } if !(ratio.is_finite() && ratio > 0.0) => {
                return bad(format!("ratio must be positive, got {ratio}"))
            }
            QProfile::Power { alpha } if !(alpha.is_finite() && alpha > 1.0) => {
                return bad(format!("alpha must exceed 1, got {alpha}"))
            }
            QProfile::Custom { coeff, exponent }
                if !(coeff.is_finite() && coeff > 0.0 && exponent.is_finite() && exponent >= 0.0) =>
            {
                return bad(format!("need coeff > 0 and exponent >= 0, got {coeff}, {exponent}"))
            }
            _ => {}
        }
        for &p in ladder {
            let q = self.q(p);
            if !(q.is_finite() && q >= 1.0) {
                return bad(format!("q({p}) = {q} is below 1"));
            }
        }
        Ok(())
    }
}

/// Predicted `lim lambda_{p,q(p)}^{1/p}`: `1/||d||_r` for a finite limit `r`,
/// `1/inradius` whenever `q(p) -> infinity`.
pub fn predicted_limit(profile: &QProfile, dist: &ScalarField) -> Result<f64, AsymptoticsError> {
    Ok(match profile.regime() {
        Regime::FiniteLimit { r } => 1.0 / lr_norm(dist, r)?,
        _ => 1.0 / inradius(dist),
    })
}

/// The coefficient `mu_p` of `-Delta_p v = mu_p |v|^{q-2} v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuProfile {
    /// `mu_p = lambda_{p,q(p)}`, so `v = u`.
    LambdaItself,
    /// `mu_p = Lambda^p`.
    LambdaPower { lambda: f64 },
    /// `mu_p = Theta^{q(p)}`.
    ThetaPower { theta: f64 },
}

impl MuProfile {
    /// `ln mu_p` at exponents `(p, q)` given `ln lambda_{p,q}`.
    pub fn log_mu(&self, p: f64, q: f64, log_lambda: f64) -> Result<f64, AsymptoticsError> {
        let positive = |x: f64, what: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(AsymptoticsError::BadProfile(format!("{what} must be positive, got {x}")))
            }
        };
        Ok(match *self {
            MuProfile::LambdaItself => log_lambda,
            MuProfile::LambdaPower { lambda } => p * positive(lambda, "Lambda")?.ln(),
            MuProfile::ThetaPower { theta } => q * positive(theta, "Theta")?.ln(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid_domain, distance_field, Shape};

    #[test]
    fn regimes_follow_the_exponent() {
        assert_eq!(QProfile::Custom { coeff: 1.0, exponent: 0.5 }.regime(), Regime::ZeroRatio);
        assert_eq!(QProfile::Custom { coeff: 3.0, exponent: 0.0 }.regime(), Regime::FiniteLimit { r: 3.0 });
        assert_eq!(QProfile::Custom { coeff: 2.0, exponent: 1.0 }.regime(), Regime::Proportional { ratio: 2.0 });
        assert_eq!(QProfile::Power { alpha: 2.0 }.regime(), Regime::Hyperdiffusive);
        assert_eq!(QProfile::Power { alpha: 2.0 }.q(16.0), 256.0);
    }

    #[test]
    fn profiles_are_validated() {
        assert!(QProfile::Power { alpha: 1.0 }.validate(&[4.0]).is_err());
        assert!(QProfile::ConstantR { r: 0.5 }.validate(&[4.0]).is_err());
        assert!(QProfile::Proportional { ratio: 0.1 }.validate(&[4.0]).is_err());
        assert!(QProfile::Proportional { ratio: 0.5 }.validate(&[4.0, 8.0]).is_ok());
    }

    #[test]
    fn predicted_limits() {
        let sq = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, 1.0 / 64.0).unwrap();
        let d = distance_field(&sq);
        assert_eq!(predicted_limit(&QProfile::Power { alpha: 2.0 }, &d).unwrap(), 2.0);
        let six = predicted_limit(&QProfile::ConstantR { r: 1.0 }, &d).unwrap();
        assert!((six - 6.0).abs() < 0.1, "{six}");
        let disk = build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, 1.0 / 32.0).unwrap();
        let dd = distance_field(&disk);
        assert_eq!(predicted_limit(&QProfile::Proportional { ratio: 1.0 }, &dd).unwrap(), 1.0);
    }
}
