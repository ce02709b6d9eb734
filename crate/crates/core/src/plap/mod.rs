//! Best Sobolev constants `lambda_{p,q}` and their positive extremals.
//!
//! The extremal minimizes `E(u) / ||u||_q^p` over fields vanishing on the boundary.
//! Descent runs on the logarithm of the quotient, with every trial point clipped at
//! zero and rescaled to unit `L^q` norm. The sup-norm constant `Lambda_p` is obtained
//! by pinning one node at 1, which turns the problem into a convex one.

mod descent;
mod energy;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance_field, lr_norm, GridDomain, ScalarField};

pub use descent::Direction;
pub use energy::{
    cell_gradients, discrete_energy, log_rayleigh_quotient, pde_residual, rayleigh_gradient,
    rayleigh_quotient,
};

use descent::{minimize, DescentConfig, DescentOutcome, Objective};
use energy::{log_energy, log_energy_grad, log_lq_norm, log_lq_norm_grad};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameter: {0}")]
    BadParameter(String),
    #[error("the field vanishes identically")]
    ZeroField,
    #[error("gradient tolerance not met after {iterations} iterations (grad norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },
    #[error("{count} interior values are not positive at termination")]
    NonPositive { count: usize },
    #[error("q equals p: the eigenvalue problem has a free scaling")]
    EqualExponents,
}

/// Initial field for the descent.
#[derive(Clone, Debug, Default)]
pub enum Seed {
    /// The distance to the boundary, normalized.
    #[default]
    Distance,
    /// A previous solution, e.g. the extremal at the previous rung of a p-ladder.
    Warm(ScalarField),
}

impl Seed {
    fn label(&self) -> &'static str {
        match self {
            Seed::Distance => "distance",
            Seed::Warm(_) => "warm",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the gradient norm falls below `grad_tol` times its value at the
    /// distance-function start (also for warm starts).
    pub grad_tol: f64,
    /// First trial step of the line search; `None` uses `1/(p lambda)` on the quotient
    /// gradient, i.e. `1/p` on the gradient of its logarithm.
    pub initial_step: Option<f64>,
    pub backtrack: f64,
    pub armijo: f64,
    pub direction: Direction,
    pub seed: Seed,
    /// Additional randomly perturbed starts; the lowest quotient wins.
    pub multistart: usize,
    pub rng_seed: u64,
    /// For `sup_norm_extremal`: move the pinned node to neighbours while that lowers
    /// the constant.
    pub pin_search: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            grad_tol: 1e-6,
            initial_step: None,
            backtrack: 0.5,
            armijo: 1e-4,
            direction: Direction::Lbfgs { memory: 10 },
            seed: Seed::Distance,
            multistart: 0,
            rng_seed: 0x5eed,
            pin_search: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::BadParameter(m));
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad(format!("backtracking factor must lie in (0,1), got {}", self.backtrack));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!("sufficient decrease constant must lie in (0,1), got {}", self.armijo));
        }
        if let Some(t) = self.initial_step {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("initial step must be positive, got {t}"));
            }
        }
        if let Direction::Lbfgs { memory: 0 } = self.direction {
            return bad("L-BFGS memory must be at least 1".into());
        }
        Ok(())
    }

    fn descent_config(&self, p: f64) -> DescentConfig {
        DescentConfig {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            armijo: self.armijo,
            backtrack: self.backtrack,
            initial_step: self.initial_step.unwrap_or(1.0 / p),
            direction: self.direction,
            grad_ref: None,
        }
    }
}

/// Termination state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    NoConvergence,
    NonPositive,
}

/// A computed pair `(lambda_{p,q}, u_{p,q})` with diagnostics.
#[derive(Clone, Debug)]
pub struct ExtremalResult {
    pub p: f64,
    pub q: f64,
    /// `ln lambda`; `lambda` itself may overflow for large `p`.
    pub log_lambda: f64,
    pub lambda: f64,
    /// `lambda^{1/p}`, computed as `exp(ln lambda / p)`.
    pub lambda_root: f64,
    /// Unit `L^q` norm, zero on the boundary.
    pub u: ScalarField,
    pub iterations: usize,
    pub grad_norm: f64,
    pub residual: f64,
    pub clip_events: usize,
    pub status: SolveStatus,
    pub start: &'static str,
    /// `ln` of the quotient after every accepted step of the winning start.
    pub history: Vec<f64>,
}

impl ExtremalResult {
    /// Turns a flagged result into the corresponding error.
    pub fn into_checked(self) -> Result<ExtremalResult, SolverError> {
        match self.status {
            SolveStatus::Converged => Ok(self),
            SolveStatus::NoConvergence => Err(SolverError::NoConvergence {
                iterations: self.iterations,
                grad_norm: self.grad_norm,
            }),
            SolveStatus::NonPositive => Err(SolverError::NonPositive { count: non_positive(&self.u) }),
        }
    }

    pub fn report(&self) -> ExtremalReport {
        ExtremalReport {
            p: self.p,
            q: self.q,
            lambda: self.lambda,
            log_lambda: self.log_lambda,
            lambda_root: self.lambda_root,
            sup_norm: self.u.sup_norm(),
            q_norm: lr_norm(&self.u, self.q).unwrap_or(f64::NAN),
            iterations: self.iterations,
            grad_norm: self.grad_norm,
            residual: self.residual,
            clip_events: self.clip_events,
            status: self.status,
            start: self.start.to_string(),
        }
    }
}

/// Serializable summary of an [`ExtremalResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub log_lambda: f64,
    pub lambda_root: f64,
    pub sup_norm: f64,
    pub q_norm: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub residual: f64,
    pub clip_events: usize,
    pub status: SolveStatus,
    pub start: String,
}

fn non_positive(u: &ScalarField) -> usize {
    u.domain().interior().iter().filter(|&&id| u.get(id) <= 0.0).count()
}

fn check_exponents(p: f64, q: f64) -> Result<(), SolverError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(SolverError::BadParameter(format!("p must be finite and at least 1, got {p}")));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(SolverError::BadParameter(format!("q must be finite and at least 1, got {q}")));
    }
    Ok(())
}

/// Quotient objective over the interior node values.
struct QuotientObjective<'a> {
    domain: &'a GridDomain,
    p: f64,
    q: f64,
    full: Vec<f64>,
    ge: Vec<f64>,
    gn: Vec<f64>,
}

impl Objective for QuotientObjective<'_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let interior = self.domain.interior();
        for (&id, &v) in interior.iter().zip(x) {
            self.full[id] = v;
        }
        let le = log_energy_grad(self.domain, &self.full, self.p, &mut self.ge);
        let ln = log_lq_norm_grad(self.domain, &self.full, self.q, &mut self.gn);
        for (g, &id) in grad.iter_mut().zip(interior) {
            *g = self.ge[id] - self.p * self.gn[id];
        }
        le - self.p * ln
    }
}

fn clip_and_normalize(domain: &GridDomain, q: f64, full: &mut [f64], x: &mut [f64]) -> usize {
    let mut clipped = 0;
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clipped += 1;
        }
    }
    for (&id, &v) in domain.interior().iter().zip(x.iter()) {
        full[id] = v;
    }
    let ln = log_lq_norm(domain, full, q);
    if ln.is_finite() {
        let s = (-ln).exp();
        x.iter_mut().for_each(|v| *v *= s);
    }
    clipped
}

fn seed_values(domain: &Arc<GridDomain>, seed: &Seed) -> Vec<f64> {
    let field = match seed {
        Seed::Distance => distance_field(domain),
        Seed::Warm(f) => f.clone(),
    };
    domain.interior().iter().map(|&id| field.get(id).max(0.0)).collect()
}

/// Minimizes the discrete Rayleigh quotient `E(u) / ||u||_q^p`.
///
/// The winning start is reported in `start`; an unmet gradient tolerance or a
/// non-positive interior value is flagged in `status` rather than discarded.
pub fn minimize_extremal(
    domain: &Arc<GridDomain>,
    p: f64,
    q: f64,
    opts: &SolverOptions,
) -> Result<ExtremalResult, SolverError> {
    check_exponents(p, q)?;
    opts.validate()?;
    let base = seed_values(domain, &opts.seed);
    if base.iter().all(|&v| v == 0.0) {
        return Err(SolverError::ZeroField);
    }
    let mut starts = vec![(opts.seed.label(), base.clone())];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    for _ in 0..opts.multistart {
        let x: Vec<f64> = base.iter().map(|v| v * (1.0 + 0.5 * rng.gen_range(-1.0..1.0))).collect();
        starts.push(("perturbed", x));
    }

    let n = domain.node_count();
    let mut cfg = opts.descent_config(p);
    let new_obj = || QuotientObjective { domain, p, q, full: vec![0.0; n], ge: vec![0.0; n], gn: vec![0.0; n] };
    if let Seed::Warm(_) = opts.seed {
        let mut x = seed_values(domain, &Seed::Distance);
        clip_and_normalize(domain, q, &mut vec![0.0; n], &mut x);
        let mut g = vec![0.0; x.len()];
        new_obj().eval(&x, &mut g);
        cfg.grad_ref = Some(g.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let mut best: Option<(&'static str, DescentOutcome)> = None;
    for (label, x0) in starts {
        let mut obj = new_obj();
        let mut scratch = vec![0.0; n];
        let out = minimize(&mut obj, x0, &cfg, |x| clip_and_normalize(domain, q, &mut scratch, x));
        if best.as_ref().is_none_or(|(_, b)| out.f < b.f) {
            best = Some((label, out));
        }
    }
    let (start, out) = best.expect("at least one start");

    let mut u = ScalarField::zeros(domain);
    for (&id, &v) in domain.interior().iter().zip(&out.x) {
        u.set(id, v);
    }
    let log_lambda = log_energy(domain, u.values(), p) - p * log_lq_norm(domain, u.values(), q);
    let lambda = log_lambda.exp();
    let status = if non_positive(&u) > 0 {
        SolveStatus::NonPositive
    } else if out.converged {
        SolveStatus::Converged
    } else {
        SolveStatus::NoConvergence
    };
    Ok(ExtremalResult {
        p,
        q,
        log_lambda,
        lambda,
        lambda_root: (log_lambda / p).exp(),
        residual: pde_residual(&u, lambda, p, q),
        u,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        clip_events: out.clip_events,
        status,
        start,
        history: out.history,
    })
}

/// Minimizer of `||grad u||_p` under `||u||_inf = 1`.
#[derive(Clone, Debug)]
pub struct SupNormExtremal {
    /// `Lambda_p`.
    pub lambda_p: f64,
    /// Max-norm exactly 1, attained at `pin`.
    pub u: ScalarField,
    pub pin: usize,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Energy objective with one node pinned at 1.
struct PinnedObjective<'a> {
    domain: &'a GridDomain,
    vars: &'a [usize],
    p: f64,
    full: Vec<f64>,
    ge: Vec<f64>,
}

impl Objective for PinnedObjective<'_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        for (&id, &v) in self.vars.iter().zip(x) {
            self.full[id] = v;
        }
        let le = log_energy_grad(self.domain, &self.full, self.p, &mut self.ge);
        for (g, &id) in grad.iter_mut().zip(self.vars) {
            *g = self.ge[id];
        }
        le
    }
}

/// Lowest energy with `pin` held at 1 and values confined to `[0, 1]`.
fn solve_pinned(
    domain: &Arc<GridDomain>,
    p: f64,
    pin: usize,
    start: &[f64],
    cfg: &DescentConfig,
) -> (f64, Vec<f64>, DescentOutcome) {
    let vars: Vec<usize> = domain.interior().iter().copied().filter(|&id| id != pin).collect();
    let mut full = vec![0.0; domain.node_count()];
    full[pin] = 1.0;
    let mut obj = PinnedObjective { domain, vars: &vars, p, full: full.clone(), ge: vec![0.0; full.len()] };
    let x0: Vec<f64> = vars.iter().map(|&id| start[id]).collect();
    let out = minimize(&mut obj, x0, cfg, |x| {
        let mut clipped = 0;
        for v in x.iter_mut() {
            if *v < 0.0 || *v > 1.0 {
                *v = v.clamp(0.0, 1.0);
                clipped += 1;
            }
        }
        clipped
    });
    for (&id, &v) in vars.iter().zip(&out.x) {
        full[id] = v;
    }
    (log_energy(domain, &full, p), full, out)
}

/// Gradient norm of the pinned objective at `start`.
fn pinned_grad_norm(domain: &GridDomain, p: f64, pin: usize, start: &[f64]) -> f64 {
    let vars: Vec<usize> = domain.interior().iter().copied().filter(|&id| id != pin).collect();
    let mut full = start.to_vec();
    full[pin] = 1.0;
    let mut obj = PinnedObjective { domain, vars: &vars, p, full: full.clone(), ge: vec![0.0; full.len()] };
    let x: Vec<f64> = vars.iter().map(|&id| full[id]).collect();
    let mut g = vec![0.0; x.len()];
    obj.eval(&x, &mut g);
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Normalized start values and the lowest-index argmax node.
fn pinned_start(domain: &GridDomain, seed: &ScalarField) -> (Vec<f64>, usize) {
    let m = seed.sup_norm();
    let mut start = vec![0.0; domain.node_count()];
    let mut pin = usize::MAX;
    for &id in domain.interior() {
        let v = seed.get(id).max(0.0) / m;
        start[id] = v;
        // strict comparison keeps the lowest index among ties
        if pin == usize::MAX || v > start[pin] {
            pin = id;
        }
    }
    (start, pin)
}

/// Computes `Lambda_p = min ||grad u||_p / ||u||_inf`.
///
/// The max-norm constraint is handled by pinning the lowest-index argmax node of the
/// start at 1; with `pin_search` the pin then walks to neighbouring nodes while the
/// constant decreases.
pub fn sup_norm_extremal(
    domain: &Arc<GridDomain>,
    p: f64,
    opts: &SolverOptions,
) -> Result<SupNormExtremal, SolverError> {
    check_exponents(p, 1.0)?;
    opts.validate()?;
    let seed = match &opts.seed {
        Seed::Distance => distance_field(domain),
        Seed::Warm(f) => f.clone(),
    };
    if seed.sup_norm() == 0.0 {
        return Err(SolverError::ZeroField);
    }
    let (start, mut pin) = pinned_start(domain, &seed);
    // every pinned solve, including the pin search, uses the distance start as reference
    let (d_start, d_pin) = pinned_start(domain, &distance_field(domain));
    let mut cfg = opts.descent_config(p);
    cfg.grad_ref = Some(pinned_grad_norm(domain, p, d_pin, &d_start));
    let (mut best_le, mut best_u, out) = solve_pinned(domain, p, pin, &start, &cfg);
    let mut iterations = out.iterations;
    let mut converged = out.converged;

    if opts.pin_search {
        loop {
            let mut moved = false;
            for (di, dj) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let Some(cand) = domain.offset(pin, di, dj) else { continue };
                if !domain.is_interior(cand) {
                    continue;
                }
                let mut s = best_u.clone();
                s[cand] = 1.0;
                let (le, u, out) = solve_pinned(domain, p, cand, &s, &cfg);
                iterations += out.iterations;
                if le < best_le - 1e-12 * best_le.abs() {
                    best_le = le;
                    best_u = u;
                    pin = cand;
                    converged = out.converged;
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
    }

    let u = ScalarField::from_values(domain, best_u);
    let status = if converged { SolveStatus::Converged } else { SolveStatus::NoConvergence };
    Ok(SupNormExtremal { lambda_p: (best_le / p).exp(), u, pin, iterations, status })
}

/// Scaling factor `(lambda_{p,q} / mu)^{1/(q-p)}` taking the extremal to the
/// solution of `-Delta_p v = mu |v|^{q-2} v`, with `mu` given through its logarithm.
pub fn least_energy_factor(res: &ExtremalResult, log_mu: f64) -> Result<f64, SolverError> {
    if res.q == res.p {
        return Err(SolverError::EqualExponents);
    }
    if !log_mu.is_finite() {
        return Err(SolverError::BadParameter(format!("ln mu must be finite, got {log_mu}")));
    }
    Ok(((res.log_lambda - log_mu) / (res.q - res.p)).exp())
}

/// Positive solution (least-energy solution when `q > p`) of
/// `-Delta_p v = mu |v|^{q-2} v`, obtained by rescaling the extremal.
pub fn least_energy_from_extremal(res: &ExtremalResult, mu: f64) -> Result<ScalarField, SolverError> {
    if !(mu > 0.0) {
        return Err(SolverError::BadParameter(format!("mu must be positive, got {mu}")));
    }
    let c = least_energy_factor(res, mu.ln())?;
    Ok(res.u.scaled(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid_domain, Shape};

    fn square(h: f64) -> Arc<GridDomain> {
        build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, h).unwrap()
    }

    #[test]
    fn options_are_validated() {
        let mut o = SolverOptions::default();
        assert!(o.validate().is_ok());
        o.backtrack = 1.0;
        assert!(o.validate().is_err());
        o = SolverOptions { grad_tol: 0.0, ..Default::default() };
        assert!(o.validate().is_err());
        o = SolverOptions { max_iters: 0, ..Default::default() };
        assert!(o.validate().is_err());
    }

    #[test]
    fn rejects_q_below_one() {
        let d = square(0.125);
        let e = minimize_extremal(&d, 3.0, 0.5, &SolverOptions::default());
        assert!(matches!(e, Err(SolverError::BadParameter(_))));
    }

    #[test]
    fn extremal_is_normalized_positive_and_consistent() {
        let d = square(1.0 / 16.0);
        let res = minimize_extremal(&d, 4.0, 3.0, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        assert!((lr_norm(&res.u, 3.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(d.interior().iter().all(|&id| res.u.get(id) > 0.0));
        assert!(res.u.is_dirichlet_zero());
        let e = discrete_energy(&res.u, 4.0);
        assert!((res.lambda - e).abs() <= 1e-12 * e);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn unit_ratio_returns_the_extremal() {
        let d = square(1.0 / 16.0);
        let res = minimize_extremal(&d, 4.0, 2.0, &SolverOptions::default()).unwrap();
        let v = least_energy_from_extremal(&res, res.lambda).unwrap();
        assert_eq!(v.values(), res.u.values());
    }

    #[test]
    fn doubling_for_q_below_p() {
        // -Delta_p (c u) = c^{p-1} lambda u^{q-1} = mu (c u)^{q-1} with c = (mu/lambda)^{1/(p-q)}
        let d = square(1.0 / 16.0);
        let res = minimize_extremal(&d, 4.0, 2.0, &SolverOptions::default()).unwrap();
        let mu = 2f64.powf(res.p - res.q) * res.lambda;
        let v = least_energy_from_extremal(&res, mu).unwrap();
        for &id in d.interior() {
            assert!((v.get(id) - 2.0 * res.u.get(id)).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_exponents_have_no_least_energy_scaling() {
        let d = square(1.0 / 8.0);
        let res = minimize_extremal(&d, 3.0, 3.0, &SolverOptions::default()).unwrap();
        assert!(matches!(least_energy_from_extremal(&res, 1.0), Err(SolverError::EqualExponents)));
    }

    #[test]
    fn sup_norm_extremal_has_unit_max() {
        let d = square(1.0 / 16.0);
        let s = sup_norm_extremal(&d, 6.0, &SolverOptions::default()).unwrap();
        assert_eq!(s.u.sup_norm(), 1.0);
        assert_eq!(s.u.get(s.pin), 1.0);
        assert!(s.lambda_p > 0.0);
    }

    #[test]
    fn multistart_never_does_worse() {
        let d = square(1.0 / 12.0);
        let one = minimize_extremal(&d, 3.0, 6.0, &SolverOptions::default()).unwrap();
        let opts = SolverOptions { multistart: 2, ..Default::default() };
        let many = minimize_extremal(&d, 3.0, 6.0, &opts).unwrap();
        assert!(many.log_lambda <= one.log_lambda + 1e-12);
    }
}
