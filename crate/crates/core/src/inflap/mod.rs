//! Infinity-harmonic Dirichlet problems with an interior obstacle set.
//!
//! The solver iterates the local midrange update
//! `u(x) <- (max_S(x) u + min_S(x) u) / 2` over the lattice nodes `S(x)` within
//! `eps_radius` of `x`. The update is monotone and commutes with constants, so
//! every sweep keeps `u` between the smallest and largest data value, and a
//! discrete supersolution start decreases pointwise to the fixed point.

mod residual;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance_field, GridDomain, NodeKind, PointSet, ScalarField, Shape};

pub use residual::{inf_lap_residual, min_eq_residual, residual_field, ResidualSummary};

#[derive(Debug, Error)]
pub enum InfLapError {
    #[error("stencil radius must be at least h = {h}, got {eps}")]
    BadRadius { eps: f64, h: f64 },
    #[error("invalid solver parameter: {0}")]
    BadParameter(String),
    #[error("boundary data and obstacle must live on the problem's grid")]
    DomainMismatch,
    #[error("boundary data must be finite")]
    NonFiniteData,
    #[error("no convergence after {sweeps} sweeps (last update {sup_update:e})")]
    NoConvergence { sweeps: usize, sup_update: f64 },
    #[error("the domain is not a disk")]
    NotADisk,
}

/// `-Delta_inf u = 0` off `obstacle`, `u = boundary` on boundary nodes and
/// `u = m_val` on `obstacle`.
#[derive(Clone, Debug)]
pub struct ObstacleProblem {
    pub domain: Arc<GridDomain>,
    /// Read at boundary nodes only.
    pub boundary: ScalarField,
    pub obstacle: PointSet,
    pub m_val: f64,
}

impl ObstacleProblem {
    /// Zero boundary data with `u = m_val` on `obstacle`.
    pub fn new(domain: &Arc<GridDomain>, obstacle: PointSet, m_val: f64) -> Self {
        ObstacleProblem { domain: Arc::clone(domain), boundary: ScalarField::zeros(domain), obstacle, m_val }
    }

    /// Pure Dirichlet problem with the given boundary values.
    pub fn dirichlet(boundary: ScalarField) -> Self {
        let domain = Arc::clone(boundary.domain());
        ObstacleProblem { obstacle: PointSet::empty(&domain), domain, boundary, m_val: 0.0 }
    }

    fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.domain.closure().filter(|&id| self.domain.kind(id) == NodeKind::Boundary)
    }

    /// Smallest and largest prescribed value.
    pub fn data_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.boundary_nodes().map(|id| self.boundary.get(id)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !self.obstacle.is_empty() {
            lo = lo.min(self.m_val);
            hi = hi.max(self.m_val);
        }
        (lo, hi)
    }

    fn validate(&self) -> Result<(), InfLapError> {
        if !Arc::ptr_eq(self.boundary.domain(), &self.domain)
            || !Arc::ptr_eq(self.obstacle.domain(), &self.domain)
        {
            return Err(InfLapError::DomainMismatch);
        }
        if !self.m_val.is_finite() || !self.boundary_nodes().all(|id| self.boundary.get(id).is_finite()) {
            return Err(InfLapError::NonFiniteData);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// In-place updates, alternating forward and backward lexicographic order.
    #[default]
    GaussSeidel,
    /// Double-buffered updates, parallel over nodes; results do not depend on the
    /// thread count.
    Jacobi,
}

/// Starting field of the iteration.
#[derive(Clone, Debug, Default)]
pub enum InfLapInit {
    /// `min(m_val, m_val * (d + eps_radius) / inradius)` for zero boundary data,
    /// a supersolution on convex domains; the largest data value otherwise.
    #[default]
    SuperCone,
    /// The smallest data value everywhere, a subsolution.
    Floor,
    Field(ScalarField),
}

#[derive(Clone, Debug)]
pub struct InfLapOptions {
    /// Stencil radius; `None` means `3h`.
    pub eps_radius: Option<f64>,
    /// Stop when a sweep changes no value by more than this; `None` means
    /// `1e-8` times the data range.
    pub tol: Option<f64>,
    pub max_sweeps: usize,
    pub mode: SweepMode,
    pub init: InfLapInit,
    /// Also require the geometric tail estimate `delta rho / (1 - rho)` of the
    /// remaining change to be below `tol`, with `rho` the ratio of the last two
    /// sweep updates.
    pub tail_estimate: bool,
}

impl Default for InfLapOptions {
    fn default() -> Self {
        InfLapOptions {
            eps_radius: None,
            tol: None,
            max_sweeps: 1_000_000,
            mode: SweepMode::GaussSeidel,
            init: InfLapInit::SuperCone,
            tail_estimate: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InfLapSolution {
    pub u: ScalarField,
    pub iterations: usize,
    /// Largest change in the last sweep.
    pub sup_update: f64,
    pub converged: bool,
    /// Updates that left `[min data, max data]`; zero for a monotone scheme.
    pub comparison_violations: usize,
    /// Updates that increased a value beyond rounding. Zero means the sweep
    /// sequence was pointwise nonincreasing.
    pub increases: usize,
    pub eps_radius: f64,
    pub tol: f64,
}

impl InfLapSolution {
    pub fn into_checked(self) -> Result<InfLapSolution, InfLapError> {
        if self.converged {
            Ok(self)
        } else {
            Err(InfLapError::NoConvergence { sweeps: self.iterations, sup_update: self.sup_update })
        }
    }
}

/// Per-node stencil in compressed rows; `free` lists the nodes being updated.
struct Stencil {
    free: Vec<usize>,
    start: Vec<usize>,
    nbrs: Vec<u32>,
}

fn build_stencil(domain: &GridDomain, fixed: &[bool], eps: f64) -> Stencil {
    let h = domain.h();
    let r = (eps / h + 1e-9).floor() as i64;
    let mut offsets = Vec::new();
    for dj in -r..=r {
        for di in -r..=r {
            if (di, dj) != (0, 0) && ((di * di + dj * dj) as f64).sqrt() * h <= eps * (1.0 + 1e-12) {
                offsets.push((di, dj));
            }
        }
    }
    let free: Vec<usize> = domain.interior().iter().copied().filter(|&id| !fixed[id]).collect();
    let mut start = Vec::with_capacity(free.len() + 1);
    let mut nbrs = Vec::with_capacity(free.len() * offsets.len());
    start.push(0);
    for &id in &free {
        for &(di, dj) in &offsets {
            if let Some(n) = domain.offset(id, di, dj) {
                if domain.kind(n) != NodeKind::Exterior {
                    nbrs.push(n as u32);
                }
            }
        }
        start.push(nbrs.len());
    }
    Stencil { free, start, nbrs }
}

#[inline]
fn midrange(u: &[f64], nbrs: &[u32]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &n in nbrs {
        let v = u[n as usize];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    0.5 * (lo + hi)
}

fn initial_values(prob: &ObstacleProblem, init: &InfLapInit, eps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let domain = &prob.domain;
    let mut u = vec![lo; domain.node_count()];
    match init {
        InfLapInit::Floor => {}
        InfLapInit::Field(f) => {
            for &id in domain.interior() {
                u[id] = f.get(id).clamp(lo, hi);
            }
        }
        InfLapInit::SuperCone => {
            let zero_data = prob.boundary_nodes().all(|id| prob.boundary.get(id) == 0.0);
            if zero_data && prob.m_val > 0.0 {
                let d = distance_field(domain);
                let lam = 1.0 / d.sup_norm();
                for &id in domain.interior() {
                    u[id] = (prob.m_val * lam * (d.get(id) + eps)).min(prob.m_val);
                }
            } else {
                for &id in domain.interior() {
                    u[id] = hi;
                }
            }
        }
    }
    for id in prob.boundary_nodes() {
        u[id] = prob.boundary.get(id);
    }
    for &id in prob.obstacle.nodes() {
        u[id] = prob.m_val;
    }
    u
}

/// Solves the obstacle problem by midrange iteration.
///
/// Non-convergence within `max_sweeps` is reported through `converged`; use
/// [`InfLapSolution::into_checked`] to turn it into an error.
pub fn solve_inf_laplace(prob: &ObstacleProblem, opts: &InfLapOptions) -> Result<InfLapSolution, InfLapError> {
    prob.validate()?;
    let domain = &prob.domain;
    let h = domain.h();
    let eps = opts.eps_radius.unwrap_or(3.0 * h);
    if !(eps >= h * (1.0 - 1e-12)) || !eps.is_finite() {
        return Err(InfLapError::BadRadius { eps, h });
    }
    if opts.max_sweeps == 0 {
        return Err(InfLapError::BadParameter("max_sweeps must be at least 1".into()));
    }
    let (lo, hi) = prob.data_range();
    let tol = opts.tol.unwrap_or(1e-8 * (hi - lo));
    if !(tol >= 0.0) {
        return Err(InfLapError::BadParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    // comparison slack for rounding in the midrange
    let slack = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);

    let mut fixed = vec![false; domain.node_count()];
    for &id in prob.obstacle.nodes() {
        fixed[id] = true;
    }
    let st = build_stencil(domain, &fixed, eps);
    let mut u = initial_values(prob, &opts.init, eps, lo, hi);

    let mut iterations = 0;
    let mut sup_update = f64::INFINITY;
    let mut violations = 0;
    let mut increases = 0;
    let mut converged = false;
    let mut next = u.clone();
    let row = |k: usize| &st.nbrs[st.start[k]..st.start[k + 1]];

    while iterations < opts.max_sweeps {
        let mut delta = 0.0f64;
        match opts.mode {
            SweepMode::GaussSeidel => {
                let n = st.free.len();
                let forward = iterations % 2 == 0;
                for t in 0..n {
                    let k = if forward { t } else { n - 1 - t };
                    let id = st.free[k];
                    let new = midrange(&u, row(k));
                    let old = u[id];
                    if new > old + slack {
                        increases += 1;
                    }
                    if new < lo - slack || new > hi + slack {
                        violations += 1;
                    }
                    delta = delta.max((new - old).abs());
                    u[id] = new;
                }
            }
            SweepMode::Jacobi => {
                let vals: Vec<f64> = (0..st.free.len()).into_par_iter().map(|k| midrange(&u, row(k))).collect();
                for (&id, &new) in st.free.iter().zip(&vals) {
                    let old = u[id];
                    if new > old + slack {
                        increases += 1;
                    }
                    if new < lo - slack || new > hi + slack {
                        violations += 1;
                    }
                    delta = delta.max((new - old).abs());
                    next[id] = new;
                }
                std::mem::swap(&mut u, &mut next);
                next.copy_from_slice(&u);
            }
        }
        iterations += 1;
        let rho = delta / sup_update;
        sup_update = delta;
        let tail_ok = !opts.tail_estimate || delta == 0.0 || (rho < 1.0 && delta * rho / (1.0 - rho) <= tol);
        if delta <= tol && tail_ok {
            converged = true;
            break;
        }
    }

    Ok(InfLapSolution {
        u: ScalarField::from_values(domain, u),
        iterations,
        converged,
        sup_update,
        comparison_violations: violations,
        increases,
        eps_radius: eps,
        tol,
    })
}

/// `1 - |x - x0| / R` on interior and boundary nodes of a disk domain.
pub fn cone_solution(domain: &Arc<GridDomain>) -> Result<ScalarField, InfLapError> {
    let Shape::Disk { center, radius } = *domain.shape() else {
        return Err(InfLapError::NotADisk);
    };
    Ok(ScalarField::from_fn(domain, |x| 1.0 - (x[0] - center[0]).hypot(x[1] - center[1]) / radius))
}
