//! Discrete p-energy, Lebesgue norms and the Rayleigh quotient on cell gradients.
//!
//! Each lattice cell with base node `a` carries the forward-difference gradient
//! `((u[a+x] - u[a]) / h, (u[a+y] - u[a]) / h)`. Sums are evaluated as
//! `G^p * sum (|g| / G)^p` with `G` the largest cell gradient, and the quotient is
//! handled through its logarithm so that large exponents neither overflow nor
//! underflow.

use crate::geometry::{GridDomain, ScalarField};

use super::SolverError;

/// Forward-difference gradient of every cell of `domain.cells()`.
pub fn cell_gradients(u: &ScalarField) -> Vec<[f64; 2]> {
    let domain = u.domain();
    let inv_h = 1.0 / domain.h();
    let v = u.values();
    domain
        .cells()
        .iter()
        .map(|&[a, b, c]| [(v[b] - v[a]) * inv_h, (v[c] - v[a]) * inv_h])
        .collect()
}

/// `x^e` for `x >= 0`, using repeated squaring when `e` is a small integer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Pow {
    e: f64,
    int: Option<i32>,
}

impl Pow {
    pub(crate) fn new(e: f64) -> Self {
        let int = (e.fract() == 0.0 && e.abs() <= 4096.0).then_some(e as i32);
        Pow { e, int }
    }

    #[inline]
    pub(crate) fn of(self, x: f64) -> f64 {
        match self.int {
            Some(k) => x.powi(k),
            None => x.powf(self.e),
        }
    }
}

/// Cell gradients and their largest magnitude.
fn gradients(domain: &GridDomain, v: &[f64], out: &mut Vec<[f64; 3]>) -> f64 {
    let inv_h = 1.0 / domain.h();
    out.clear();
    let mut gmax = 0.0f64;
    for &[a, b, c] in domain.cells() {
        let (gx, gy) = ((v[b] - v[a]) * inv_h, (v[c] - v[a]) * inv_h);
        let m = gx.hypot(gy);
        gmax = gmax.max(m);
        out.push([gx, gy, m]);
    }
    gmax
}

/// `ln sum_cells |g|^p h^2`; `-inf` for a constant field.
pub(crate) fn log_energy(domain: &GridDomain, v: &[f64], p: f64) -> f64 {
    let mut gs = Vec::with_capacity(domain.cells().len());
    let gmax = gradients(domain, v, &mut gs);
    if gmax == 0.0 {
        return f64::NEG_INFINITY;
    }
    let pw = Pow::new(p);
    let inv = 1.0 / gmax;
    let s: f64 = gs.iter().filter(|g| g[2] > 0.0).map(|g| pw.of(g[2] * inv)).sum();
    p * gmax.ln() + s.ln() + 2.0 * domain.h().ln()
}

/// `ln E` and its partial derivatives with respect to every node value.
///
/// `grad` must hold one entry per node; it is overwritten.
pub(crate) fn log_energy_grad(domain: &GridDomain, v: &[f64], p: f64, grad: &mut [f64]) -> f64 {
    let inv_h = 1.0 / domain.h();
    let cells = domain.cells();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut gs = Vec::with_capacity(cells.len());
    let gmax = gradients(domain, v, &mut gs);
    if gmax == 0.0 {
        return f64::NEG_INFINITY;
    }
    let pw = Pow::new(p - 2.0);
    let inv = 1.0 / gmax;
    let mut s = 0.0;
    for g in gs.iter_mut() {
        let r = g[2] * inv;
        // reuse the slot for (|g|/G)^{p-2}
        g[2] = if r > 0.0 { pw.of(r) } else { 0.0 };
        s += g[2] * r * r;
    }
    let scale = p / (gmax * gmax * s) * inv_h;
    for (&[a, b, c], g) in cells.iter().zip(&gs) {
        if g[2] == 0.0 {
            continue;
        }
        let w = scale * g[2];
        let (gx, gy) = (w * g[0], w * g[1]);
        grad[a] -= gx + gy;
        grad[b] += gx;
        grad[c] += gy;
    }
    p * gmax.ln() + s.ln() + 2.0 * domain.h().ln()
}

/// `ln ||u||_q` over interior nodes; `-inf` for the zero field.
pub(crate) fn log_lq_norm(domain: &GridDomain, v: &[f64], q: f64) -> f64 {
    let interior = domain.interior();
    let m = interior.iter().map(|&id| v[id].abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    let pw = Pow::new(q);
    let inv = 1.0 / m;
    let h2 = domain.h() * domain.h();
    let s: f64 = interior.iter().map(|&id| pw.of(v[id].abs() * inv)).sum::<f64>() * h2;
    m.ln() + s.ln() / q
}

/// `ln ||u||_q` and its partial derivatives (written into `grad`, interior entries only).
pub(crate) fn log_lq_norm_grad(domain: &GridDomain, v: &[f64], q: f64, grad: &mut [f64]) -> f64 {
    let interior = domain.interior();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let m = interior.iter().map(|&id| v[id].abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    let pw = Pow::new(q - 1.0);
    let inv = 1.0 / m;
    let h2 = domain.h() * domain.h();
    let mut s = 0.0;
    for &id in interior {
        let x = v[id];
        if x != 0.0 {
            let r = x.abs() * inv;
            let t = pw.of(r);
            s += t * r;
            grad[id] = t * x.signum();
        }
    }
    let k = 1.0 / (m * s);
    for &id in interior {
        grad[id] *= k;
    }
    m.ln() + (s * h2).ln() / q
}

/// `sum_cells |grad_h u|^p h^2`.
pub fn discrete_energy(u: &ScalarField, p: f64) -> f64 {
    log_energy(u.domain(), u.values(), p).exp()
}

/// `ln(E(u) / ||u||_q^p)`.
pub fn log_rayleigh_quotient(u: &ScalarField, p: f64, q: f64) -> Result<f64, SolverError> {
    let d = u.domain();
    let ln_norm = log_lq_norm(d, u.values(), q);
    if ln_norm == f64::NEG_INFINITY {
        return Err(SolverError::ZeroField);
    }
    Ok(log_energy(d, u.values(), p) - p * ln_norm)
}

/// `E(u) / ||u||_q^p`, invariant under positive scaling of `u`.
pub fn rayleigh_quotient(u: &ScalarField, p: f64, q: f64) -> Result<f64, SolverError> {
    log_rayleigh_quotient(u, p, q).map(f64::exp)
}

/// Partial derivatives of the quotient with respect to the interior node values.
pub fn rayleigh_gradient(u: &ScalarField, p: f64, q: f64) -> Result<ScalarField, SolverError> {
    let d = u.domain();
    let n = d.node_count();
    let (mut ge, mut gn) = (vec![0.0; n], vec![0.0; n]);
    let le = log_energy_grad(d, u.values(), p, &mut ge);
    let ln = log_lq_norm_grad(d, u.values(), q, &mut gn);
    if ln == f64::NEG_INFINITY {
        return Err(SolverError::ZeroField);
    }
    let r = (le - p * ln).exp();
    let mut out = ScalarField::zeros(d);
    for &id in d.interior() {
        out.set(id, r * (ge[id] - p * gn[id]));
    }
    Ok(out)
}

/// Weak-form residual of `-div(|grad u|^{p-2} grad u) = lambda |u|^{q-2} u`.
///
/// Tested against the hat function of every interior node; each nodal residual is
/// divided by the hat's discrete `H^1_0` seminorm and the maximum is returned.
pub fn pde_residual(u: &ScalarField, lambda: f64, p: f64, q: f64) -> f64 {
    let d = u.domain();
    let v = u.values();
    let h = d.h();
    let inv_h = 1.0 / h;
    let h2 = h * h;
    let n = d.node_count();
    let mut flux = vec![0.0; n];
    let mut hat = vec![0.0f64; n];
    for &[a, b, c] in d.cells() {
        let g = [(v[b] - v[a]) * inv_h, (v[c] - v[a]) * inv_h];
        let m = g[0].hypot(g[1]);
        let w = if m > 0.0 { m.powf(p - 2.0) * h2 * inv_h } else { 0.0 };
        flux[a] -= w * (g[0] + g[1]);
        flux[b] += w * g[0];
        flux[c] += w * g[1];
        // |grad phi|^2 h^2 summed per node
        hat[a] += 2.0;
        hat[b] += 1.0;
        hat[c] += 1.0;
    }
    d.interior()
        .iter()
        .map(|&id| {
            let x = v[id];
            let source = if x == 0.0 { 0.0 } else { lambda * x.abs().powf(q - 1.0) * x.signum() * h2 };
            (flux[id] - source).abs() / hat[id].sqrt()
        })
        .fold(0.0, f64::max)
}
