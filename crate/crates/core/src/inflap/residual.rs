//! Centered finite-difference residuals of the limit equations.
//!
//! Viscosity solutions need not be twice differentiable, so these values are
//! diagnostics only.

use serde::Serialize;

use crate::geometry::{distance_field, NodeKind, PointSet, ScalarField};

/// First and second centered differences at `id`, if its 3x3 neighbourhood is defined.
fn derivatives(u: &ScalarField, id: usize) -> Option<[f64; 5]> {
    let d = u.domain();
    let h = d.h();
    let mut w = [[0.0; 3]; 3];
    for (dj, row) in w.iter_mut().enumerate() {
        for (di, slot) in row.iter_mut().enumerate() {
            let n = d.offset(id, di as i64 - 1, dj as i64 - 1)?;
            if d.kind(n) == NodeKind::Exterior {
                return None;
            }
            *slot = u.get(n);
        }
    }
    let c = w[1][1];
    let ux = (w[1][2] - w[1][0]) / (2.0 * h);
    let uy = (w[2][1] - w[0][1]) / (2.0 * h);
    let uxx = (w[1][2] - 2.0 * c + w[1][0]) / (h * h);
    let uyy = (w[2][1] - 2.0 * c + w[0][1]) / (h * h);
    let uxy = (w[2][2] - w[0][2] - w[2][0] + w[0][0]) / (4.0 * h * h);
    Some([ux, uy, uxx, uxy, uyy])
}

/// `-(ux^2 uxx + 2 ux uy uxy + uy^2 uyy)` at an interior node; `None` when the
/// node is not interior or a neighbour is exterior.
pub fn inf_lap_residual(u: &ScalarField, id: usize) -> Option<f64> {
    if !u.domain().is_interior(id) {
        return None;
    }
    let [ux, uy, uxx, uxy, uyy] = derivatives(u, id)?;
    Some(-(ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy))
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub max_abs: f64,
    /// Nodes that entered the maximum.
    pub nodes: usize,
    pub margin: f64,
}

/// Infinity-Laplacian residual at every interior node, plus its largest magnitude
/// over nodes at least `margin` away from the boundary and from `exclude`.
pub fn residual_field(u: &ScalarField, exclude: &PointSet, margin: f64) -> (ScalarField, ResidualSummary) {
    let domain = u.domain();
    let dist = distance_field(domain);
    let excl: Vec<[f64; 2]> = exclude.nodes().iter().map(|&id| domain.coords(id)).collect();
    let mut field = ScalarField::zeros(domain);
    let mut max_abs = 0.0f64;
    let mut nodes = 0;
    for &id in domain.interior() {
        let Some(r) = inf_lap_residual(u, id) else { continue };
        field.set(id, r);
        let x = domain.coords(id);
        let far = dist.get(id) >= margin && excl.iter().all(|y| (x[0] - y[0]).hypot(x[1] - y[1]) >= margin);
        if far {
            max_abs = max_abs.max(r.abs());
            nodes += 1;
        }
    }
    (field, ResidualSummary { max_abs, nodes, margin })
}

/// `min(|grad u| - lambda u^Q, -Delta_inf u)` at interior nodes; zero at nodes
/// without a full neighbourhood. `u^0` is taken as 1.
pub fn min_eq_residual(u: &ScalarField, lambda: f64, q_exp: f64) -> ScalarField {
    let domain = u.domain();
    let mut out = ScalarField::zeros(domain);
    for &id in domain.interior() {
        let Some([ux, uy, uxx, uxy, uyy]) = derivatives(u, id) else { continue };
        let v = u.get(id).max(0.0);
        let pow = if q_exp == 0.0 { 1.0 } else { v.powf(q_exp) };
        let first = ux.hypot(uy) - lambda * pow;
        let second = -(ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy);
        out.set(id, first.min(second));
    }
    out
}
