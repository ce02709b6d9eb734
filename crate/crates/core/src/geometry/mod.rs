//! Rasterized domains, the distance to the boundary and the sets derived from it.
//!
//! Distances are evaluated from the analytic [`Shape`] at every node, so the only
//! geometric error is the O(h) rasterization of the boundary itself.

mod field;
mod grid;
mod shape;

use std::sync::Arc;

use thiserror::Error;

pub use field::{fmt17, pairwise_sum, PointSet, ScalarField};
pub use grid::{GridDomain, NodeKind};
pub use shape::{Point, Shape};

use shape::{sub, Foot};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("no lattice node lies strictly inside the shape")]
    EmptyInterior,
    #[error("invalid shape: {0}")]
    BadShape(String),
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("Lebesgue exponent must be at least 1, got {0}")]
    BadExponent(f64),
}

/// Default angular separation for ridge detection, in radians.
pub const DEFAULT_RIDGE_ANGLE: f64 = 0.2;

/// Exponents above this are evaluated in max-factored form.
const PLAIN_SUM_MAX_EXPONENT: f64 = 64.0;

pub fn build_grid_domain(shape: Shape, h: f64) -> Result<Arc<GridDomain>, GeometryError> {
    GridDomain::new(shape, h)
}

/// Distance to the boundary at every interior node, zero elsewhere.
pub fn distance_field(domain: &Arc<GridDomain>) -> ScalarField {
    let shape = domain.shape();
    ScalarField::dirichlet_from_fn(domain, |x| shape.boundary_distance(x))
}

/// Largest nodal value of a distance field.
pub fn inradius(dist: &ScalarField) -> f64 {
    dist.sup_norm()
}

/// Discrete `L^r` norm over interior nodes with weight `h^2`; `r = INFINITY` gives the max.
pub fn lr_norm(f: &ScalarField, r: f64) -> Result<f64, GeometryError> {
    if r.is_nan() || r < 1.0 {
        return Err(GeometryError::BadExponent(r));
    }
    let domain = f.domain();
    let m = f.sup_norm();
    if r.is_infinite() || m == 0.0 {
        return Ok(m);
    }
    let h2 = domain.h() * domain.h();
    let vals = f.values();
    if r <= PLAIN_SUM_MAX_EXPONENT {
        let terms: Vec<f64> = domain.interior().iter().map(|&id| vals[id].abs().powf(r) * h2).collect();
        Ok(pairwise_sum(&terms).powf(1.0 / r))
    } else {
        let terms: Vec<f64> =
            domain.interior().iter().map(|&id| (vals[id].abs() / m).powf(r) * h2).collect();
        Ok(m * pairwise_sum(&terms).powf(1.0 / r))
    }
}

/// Interior nodes where `dist >= inradius - tol`.
pub fn max_set(dist: &ScalarField, tol: f64) -> PointSet {
    let top = inradius(dist) - tol.max(0.0);
    let domain = dist.domain();
    let nodes = domain.interior().iter().copied().filter(|&id| dist.get(id) >= top).collect();
    PointSet::new(domain, nodes, tol)
}

/// Interior nodes with two nearest boundary points seen at an angle of at least
/// `angle_tol`, using the analytic nearest-point map.
///
/// Boundary pieces within `h` of the minimal distance count as nearest, and the
/// maximum set `max_set(d, h)` is always included.
pub fn ridge_set(domain: &Arc<GridDomain>, angle_tol: f64) -> PointSet {
    let slack = domain.h();
    let prims = domain.shape().primitives();
    let mut nodes = Vec::new();
    let mut feet: Vec<Foot> = Vec::with_capacity(prims.len());
    for &id in domain.interior() {
        let x = domain.coords(id);
        let near: Vec<(f64, Foot)> = prims.iter().map(|p| p.nearest(x)).collect();
        let dmin = near.iter().map(|n| n.0).fold(f64::INFINITY, f64::min);
        feet.clear();
        feet.extend(near.iter().filter(|n| n.0 <= dmin + slack).map(|n| n.1));
        if has_separated_feet(x, &feet, angle_tol) {
            nodes.push(id);
        }
    }
    let ridge = PointSet::new(domain, nodes, angle_tol);
    ridge.union(&max_set(&distance_field(domain), domain.h()))
}

fn has_separated_feet(x: Point, feet: &[Foot], angle_tol: f64) -> bool {
    if feet.iter().any(|f| matches!(f, Foot::WholeCircle)) {
        return true;
    }
    let dirs: Vec<Point> = feet
        .iter()
        .filter_map(|f| match f {
            Foot::Point(y) => Some(sub(*y, x)),
            Foot::WholeCircle => None,
        })
        .collect();
    for (k, a) in dirs.iter().enumerate() {
        for b in &dirs[k + 1..] {
            let angle = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]).abs();
            if angle >= angle_tol {
                return true;
            }
        }
    }
    false
}
