#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use sobolev_lab::geometry::{build_grid_domain, GridDomain, Shape};

pub fn unit_square(h: f64) -> Arc<GridDomain> {
    build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, h).unwrap()
}

pub fn unit_disk(h: f64) -> Arc<GridDomain> {
    build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, h).unwrap()
}

/// Smallest eigenvalue of the dense 5-point Dirichlet Laplacian on the interior
/// nodes of `domain`, by inverse power iteration with an LU factorization.
pub fn five_point_min_eigenvalue(domain: &GridDomain) -> f64 {
    let interior = domain.interior();
    let n = interior.len();
    let mut slot = vec![usize::MAX; domain.node_count()];
    for (k, &id) in interior.iter().enumerate() {
        slot[id] = k;
    }
    let h2 = domain.h() * domain.h();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (k, &id) in interior.iter().enumerate() {
        a[(k, k)] = 4.0 / h2;
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(nb) = domain.offset(id, di, dj) {
                if slot[nb] != usize::MAX {
                    a[(k, slot[nb])] = -1.0 / h2;
                }
            }
        }
    }
    let lu = a.clone().lu();
    let mut x = DVector::from_element(n, 1.0);
    let mut mu = 0.0;
    for _ in 0..500 {
        let y = lu.solve(&x).expect("nonsingular");
        let next = y.norm();
        x = y / next;
        if (next - mu).abs() <= 1e-15 * next {
            break;
        }
        mu = next;
    }
    (x.transpose() * &a * &x)[(0, 0)]
}

/// `Lambda_p` of the disk of radius `r`: the radial minimizer has
/// `|u'| ~ s^{-1/(p-1)}`, giving `Lambda_p^p = 2 pi r^{2-p} ((p-2)/(p-1))^{p-1}`.
pub fn disk_lambda_p(p: f64, r: f64) -> f64 {
    (2.0 * std::f64::consts::PI * r.powf(2.0 - p) * ((p - 2.0) / (p - 1.0)).powf(p - 1.0)).powf(1.0 / p)
}
