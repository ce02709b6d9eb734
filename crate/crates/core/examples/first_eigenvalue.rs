//! The p = q = 2 extremal on the unit square is the first Dirichlet eigenfunction
//! of the 5-point Laplacian, whose eigenvalue is known in closed form.

use std::f64::consts::PI;
use std::time::Instant;

use sobolev_lab::geometry::{build_grid_domain, Shape};
use sobolev_lab::plap::{minimize_extremal, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [8u32, 16, 32] {
        let h = 1.0 / n as f64;
        let domain = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, h)?;
        let t = Instant::now();
        let res = minimize_extremal(&domain, 2.0, 2.0, &SolverOptions::default())?;
        let exact = 8.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        println!(
            "h=1/{n:<3} lambda {:.12}  exact {:.12}  rel err {:.1e}  {} iters  {:?}  ({:.2?})",
            res.lambda,
            exact,
            (res.lambda - exact).abs() / exact,
            res.iterations,
            res.status,
            t.elapsed()
        );
    }
    println!("continuum value 2 pi^2 = {:.6}", 2.0 * PI * PI);

    // Other exponents on the same grid.
    let domain = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, 1.0 / 32.0)?;
    for (p, q) in [(3.0, 2.0), (4.0, 4.0), (6.0, 10.0)] {
        let res = minimize_extremal(&domain, p, q, &SolverOptions::default())?;
        println!("p={p} q={q}: lambda^(1/p) = {:.6}, sup u = {:.4}", res.lambda_root, res.u.sup_norm());
    }
    Ok(())
}
