//! On the disk the normalized distance is infinity-harmonic off its maximum set;
//! on the square it is not, and the obstacle solution differs from it visibly.

use sobolev_lab::geometry::{build_grid_domain, distance_field, inradius, max_set, Shape};
use sobolev_lab::inflap::{solve_inf_laplace, InfLapOptions, ObstacleProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 32.0;
    for (name, shape) in [
        ("disk", Shape::Disk { center: [0.0, 0.0], radius: 1.0 }),
        ("square", Shape::Rectangle { width: 1.0, height: 1.0 }),
    ] {
        let domain = build_grid_domain(shape, 1.0 / n)?;
        let d = distance_field(&domain);
        let tent = d.scaled(1.0 / inradius(&d));
        let prob = ObstacleProblem::new(&domain, max_set(&d, domain.h()), 1.0);
        let sol = solve_inf_laplace(&prob, &InfLapOptions::default())?.into_checked()?;
        let gap = domain.interior().iter().map(|&id| (sol.u.get(id) - tent.get(id)).abs()).fold(0.0, f64::max);
        println!("{name:>6}: |w - d/|d|_inf|_inf = {gap:.4} ({:.1} h)", gap * n);
    }
    Ok(())
}
