//! Infinity-harmonic function on the disk minus its center, equal to 1 at the
//! center, against the exact cone 1 - |x|.

use std::time::Instant;

use sobolev_lab::geometry::{build_grid_domain, distance_field, max_set, Shape};
use sobolev_lab::inflap::{cone_solution, solve_inf_laplace, InfLapOptions, ObstacleProblem, SweepMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let levels: Vec<u32> = match std::env::args().nth(1) {
        Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![16, 32, 64],
    };
    for n in levels {
        let domain = build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, 1.0 / n as f64)?;
        let m = max_set(&distance_field(&domain), domain.h());
        let prob = ObstacleProblem::new(&domain, m, 1.0);
        for mode in [SweepMode::GaussSeidel, SweepMode::Jacobi] {
            let t = Instant::now();
            let sol = solve_inf_laplace(&prob, &InfLapOptions { mode, ..Default::default() })?.into_checked()?;
            let err = sol.u.sup_distance(&cone_solution(&domain)?);
            println!(
                "h=1/{n:<4} {mode:?}: sup error {err:.4} = {:.2} h  sweeps {}  violations {}  ({:.2?})",
                err / domain.h(),
                sol.iterations,
                sol.comparison_violations,
                t.elapsed()
            );
        }
    }
    Ok(())
}
