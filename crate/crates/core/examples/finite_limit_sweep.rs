//! q fixed at 1 on the square: lambda^(1/p) -> |Omega| / |d|_1 = 6 and the
//! extremals flatten onto the L^1-normalized distance.

use sobolev_lab::asymptotics::{run_sweep, QProfile, SweepOptions};
use sobolev_lab::geometry::{build_grid_domain, Shape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(32.0);
    let domain = build_grid_domain(Shape::Rectangle { width: 1.0, height: 1.0 }, 1.0 / n)?;
    let run = run_sweep(&domain, &[4.0, 8.0, 16.0, 32.0], &QProfile::ConstantR { r: 1.0 }, &SweepOptions::default())?;
    for r in &run.report.rows {
        println!(
            "p={:>4}: lambda^(1/p) {:.5} (limit {:.5}, err {:.4})  |u - d/|d|_1|_inf {:.4}  {}",
            r.p, r.lambda_root, r.predicted_limit, r.limit_error, r.gap_r, r.status
        );
    }
    let s = run.report.summary()?;
    println!("limit {:?}  shape {:?}", s.limit, s.shape);
    Ok(())
}
