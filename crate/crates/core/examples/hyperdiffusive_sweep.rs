//! q = p^2 on the disk: lambda^(1/p) -> 1/inradius, and the extremals approach
//! the cone solved from their own near-maximum set.

use std::time::Instant;

use sobolev_lab::asymptotics::{hyperdiffusive_compare, run_sweep, HyperdiffusiveOptions, QProfile, SweepOptions};
use sobolev_lab::geometry::{build_grid_domain, Shape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(32.0);
    let domain = build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, 1.0 / n)?;
    let t = Instant::now();
    let run = run_sweep(&domain, &[4.0, 8.0, 16.0, 32.0], &QProfile::Power { alpha: 2.0 }, &SweepOptions::default())?;
    println!("    p           q   lambda^(1/p)   sup u   sandwich");
    for r in &run.report.rows {
        println!(
            "{:>5} {:>11} {:>14.6} {:>7.4}   [{:.4}, {:.4}] {}",
            r.p, r.q, r.lambda_root, r.sup_norm, r.sandwich_lo, r.sandwich_hi, r.status
        );
    }
    let s = run.report.summary()?;
    println!("limit {:?}  sandwich {:?}  sup norm {:?}", s.limit, s.sandwich, s.sup_norm);
    let last = run.extremals.last().expect("four rungs");
    let c = hyperdiffusive_compare(&domain, &run.report, &last.u, &HyperdiffusiveOptions::default())?;
    println!(
        "M: {} nodes within {:.2} h of the center, containment {}, sup gap {:.4}, cone excess {:.4}",
        c.m.len(),
        c.m.max_distance_to([0.0, 0.0]) / domain.h(),
        c.containment,
        c.sup_gap,
        c.cone_excess
    );
    println!("total {:.2?}", t.elapsed());
    Ok(())
}
