//! The constant Lambda_p = min |grad u|_p / |u|_inf and its approach to
//! 1/inradius, together with the two-sided bound it gives on lambda^(1/p).

use sobolev_lab::geometry::{build_grid_domain, distance_field, inradius, lr_norm, Shape};
use sobolev_lab::plap::{minimize_extremal, sup_norm_extremal, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, 1.0 / 32.0)?;
    let d = distance_field(&domain);
    let measure = domain.measure();
    println!("disk, 1/inradius = {:.4}", 1.0 / inradius(&d));
    let opts = SolverOptions::default();
    for p in [4.0, 8.0, 16.0] {
        let s = sup_norm_extremal(&domain, p, &SolverOptions { grad_tol: 1e-5, ..opts.clone() })?;
        let q = p * p;
        let e = minimize_extremal(&domain, p, q, &opts)?;
        let lo = s.lambda_p * measure.powf(-1.0 / q);
        let hi = measure.powf(1.0 / p) / lr_norm(&d, q)?;
        println!(
            "p={p:>4}: Lambda_p {:.4} ({:?})  {lo:.4} <= lambda^(1/p) = {:.4} <= {hi:.4}",
            s.lambda_p, s.status, e.lambda_root
        );
    }
    Ok(())
}
