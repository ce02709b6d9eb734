//! A multiple of the extremal solves -Delta_p v = mu |v|^(q-2) v. For mu = Theta^q
//! the sup norm of v tends to 1/Theta in the hyperdiffusive regime.

use sobolev_lab::asymptotics::{scaling_check, MuProfile, QProfile};
use sobolev_lab::geometry::{build_grid_domain, Shape};
use sobolev_lab::plap::{least_energy_from_extremal, minimize_extremal, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = build_grid_domain(Shape::Disk { center: [0.0, 0.0], radius: 1.0 }, 1.0 / 32.0)?;
    let profile = QProfile::Power { alpha: 2.0 };
    for p in [4.0, 8.0, 16.0] {
        let res = minimize_extremal(&domain, p, profile.q(p), &SolverOptions::default())?;
        let s = scaling_check(&res, &MuProfile::ThetaPower { theta: 2.0 }, &profile.regime())?;
        println!("p={p:>4}: |v|_inf = {:.4}  predicted {:.4}  err {:.4}", s.v.sup_norm(), s.predicted, s.ratio_err);
    }
    let res = minimize_extremal(&domain, 4.0, 6.0, &SolverOptions::default())?;
    let v = least_energy_from_extremal(&res, res.lambda)?;
    println!("mu = lambda reproduces u: max |v - u| = {:e}", v.sup_distance(&res.u));
    Ok(())
}
