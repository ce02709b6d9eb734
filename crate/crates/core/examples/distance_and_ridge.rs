//! Distance function, inradius, maximum set and ridge on a few shapes.

use sobolev_lab::geometry::{build_grid_domain, distance_field, inradius, lr_norm, max_set, ridge_set, Shape};
use sobolev_lab::geometry::DEFAULT_RIDGE_ANGLE;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shapes = [
        ("unit square", Shape::Rectangle { width: 1.0, height: 1.0 }),
        ("2x1 rectangle", Shape::Rectangle { width: 2.0, height: 1.0 }),
        ("unit disk", Shape::Disk { center: [0.0, 0.0], radius: 1.0 }),
        ("annulus", Shape::Annulus { center: [0.0, 0.0], r_in: 0.5, r_out: 1.0 }),
    ];
    for (name, shape) in shapes {
        let domain = build_grid_domain(shape, 1.0 / 32.0)?;
        let d = distance_field(&domain);
        let m = max_set(&d, domain.h());
        let ridge = ridge_set(&domain, DEFAULT_RIDGE_ANGLE);
        println!(
            "{name:>14}: inradius {:.4}  |d|_1 {:.5}  |d|_2 {:.5}  #M {:>3}  #ridge {:>4}  M in ridge: {}",
            inradius(&d),
            lr_norm(&d, 1.0)?,
            lr_norm(&d, 2.0)?,
            m.len(),
            ridge.len(),
            m.is_subset_of(&ridge)
        );
    }
    Ok(())
}
