mod common;

use proptest::prelude::*;
use sobolev_lab::asymptotics::{QProfile, Regime};
use sobolev_lab::geometry::{build_grid_domain, distance_field, fmt17, max_set, PointSet, ScalarField, Shape};
use sobolev_lab::inflap::{solve_inf_laplace, InfLapOptions, ObstacleProblem, SweepMode};
use sobolev_lab::plap::{rayleigh_quotient, minimize_extremal, SolverOptions};

fn small_shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(width, height)| Shape::Rectangle { width, height }),
        (-1.0f64..1.0, -1.0f64..1.0, 0.4f64..1.5)
            .prop_map(|(x, y, radius)| Shape::Disk { center: [x, y], radius }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn distance_is_one_lipschitz_and_vanishes_on_boundary(shape in small_shape(), n in 8u32..24) {
        let domain = build_grid_domain(shape.clone(), 1.0 / n as f64).unwrap();
        let d = distance_field(&domain);
        for &id in domain.interior() {
            prop_assert!(d.get(id) > 0.0);
            for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                if let Some(nb) = domain.offset(id, di, dj) {
                    let [x0, y0] = domain.coords(id);
                    let [x1, y1] = domain.coords(nb);
                    let r = (x1 - x0).hypot(y1 - y0);
                    if domain.is_interior(nb) {
                        prop_assert!((d.get(id) - d.get(nb)).abs() <= r * (1.0 + 1e-12));
                    }
                }
            }
        }
        prop_assert!(d.is_dirichlet_zero());
        prop_assert!(d.sup_norm() <= shape.inradius().unwrap_or(f64::INFINITY) + 1e-12);
    }

    #[test]
    fn quotient_is_scale_invariant(scale in 1e-3f64..1e3, p in 1.5f64..6.0, q in 1.0f64..8.0) {
        let domain = common::unit_square(1.0 / 8.0);
        let u = ScalarField::from_fn(&domain, |[x, y]| x * (1.0 - x) * (1.0 + y));
        let a = rayleigh_quotient(&u, p, q).unwrap();
        let b = rayleigh_quotient(&u.scaled(scale), p, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn quotient_bounded_below_by_first_eigenvalue(seed in proptest::collection::vec(0.01f64..1.0, 49)) {
        let domain = common::unit_square(1.0 / 8.0);
        let mut u = ScalarField::zeros(&domain);
        for (&id, &v) in domain.interior().iter().zip(&seed) {
            u.set(id, v);
        }
        let h = domain.h();
        let lambda1 = 8.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        prop_assert!(rayleigh_quotient(&u, 2.0, 2.0).unwrap() >= lambda1 * (1.0 - 1e-12));
    }

    #[test]
    fn fmt17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn custom_profiles_classify_by_exponent(coeff in 0.5f64..4.0, exponent in 0.0f64..3.0, p in 2.5f64..50.0) {
        let prof = QProfile::Custom { coeff, exponent };
        prop_assert!(prof.q(p) > 0.0);
        let expected = if exponent == 0.0 {
            Regime::FiniteLimit { r: coeff }
        } else if exponent < 1.0 {
            Regime::ZeroRatio
        } else if exponent == 1.0 {
            Regime::Proportional { ratio: coeff }
        } else {
            Regime::Hyperdiffusive
        };
        prop_assert_eq!(prof.regime(), expected);
    }

    #[test]
    fn power_profiles_need_alpha_above_one(alpha in 0.0f64..3.0) {
        let ok = QProfile::Power { alpha }.validate(&[4.0, 8.0]).is_ok();
        prop_assert_eq!(ok, alpha > 1.0);
        prop_assert_eq!(QProfile::Power { alpha: alpha + 1.01 }.regime(), Regime::Hyperdiffusive);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn inflap_respects_data_range_and_order(lo in -2.0f64..0.0, hi in 0.5f64..3.0, bump in 0.1f64..1.0, jacobi: bool) {
        let domain = common::unit_disk(1.0 / 12.0);
        let m = max_set(&distance_field(&domain), domain.h());
        let mode = if jacobi { SweepMode::Jacobi } else { SweepMode::GaussSeidel };
        let opts = InfLapOptions { mode, ..Default::default() };
        let solve = |top: f64| {
            let boundary = ScalarField::from_fn(&domain, |_| lo);
            let prob = ObstacleProblem { obstacle: m.clone(), m_val: top, ..ObstacleProblem::dirichlet(boundary) };
            solve_inf_laplace(&prob, &opts).unwrap().into_checked().unwrap()
        };
        let a = solve(hi);
        let b = solve(hi + bump);
        prop_assert_eq!(a.comparison_violations, 0);
        for &id in domain.interior() {
            let v = a.u.get(id);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            prop_assert!(b.u.get(id) >= v - 1e-9);
        }
    }

    #[test]
    fn extremals_are_nonnegative_with_unit_norm(p in 2.0f64..6.0, q in 1.0f64..8.0) {
        let domain = common::unit_square(1.0 / 8.0);
        let res = minimize_extremal(&domain, p, q, &SolverOptions::default()).unwrap();
        prop_assert!(res.u.values().iter().all(|&v| v >= 0.0));
        let norm = sobolev_lab::geometry::lr_norm(&res.u, q).unwrap();
        prop_assert!((norm - 1.0).abs() < 1e-9);
    }
}

#[test]
fn point_set_union_contains_both() {
    let domain = common::unit_square(1.0 / 8.0);
    let a = PointSet::new(&domain, vec![domain.interior()[0], domain.interior()[3]], 0.0);
    let b = PointSet::new(&domain, vec![domain.interior()[3], domain.interior()[5]], 0.0);
    let u = a.union(&b);
    assert_eq!(u.len(), 3);
    assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
}
