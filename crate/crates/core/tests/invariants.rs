use proptest::prelude::*;

use hypspec::examples::{gamma_exponent, Branch, ExponentTarget};
use hypspec::geometry::{enumerate_orbit, poincare_partial_sum, GroupPresentation};
use hypspec::geometry::{distance, distance_via_cosh, Mobius, Point};
use hypspec::projector::{telescoping_check, BumpFamily, BumpKind};
use hypspec::quotient::{cylinder_group, cylinder_truncation, periodize_kernel, quasi_periodicity_defect, CylinderEigenfunction};
use hypspec::special::{gamma, plancherel_closed, plancherel_density, spherical_function, PhiRoute};
use hypspec::transform::{RadialGrid, RadialProfile};
use hypspec::Complex64;

fn point() -> impl Strategy<Value = Point> {
    (-5.0f64..5.0, 0.05f64..5.0).prop_map(|(x, y)| Point::new(x, y).unwrap())
}

/// A point of the annulus 1 <= |z| < e^ell, the fundamental domain of the cylinder.
fn annulus_point(ell: f64) -> impl Strategy<Value = Point> {
    (0.0f64..1.0, 0.05f64..(std::f64::consts::PI - 0.05))
        .prop_map(move |(u, th)| Point::from_complex(Complex64::from_polar((u * ell).exp(), th)).unwrap())
}

/// Normalized g = [[a, b], [c, d]] with ad - bc = 1.
fn mobius() -> impl Strategy<Value = Mobius> {
    (0.3f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b, c)| Mobius::new(a, b, c, (1.0 + b * c) / a).unwrap())
}

fn schottky(max_len: usize) -> GroupPresentation {
    let a = Mobius::circle_pairing(-4.0, 0.5, 4.0, 0.5).unwrap();
    let b = Mobius::circle_pairing(-1.5, 0.3, 1.5, 0.3).unwrap();
    GroupPresentation::schottky(vec![a, b], max_len).unwrap()
}

fn phi(lambda: f64, r: f64, route: PhiRoute) -> f64 {
    spherical_function(Complex64::new(lambda, 0.0), r, route).unwrap().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_symmetric_isometry_invariant(z in point(), w in point(), g in mobius()) {
        let d = distance(z, w);
        prop_assert!((d - distance(w, z)).abs() <= 1e-12 * (1.0 + d));
        prop_assert_eq!(distance(z, z), 0.0);
        prop_assert!((distance(g.apply(z), g.apply(w)) - d).abs() <= 1e-10 * (1.0 + d));
        prop_assert!((distance_via_cosh(z, w) - d).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn cyclic_orbit_distances_are_multiples_of_ell(ell in 0.1f64..3.0, n in 1usize..8) {
        let g = GroupPresentation::cyclic(ell, n).unwrap();
        let o = enumerate_orbit(&g, Point::i(), Point::i()).unwrap();
        prop_assert_eq!(o.points.len(), 2 * n + 1);
        for p in &o.points {
            prop_assert!((p.distance - p.word_length as f64 * ell).abs() <= 1e-12 * (1.0 + p.distance));
        }
    }

    #[test]
    fn schottky_orbit_respects_isometries(z in point(), g in mobius()) {
        let grp = schottky(3);
        for p in enumerate_orbit(&grp, z, Point::i()).unwrap().points {
            let w = p.element.apply(Point::i());
            prop_assert!((distance(g.apply(z), g.apply(w)) - distance(z, w)).abs() <= 1e-9 * (1.0 + p.distance));
        }
    }

    #[test]
    fn spherical_routes_agree_and_are_even(lambda in 0.0f64..40.0, r in 0.0f64..6.0) {
        let m = phi(lambda, r, PhiRoute::Mechanism);
        let i = phi(lambda, r, PhiRoute::Integral);
        prop_assert!((m - i).abs() <= 1e-8 * (1.0 + i.abs()), "{m} {i}");
        for route in [PhiRoute::Mechanism, PhiRoute::Integral] {
            let a = phi(lambda, r, route);
            prop_assert!((a - phi(-lambda, r, route)).abs() <= 1e-10);
        }
    }

    #[test]
    fn spherical_function_is_one_at_the_origin(lambda in 0.0f64..500.0) {
        for route in [PhiRoute::Mechanism, PhiRoute::Integral] {
            prop_assert!((phi(lambda, 0.0, route) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn spherical_function_is_convex_on_the_imaginary_axis(r in 0.1f64..8.0, e0 in 0.0f64..0.4) {
        let h = 0.02;
        let v: Vec<f64> = (0..3)
            .map(|k| spherical_function(Complex64::new(0.0, -(e0 + k as f64 * h)), r, PhiRoute::Integral).unwrap().re)
            .collect();
        prop_assert!(v[0] - 2.0 * v[1] + v[2] >= -1e-10);
    }

    #[test]
    fn gamma_recurrence(re in -4.5f64..6.0, im in -6.0f64..6.0) {
        let z = Complex64::new(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3);
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300));
    }

    #[test]
    fn plancherel_density_matches_closed_form(t in -3.0f64..3.0) {
        let l = 10f64.powf(t);
        let g = plancherel_density(l).unwrap();
        prop_assert!((g / plancherel_closed(l) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn telescoping_holds_for_every_family(lambda in 2.0f64..600.0, k in 6i32..14) {
        let mu: Vec<f64> = (0..400).map(|j| j as f64 * 0.01).collect();
        for b in [BumpFamily::plateau(), BumpFamily::build(BumpKind::BSpline { order: 6 }).unwrap()] {
            prop_assert!(telescoping_check(&b, lambda, k, &mu).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn gamma_exponent_is_the_larger_branch(p in 2.01f64..50.0) {
        prop_assume!((p - 6.0).abs() > 1e-9);
        let g = gamma_exponent(p).unwrap();
        let (r, k) = (ExponentTarget::radial_value(p), ExponentTarget::knapp_value(p));
        prop_assert!(g.gamma_p >= r && g.gamma_p >= k);
        let on_radial = g.gamma_p == r;
        prop_assert!(on_radial != (g.gamma_p == k));
        prop_assert_eq!(g.branch == Branch::Radial, on_radial);
    }

    #[test]
    fn cylinder_eigenfunction_is_quasi_periodic(
        (ell, z) in (0.5f64..2.0).prop_flat_map(|l| (Just(l), annulus_point(l))),
        lambda in 0.1f64..8.0,
        xi in 1.0f64..2.0,
    ) {
        let k = cylinder_truncation(ell, &[z], 1e-12) + 2;
        let p = CylinderEigenfunction::new(ell, lambda, xi, k).unwrap();
        prop_assert!(quasi_periodicity_defect(&p, z) < 1e-8);
    }

    #[test]
    fn periodized_kernels_are_deck_invariant((ell, z) in (0.5f64..2.0).prop_flat_map(|l| (Just(l), annulus_point(l)))) {
        let r: Vec<f64> = (0..=400).map(|k| k as f64 * 0.05).collect();
        let values = r.iter().map(|&s| Complex64::new((-0.5 * s * s).exp(), 0.0)).collect();
        let grid = RadialGrid::trapezoid(r).unwrap();
        let kernel = RadialProfile::new(&grid, values, f64::INFINITY).unwrap();
        let group = cylinder_group(ell, 12).unwrap();
        let x0 = Point::i();
        let a = periodize_kernel(&group, &kernel, z, x0).unwrap();
        let b = periodize_kernel(&group, &kernel, z.scaled(ell), x0).unwrap();
        prop_assert!((a.value - b.value).norm() <= 1e-8 + a.tail_bound + b.tail_bound, "{:?} {:?}", a, b);
    }
}

#[test]
fn pruning_stays_within_the_tail_bound() {
    let z = Point::new(0.3, 1.4).unwrap();
    for s in [1.5, 2.5] {
        for l in [2, 3, 4] {
            let full = poincare_partial_sum(&schottky(l), s, z, Point::i(), l).unwrap();
            let pruned = poincare_partial_sum(&schottky(l).with_prune_radius(6.0).unwrap(), s, z, Point::i(), l).unwrap();
            assert!((full.partial - pruned.partial).abs() <= pruned.tail_bound, "{full:?} {pruned:?}");
        }
    }
}

#[test]
fn truncation_changes_sums_by_less_than_the_previous_tail() {
    let z = Point::new(0.2, 0.9).unwrap();
    for s in [1.5, 2.5] {
        let sums: Vec<_> = (1..=5).map(|l| poincare_partial_sum(&schottky(l), s, z, Point::i(), l).unwrap()).collect();
        for w in sums.windows(2) {
            assert!(w[1].partial - w[0].partial <= w[0].tail_bound, "{:?}", w);
        }
    }
}
