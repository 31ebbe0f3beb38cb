//! Property tests over randomized inputs.

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use crfolio::cli::{parse_config, RunConfig, Task};
use crfolio::extension::analyze;
use crfolio::family::{build_rotating_circles, build_translated_circles, FamilySpec};
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::jacobian::compute_j;
use crfolio::numerics::roots::{roots_in_disc, RootOptions};
use crfolio::numerics::{fourier_coeffs, poly, winding_number, CircleSamples, PeriodicGrid};
use crfolio::topology::BoundaryMap;

fn complex(r: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (r.clone(), r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn polar(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn winding_of_a_circle(center in complex(-2.0..2.0), radius in 0.2f64..2.0, probe in polar(3.0), turns in 1i64..4) {
        let grid = PeriodicGrid::new(512).unwrap();
        let curve = CircleSamples::from_fn(grid, |t| center + Complex64::from_polar(radius, turns as f64 * t));
        let gap = ((probe - center).norm() - radius).abs();
        // winding refuses points within 10 chord lengths of the curve
        prop_assume!(gap > 0.15 * radius * turns as f64);
        let expect = if (probe - center).norm() < radius { turns } else { 0 };
        prop_assert_eq!(winding_number(&curve, probe).unwrap(), expect);
    }

    #[test]
    fn spectra_round_trip(modes in prop::collection::vec(complex(-1.0..1.0), 1..20)) {
        let grid = PeriodicGrid::new(64).unwrap();
        let values: Vec<Complex64> = grid
            .angles()
            .map(|t| modes.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, (k as f64 - 9.0) * t)).sum())
            .collect();
        let samples = CircleSamples::new(grid, values.clone()).unwrap();
        let back = fourier_coeffs(&samples).unwrap().inverse();
        for (a, b) in back.values().iter().zip(&values) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_are_found_with_multiplicity(roots in prop::collection::vec(polar(1.6), 1..8), doubled in any::<bool>()) {
        // keep roots well away from the unit circle so that the count is unambiguous
        prop_assume!(roots.iter().all(|r| (r.norm() - 1.0).abs() > 0.02));
        let mut all = roots.clone();
        if doubled {
            all.push(roots[0]);
        }
        let p = all.iter().fold(vec![Complex64::new(1.0, 0.0)], |acc, r| poly::mul(&acc, &[-r, Complex64::new(1.0, 0.0)]));
        let found = roots_in_disc(&p, 1.0, RootOptions::default()).unwrap();
        let inside = all.iter().filter(|r| r.norm() < 1.0).count();
        let total: usize = found.iter().filter(|r| r.z.norm() < 1.0).map(|r| r.multiplicity).sum();
        prop_assert_eq!(total, inside);
        for r in found.iter().filter(|r| r.z.norm() < 1.0) {
            prop_assert!(all.iter().any(|t| (t - r.z).norm() < 1e-6), "{:?}", r);
        }
    }

    #[test]
    fn product_rule(a in prop::collection::vec(complex(-1.0..1.0), 1..6), b in prop::collection::vec(complex(-1.0..1.0), 1..6), z in polar(1.0)) {
        let lhs = poly::horner(&poly::derivative(&poly::mul(&a, &b)), z);
        let rhs = poly::horner(&poly::derivative(&a), z) * poly::horner(&b, z)
            + poly::horner(&a, z) * poly::horner(&poly::derivative(&b), z);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn boundary_degree_vanishes(big in 0.5f64..2.0, r in 0.5f64..2.0, b in polar(3.5)) {
        prop_assume!((big - r).abs() > 0.2);
        let fam = build_rotating_circles(big, r, 64).unwrap();
        let map = BoundaryMap::new(&fam).unwrap();
        prop_assume!(map.is_regular(b));
        prop_assert_eq!(map.degree(b).unwrap(), 0);
    }

    #[test]
    fn traced_fibers_stay_on_level(b in complex(-0.5..3.5)) {
        let fam = build_translated_circles(1.0, &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)], 64).unwrap();
        let map = BoundaryMap::new(&fam).unwrap();
        prop_assume!(map.is_regular(b) && map.end_distance(b) > 0.05);
        for f in map.trace(b).unwrap() {
            prop_assert!(f.defect(&fam) < 1e-8);
        }
    }

    #[test]
    fn holomorphic_polynomials_give_vanishing_j(coeffs in prop::collection::vec(complex(-1.0..1.0), 1..4)) {
        let src = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| format!("({} + {}*i)*z^{k}", c.re, c.im))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = BoundaryFunction::from_spec(&FunctionSpec::named(&format!("expr:{src}")), 1).unwrap();
        let fam = build_rotating_circles(2.0, 1.0, 32).unwrap();
        let ext = analyze(&f, &fam).unwrap();
        prop_assert!(ext.extends());
        let jac = compute_j(&ext).unwrap();
        prop_assert!(jac.max_abs() < 1e-8 * jac.term_scale().max(1.0), "{}", jac.max_abs());
    }

    #[test]
    fn configs_round_trip(big in 0.1f64..5.0, r in 0.1f64..5.0, seed in any::<u64>(), half in 4usize..32) {
        let mut cfg = RunConfig::new(
            Task::Homology,
            Some(FamilySpec::RotatingCircles { big, r, resolution: 2 * half }),
            None,
        );
        cfg.seed = seed;
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
