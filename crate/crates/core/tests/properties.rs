use gauss_extremal::hilbert::{offdiag_form, PointConfiguration};
use gauss_extremal::lpinterp::{required_truncation, ExtremalEvaluator};
use gauss_extremal::periodic::{gaussian_periodic_extremal, theta3, EvenCircleMeasure, TrigPolynomial};
use gauss_extremal::specfun::HomogeneousParameter;
use gauss_extremal::subordination::SubordinationMeasure;
use gauss_extremal::Side;
use num_complex::Complex64;
use proptest::prelude::*;

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Minus), Just(Side::Plus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_is_even_and_periodic(x in -3.0f64..3.0, lambda in 0.05f64..20.0) {
        let v = theta3(x, lambda).unwrap();
        prop_assert!((v - theta3(-x, lambda).unwrap()).abs() <= 1e-13 * v);
        prop_assert!((v - theta3(x + 1.0, lambda).unwrap()).abs() <= 1e-13 * v);
        prop_assert!(v > 0.0);
    }

    #[test]
    fn extremal_functions_are_one_sided(
        nu in -0.9f64..2.0,
        lambda in 0.1f64..10.0,
        side in side(),
        xs in proptest::collection::vec(-15.0f64..15.0, 40),
    ) {
        let p = HomogeneousParameter::new(nu).unwrap();
        let e = ExtremalEvaluator::with_truncation(&p, lambda, side, required_truncation(nu)).unwrap();
        let sign = if side == Side::Minus { 1.0 } else { -1.0 };
        for x in xs {
            prop_assert!(sign * (e.gaussian(x) - e.eval(x)) >= -1e-12, "x={}", x);
            prop_assert_eq!(e.eval(x), e.eval(-x));
        }
    }

    #[test]
    fn periodic_extremals_are_one_sided(n in 0usize..7, lambda in 0.1f64..8.0, side in side(), tilt in 0.0f64..0.45) {
        let m = EvenCircleMeasure::from_density(move |x| 1.0 + tilt * (2.0 * std::f64::consts::PI * x).cos()).unwrap();
        let r = gaussian_periodic_extremal(&m, n, lambda, side).unwrap();
        prop_assert!(r.min_slack >= -1e-10);
        prop_assert!(r.kept_residual < 1e-10);
        prop_assert!((r.integral - r.value_formula).abs() < 1e-9);
        for k in (n as i64 + 1)..(n as i64 + 4) {
            prop_assert_eq!(r.poly.coefficient(k), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn trig_polynomial_coefficients_are_hermitian(c in proptest::collection::vec(-2.0f64..2.0, 1..6), c0 in -1.0f64..1.0) {
        let s: Vec<f64> = c.iter().map(|v| 0.5 * v - 0.1).collect();
        let p = TrigPolynomial::from_cos_sin(c0, &c, &s);
        for k in 1..=c.len() as i64 {
            prop_assert_eq!(p.coefficient(-k), p.coefficient(k).conj());
        }
        let x = 0.3;
        let direct: f64 = c0 + c.iter().zip(&s).enumerate().map(|(i, (a, b))| {
            let t = 2.0 * std::f64::consts::PI * (i + 1) as f64 * x;
            a * t.cos() + b * t.sin()
        }).sum::<f64>();
        prop_assert!((p.eval(x) - direct).abs() < 1e-12);
    }

    #[test]
    fn hilbert_form_is_translation_invariant(shift in -50.0f64..50.0, seed in 0u64..1000) {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![1.3 * i as f64 + 0.1 * ((seed + i) % 3) as f64]).collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + shift]).collect();
        let a: Vec<Complex64> = (0..6).map(|i| Complex64::new((i as f64 + seed as f64).sin(), (i as f64).cos())).collect();
        let m = SubordinationMeasure::point_mass(0.6).unwrap();
        let f1 = offdiag_form(&PointConfiguration::new(1, pts, 1.0).unwrap(), &a, &m).unwrap();
        let f2 = offdiag_form(&PointConfiguration::new(1, moved, 1.0).unwrap(), &a, &m).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-12 * f1.abs().max(1.0));
    }
}
