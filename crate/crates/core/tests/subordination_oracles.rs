use gauss_extremal::quad::{Rule, Tolerance};
use gauss_extremal::specfun::{self, HomogeneousParameter, ZeroKind};
use gauss_extremal::subordination::{
    power_target, subordinate_value, RadialFunctionSpec, SubordinatedExtremal, SubordinationMeasure,
};
use gauss_extremal::{quad, Side};
use std::f64::consts::PI;

fn power_minorant() -> SubordinatedExtremal {
    let p = HomogeneousParameter::new(-0.5).unwrap();
    let m = SubordinationMeasure::power(1.0).unwrap();
    let spec = RadialFunctionSpec::for_measure(&m, 1).unwrap();
    SubordinatedExtremal::new(&p, 1, 2.0, &m, spec, Side::Minus).unwrap()
}

#[test]
fn power_value_matches_brute_force_deficit_integral() {
    let p = HomogeneousParameter::new(-0.5).unwrap();
    let m = SubordinationMeasure::power(1.0).unwrap();
    let closed = subordinate_value(&p, 1, 2.0, &m, Side::Minus).unwrap().value;
    let e = power_minorant();
    // ∫_ℝ D(x) dx panel by panel between the zeros π/2 + kπ of A_{−1/2} = cos
    let rule = Rule::new(24);
    let d = |x: f64| e.deficit(x).unwrap_or_else(|err| panic!("x={x}: {err:?}")).value;
    let mut total = quad::adaptive_fn(d, 0.0, 0.5 * PI, Tolerance { rel: 1e-9, ..Default::default() }).unwrap().value;
    let panels = 320;
    let mut last_moments = Vec::new();
    for k in 0..panels {
        let (a, b) = (0.5 * PI + k as f64 * PI, 1.5 * PI + k as f64 * PI);
        let v = rule.integrate(d, a, b);
        total += v;
        if k >= panels - 20 {
            // mean of x²D over the panel
            last_moments.push(v * a * b / PI);
        }
    }
    let x_end = 0.5 * PI + panels as f64 * PI;
    let c = last_moments.iter().sum::<f64>() / last_moments.len() as f64;
    let brute = 2.0 * (total + c / x_end);
    let rel = (brute - closed).abs() / closed;
    assert!(rel < 1e-3, "brute {brute} vs closed {closed} (rel {rel:e})");
}

#[test]
fn power_minorant_is_one_sided_and_interpolates() {
    let e = power_minorant();
    for i in 0..1000 {
        let x = 0.003 + 25.0 * i as f64 / 999.0;
        let pt = e.eval(&[x]).unwrap();
        assert!(pt.value <= power_target(1.0, x).unwrap() + 1e-12, "x={x}");
        assert!(pt.deficit >= 0.0);
    }
    let p = HomogeneousParameter::new(-0.5).unwrap();
    let t = specfun::zeros(&p, ZeroKind::A, 5).unwrap();
    for xi in t.zeros {
        let pt = e.eval(&[xi]).unwrap();
        assert!((pt.value - power_target(1.0, xi).unwrap()).abs() < 1e-6, "xi={xi}: {}", pt.deficit);
    }
}

#[test]
fn exponential_subordination_bounds_shifted_exponential() {
    let p = HomogeneousParameter::new(-0.5).unwrap();
    let m = SubordinationMeasure::exp_subordination(vec![(1.0, 1.0)]).unwrap();
    for side in [Side::Minus, Side::Plus] {
        let spec = RadialFunctionSpec::for_measure(&m, 1).unwrap();
        let e = SubordinatedExtremal::new(&p, 1, 2.0, &m, spec, side).unwrap();
        for i in 0..200 {
            let x = 0.01 + 15.0 * i as f64 / 199.0;
            let pt = e.eval(&[x]).unwrap();
            let target = (-x).exp() - (-1.0f64).exp();
            assert!((pt.target - target).abs() < 1e-9, "target at {x}");
            match side {
                Side::Minus => assert!(pt.value <= target + 1e-10),
                Side::Plus => assert!(pt.value >= target - 1e-10),
            }
        }
    }
}

#[test]
fn point_mass_reduces_to_gaussian_lift() {
    let p = HomogeneousParameter::new(0.0).unwrap();
    let m = SubordinationMeasure::point_mass(0.8).unwrap();
    for side in [Side::Minus, Side::Plus] {
        let spec = RadialFunctionSpec::gaussian_mixture(vec![(0.8, 1.0)], 2);
        let e = SubordinatedExtremal::new(&p, 2, 3.0, &m, spec, side).unwrap();
        for pt in [[0.0, 0.0], [0.4, -1.1], [2.0, 2.5]] {
            let a = e.eval(&pt).unwrap().value;
            let b = gauss_extremal::extremal::multi_eval(&p, 2, 3.0, 0.8, &pt, side).unwrap();
            assert!((a - b).abs() < 1e-13, "{pt:?}: {a} {b}");
        }
    }
}
