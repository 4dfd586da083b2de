mod common;

use common::parse;
use coordhh::convexity::{
    check_coordinated_convexity, check_coordinated_convexity_fn, check_partial_convexity, hh_chain_1d, Axis, Witness,
};
use coordhh::{Expression, QuadratureSpec, Rectangle, SamplingPlan};
use proptest::prelude::*;
use std::f64::consts::PI;

fn pi_square() -> Rectangle {
    Rectangle::new(0.0, PI, 0.0, PI).unwrap()
}

// re-evaluate a witness from scratch, independent of the checker's bookkeeping
fn replay(f: &Expression, w: &Witness) -> (f64, f64) {
    match *w {
        Witness::Coordinated { t, s, x, y, u, v } => {
            let lhs = f.eval(t * x + (1.0 - t) * y, s * u + (1.0 - s) * v).unwrap();
            let rhs = t * s * f.eval(x, u).unwrap()
                + s * (1.0 - t) * f.eval(y, u).unwrap()
                + t * (1.0 - s) * f.eval(x, v).unwrap()
                + (1.0 - t) * (1.0 - s) * f.eval(y, v).unwrap();
            (lhs, rhs)
        }
        Witness::Slice { axis, fixed, lambda, p, r } => {
            let g = |w: f64| match axis {
                Axis::X => f.eval(w, fixed).unwrap(),
                Axis::Y => f.eval(fixed, w).unwrap(),
            };
            (g(lambda * p + (1.0 - lambda) * r), lambda * g(p) + (1.0 - lambda) * g(r))
        }
    }
}

fn assert_in_rect(w: &Witness, rect: &Rectangle) {
    let inside_x = |v: f64| rect.a() <= v && v <= rect.b();
    let inside_y = |v: f64| rect.c() <= v && v <= rect.d();
    match *w {
        Witness::Coordinated { t, s, x, y, u, v } => {
            assert!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s));
            assert!(inside_x(x) && inside_x(y) && inside_y(u) && inside_y(v), "{w:?}");
        }
        Witness::Slice { axis, fixed, lambda, p, r } => {
            assert!((0.0..=1.0).contains(&lambda));
            match axis {
                Axis::X => assert!(inside_y(fixed) && inside_x(p) && inside_x(r)),
                Axis::Y => assert!(inside_x(fixed) && inside_y(p) && inside_y(r)),
            }
        }
    }
}

#[test]
fn concave_and_sine_sum_produce_verified_counterexamples() {
    let plan = SamplingPlan::default();
    for src in ["-x^2-y^2", "sin(x)+sin(y)"] {
        let f = parse(src);
        let rect = pi_square();
        for verdict in [
            check_coordinated_convexity(&f, &rect, &plan).unwrap(),
            check_partial_convexity(&f, &rect, 9, &plan).unwrap(),
        ] {
            assert!(!verdict.passed, "{src}");
            let c = verdict.counterexample.expect("counterexample");
            assert_in_rect(&c.witness, &rect);
            let (lhs, rhs) = replay(&f, &c.witness);
            assert_eq!(lhs.to_bits(), c.lhs.to_bits());
            assert_eq!(rhs.to_bits(), c.rhs.to_bits());
            assert!(lhs - rhs > plan.tolerance, "{src}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn convex_members_pass_with_ten_thousand_samples() {
    let plan = SamplingPlan::default();
    assert_eq!(plan.n_samples, 10_000);
    for src in ["x^2+y^2", "x*y", "x^2*y^2"] {
        for rect in [Rectangle::unit(), Rectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap()] {
            let v = check_coordinated_convexity(&parse(src), &rect, &plan).unwrap();
            assert!(v.passed, "{src}: {v:?}");
            assert!(v.counterexample.is_none());
            assert_eq!(v.samples_tested, 10_000 + 17 * 17);
        }
    }
}

#[test]
fn same_seed_same_verdict() {
    let f = parse("sin(x)+sin(y)");
    let plan = SamplingPlan::with_samples(2000, 1234);
    let a = check_coordinated_convexity(&f, &pi_square(), &plan).unwrap();
    let b = check_coordinated_convexity(&f, &pi_square(), &plan).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.worst_violation.to_bits(), b.worst_violation.to_bits());
    let other = check_coordinated_convexity(&f, &pi_square(), &SamplingPlan::with_samples(2000, 1235)).unwrap();
    assert_ne!(a.counterexample, other.counterexample);
}

#[test]
fn xy_agrees_with_brute_force_grid_oracle() {
    // xy is bilinear, so both sides factor as (tx + (1-t)y)(su + (1-s)v)
    let rect = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
    let f = parse("x*y");
    let grid: Vec<f64> = (0..=6).map(|k| -1.0 + k as f64 / 3.0).collect();
    let mut min_defect = f64::INFINITY;
    for &x in &grid {
        for &y in &grid {
            for &u in &grid {
                for &v in &grid {
                    for t in [0.25, 0.5, 0.75] {
                        for s in [0.25, 0.5, 0.75] {
                            let lhs = f.eval(t * x + (1.0 - t) * y, s * u + (1.0 - s) * v).unwrap();
                            let rhs = t * s * x * u + s * (1.0 - t) * y * u + t * (1.0 - s) * x * v
                                + (1.0 - t) * (1.0 - s) * y * v;
                            min_defect = min_defect.min(rhs - lhs);
                        }
                    }
                }
            }
        }
    }
    assert!(min_defect.abs() <= 1e-15, "grid oracle found {min_defect}");
    let v = check_coordinated_convexity(&f, &rect, &SamplingPlan::default()).unwrap();
    assert!(v.passed && v.worst_violation.abs() <= 1e-15);
    // xy is not jointly convex: along y = -x it is -x^2
    let diag = check_coordinated_convexity_fn(|x, y| Ok(f.eval(x, -x)? + 0.0 * y), &rect, &SamplingPlan::default()).unwrap();
    assert!(!diag.passed);
}

#[test]
fn one_dimensional_chain_holds_on_slices_of_convex_function() {
    let f = parse("exp(x) + y^2 + x^2*y^2");
    let spec = QuadratureSpec::default();
    for fixed in [0.0, 0.3, 1.0] {
        let c = hh_chain_1d(|x| Ok(f.eval(x, fixed)?), 0.0, 1.0, &spec).unwrap();
        assert_eq!(c.holds(1e-12), (true, true), "{c:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // convex on the plane implies convex along every axis pair
    #[test]
    fn convex_quadratics_are_coordinated_convex(a in 0.0f64..3.0, c in 0.0f64..3.0, frac in -0.99f64..0.99, seed in 0u64..1000) {
        let b = frac * (a * c).sqrt();
        let f = parse(&format!("{a:?}*x^2 + 2*({b:?})*x*y + {c:?}*y^2"));
        let rect = Rectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap();
        let v = check_coordinated_convexity(&f, &rect, &SamplingPlan::with_samples(2000, seed)).unwrap();
        prop_assert!(v.passed, "{:?}", v);
    }

    #[test]
    fn any_reported_counterexample_replays(k in 0.5f64..3.0, seed in 0u64..1000) {
        let f = parse(&format!("-{k:?}*x^2 + y^3"));
        let rect = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let v = check_coordinated_convexity(&f, &rect, &SamplingPlan::with_samples(500, seed)).unwrap();
        prop_assert!(!v.passed);
        let c = v.counterexample.unwrap();
        let (lhs, rhs) = replay(&f, &c.witness);
        prop_assert!(lhs - rhs > 1e-10);
    }
}
