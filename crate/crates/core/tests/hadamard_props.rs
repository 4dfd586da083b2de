mod common;

use common::{parse, rectangles, IDENTITY_CORPUS};
use coordhh::convexity::{check_coordinated_convexity, check_hypothesis};
use coordhh::hadamard::{
    bound_thm21, bound_thm22, bound_thm23, chain, conjugate, holder_coefficient, identity_lhs, identity_rhs,
    verify_bounds, EdgeMeans, BOUND_SLACK, CHAIN_SLACK,
};
use coordhh::{QuadratureSpec, Rectangle, SamplingPlan};
use proptest::prelude::*;

const P_GRID: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 10.0];

#[test]
fn identity_holds_across_corpus() {
    let spec = QuadratureSpec::default();
    for rect in rectangles() {
        for src in IDENTITY_CORPUS {
            let f = parse(src);
            let lhs = identity_lhs(&f, &rect, &spec).unwrap();
            let rhs = identity_rhs(&f, &rect, &spec).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()), "{src} on {rect:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn identity_lhs_closed_form_on_shifted_rectangle() {
    // x^2 y^2 on [-1,2]x[0,3]: corners (0+0+4·0... ) computed by hand:
    // corners: f(-1,0)=0, f(-1,3)=9, f(2,0)=0, f(2,3)=36 -> 45/4
    // mean: (∫x²/3)(∫y²/3) = (3/3)(9/3) = 3
    // A: (1/2)[(1/3)∫x²(0+9) + (1/3)∫y²(1+4)] = (1/2)[9 + 15] = 12
    let rect = Rectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap();
    let spec = QuadratureSpec::default();
    let f = parse("x^2*y^2");
    let expected = 45.0 / 4.0 + 3.0 - 12.0;
    assert!((identity_lhs(&f, &rect, &spec).unwrap() - expected).abs() < 1e-12);
    assert!((identity_rhs(&f, &rect, &spec).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn functional_a_is_twice_edge_mean_across_corpus() {
    let spec = QuadratureSpec::default();
    for rect in rectangles() {
        for src in IDENTITY_CORPUS {
            let m = EdgeMeans::compute(&parse(src), &rect, &spec).unwrap();
            assert!((m.functional_a() - 2.0 * m.average()).abs() <= 1e-12 * (1.0 + m.functional_a().abs()));
        }
    }
}

#[test]
fn chain_holds_for_coordinated_convex_members() {
    let spec = QuadratureSpec::default();
    let plan = SamplingPlan::default();
    let mut convex_count = 0;
    for rect in rectangles() {
        for src in IDENTITY_CORPUS.iter().chain(["x^2+y^2", "exp(x)+y^4", "x^2*y^2+x*y"].iter()) {
            let f = parse(src);
            if !check_coordinated_convexity(&f, &rect, &plan).unwrap().passed {
                continue;
            }
            convex_count += 1;
            let rep = chain(&f, &rect, &spec, CHAIN_SLACK).unwrap();
            assert!(rep.all_hold(), "{src} on {rect:?}: {:?}", rep.values());
        }
    }
    assert!(convex_count >= 10, "only {convex_count} convex members");
}

#[test]
fn affine_functions_make_the_chain_an_equality() {
    let spec = QuadratureSpec::default();
    for rect in rectangles() {
        for src in ["3*x - 2*y + 1", "x", "-y + 7", "0.5*x + 0.25*y"] {
            let v = chain(&parse(src), &rect, &spec, CHAIN_SLACK).unwrap().values();
            for w in v {
                assert!((w - v[0]).abs() <= 1e-10, "{src}: {v:?}");
            }
        }
    }
}

#[test]
fn bounds_hold_whenever_hypothesis_passes() {
    let spec = QuadratureSpec::default();
    let plan = SamplingPlan::with_samples(3000, 11);
    let mut guaranteed = 0;
    for rect in rectangles() {
        for src in IDENTITY_CORPUS {
            let f = parse(src);
            let rep = verify_bounds(&f, &rect, &spec, &P_GRID, &[1.0, 2.0, 4.0], Some(&plan)).unwrap();
            if rep.bound21.guaranteed() {
                guaranteed += 1;
                assert!(rep.bound21.holds, "{src} on {rect:?}: {} > {}", rep.lhs_abs, rep.bound21.value);
            }
            for pair in &rep.pairs {
                if pair.bound22.guaranteed() {
                    assert!(pair.bound22.holds && pair.bound23.holds, "{src} p={}", pair.p);
                }
            }
            for b in &rep.extra_q {
                if b.bound23.guaranteed() {
                    assert!(b.bound23.holds, "{src} q={}", b.q);
                }
            }
            assert!(rep.consistent());
        }
    }
    assert!(guaranteed >= 8, "only {guaranteed} members passed the hypothesis");
}

#[test]
fn hypothesis_verdicts_on_corpus() {
    let plan = SamplingPlan::with_samples(3000, 5);
    let unit = Rectangle::unit();
    let expect = [
        ("x*y", true),
        ("x^2*y^2", true),
        ("exp(x+y)", true),
        ("(x+2*y)^4", true),
        ("sin(x)*sin(y)", false),
    ];
    for (src, passes) in expect {
        let v = check_hypothesis(&parse(src), &unit, 1.0, &plan).unwrap();
        assert_eq!(v.passed, passes, "{src}: {v:?}");
    }
}

#[test]
fn holder_coefficient_lies_strictly_between_quarter_and_one() {
    for p in P_GRID {
        let c = holder_coefficient(p);
        assert!(0.25 < c && c < 1.0, "p={p}: {c}");
        let base = (p + 1.0).powf(2.0 / p);
        assert!(1.0 < base && base < 4.0);
    }
}

#[test]
fn power_mean_bound_beats_holder_bound() {
    let rect = Rectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap();
    for src in IDENTITY_CORPUS {
        let f = parse(src);
        for p in P_GRID {
            let b22 = bound_thm22(&f, &rect, p).unwrap();
            let b23 = bound_thm23(&f, &rect, conjugate(p)).unwrap();
            assert!(b23 < b22, "{src} p={p}: {b23} vs {b22}");
        }
    }
}

#[test]
fn bound23_at_q_one_is_bound21() {
    for rect in rectangles() {
        for src in IDENTITY_CORPUS {
            let f = parse(src);
            assert_eq!(bound_thm23(&f, &rect, 1.0).unwrap(), bound_thm21(&f, &rect).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // with all corner values equal to k, both bounds reduce to their coefficients
    #[test]
    fn bound_coefficients_for_constant_mixed_partial(k in 0.1f64..5.0, p in 1.01f64..20.0, w in 0.1f64..3.0, h in 0.1f64..3.0) {
        let f = parse(&format!("{k:?}*x*y"));
        let rect = Rectangle::new(0.0, w, 0.0, h).unwrap();
        let area = w * h;
        let b21 = bound_thm21(&f, &rect).unwrap();
        let b22 = bound_thm22(&f, &rect, p).unwrap();
        let b23 = bound_thm23(&f, &rect, conjugate(p)).unwrap();
        prop_assert!((b21 - area * k / 16.0).abs() <= 1e-13 * b21);
        prop_assert!((b23 - area * k / 16.0).abs() <= 1e-12 * b23);
        prop_assert!((b22 - area * k / (4.0 * (p + 1.0).powf(2.0 / p))).abs() <= 1e-12 * b22);
        prop_assert!(b23 < b22);
    }

    #[test]
    fn identity_holds_on_random_rectangles(a in -2.0f64..1.0, w in 0.2f64..2.0, c in -1.0f64..1.0, h in 0.2f64..2.0) {
        let rect = Rectangle::new(a, a + w, c, c + h).unwrap();
        let spec = QuadratureSpec::new(16, 16, 8).unwrap();
        let f = parse("exp(x)*cos(y) + x^3*y^2");
        let lhs = identity_lhs(&f, &rect, &spec).unwrap();
        let rhs = identity_rhs(&f, &rect, &spec).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn chain_holds_for_random_convex_quadratics(p in 0.0f64..3.0, q in 0.0f64..3.0, r in -1.0f64..1.0, a in -2.0f64..1.0, w in 0.2f64..2.0) {
        // p x^2 + q y^2 + r x y: slices are convex for p, q >= 0 regardless of r
        let f = parse(&format!("{p:?}*x^2 + {q:?}*y^2 + ({r:?})*x*y"));
        let rect = Rectangle::new(a, a + w, a, a + w).unwrap();
        let rep = chain(&f, &rect, &QuadratureSpec::new(8, 8, 8).unwrap(), CHAIN_SLACK).unwrap();
        prop_assert!(rep.all_hold(), "{:?}", rep.values());
    }
}

#[test]
fn lhs_never_exceeds_bound21_for_bilinear_plus_convex_terms() {
    let spec = QuadratureSpec::default();
    let rect = Rectangle::new(0.0, 2.0, 0.5, 1.5).unwrap();
    let f = parse("x^2*y^2 + x*y");
    let lhs = identity_lhs(&f, &rect, &spec).unwrap().abs();
    assert!(lhs <= bound_thm21(&f, &rect).unwrap() + BOUND_SLACK);
}
