//! Sampling checks for co-ordinated convexity, convexity of the partial mappings, the
//! `|f_xy|^q` hypotheses of the bounds, and the one-dimensional Hermite–Hadamard chain.
//!
//! A passing verdict means no violation was found among the samples, not a proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{DerivativeMethod, Expression};
use crate::quadrature::{integrate_1d, QuadratureSpec, Rectangle};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Side of the deterministic midpoint lattice added to every co-ordinated check.
pub const LATTICE_SIDE: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub n_samples: usize,
    pub seed: u64,
    /// Absolute tolerance on `lhs - rhs`.
    pub tolerance: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl SamplingPlan {
    pub fn with_samples(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be >= 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Slice `u ↦ f(u, fixed)`.
    X,
    /// Slice `v ↦ f(fixed, v)`.
    Y,
}

/// The sample that produced a violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f(tx + (1-t)y, su + (1-s)v)` against
    /// `ts f(x,u) + s(1-t) f(y,u) + t(1-s) f(x,v) + (1-t)(1-s) f(y,v)`,
    /// with `x, y` first coordinates and `u, v` second coordinates.
    Coordinated {
        t: f64,
        s: f64,
        x: f64,
        y: f64,
        u: f64,
        v: f64,
    },
    /// `g(λ p + (1-λ) r)` against `λ g(p) + (1-λ) g(r)` on one slice.
    Slice {
        axis: Axis,
        fixed: f64,
        lambda: f64,
        p: f64,
        r: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub witness: Witness,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub passed: bool,
    pub samples_tested: usize,
    /// Largest `lhs - rhs` seen; negative or within tolerance when passed.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub counterexample: Option<Counterexample>,
}

#[derive(Default)]
struct Worst {
    count: usize,
    worst: Option<Counterexample>,
}

impl Worst {
    fn record(&mut self, c: Counterexample) {
        self.count += 1;
        let better = match &self.worst {
            None => true,
            Some(w) => c.lhs - c.rhs > w.lhs - w.rhs,
        };
        if better {
            self.worst = Some(c);
        }
    }

    fn verdict(self, tolerance: f64) -> ConvexityVerdict {
        let worst = self.worst.expect("at least one sample");
        let violation = worst.lhs - worst.rhs;
        let passed = violation <= tolerance;
        ConvexityVerdict {
            passed,
            samples_tested: self.count,
            worst_violation: violation,
            tolerance,
            counterexample: (!passed).then_some(worst),
        }
    }
}

fn coordinated_sample<G>(g: &mut G, t: f64, s: f64, x: f64, y: f64, u: f64, v: f64) -> Result<Counterexample>
where
    G: FnMut(f64, f64) -> Result<f64>,
{
    let lhs = g(t * x + (1.0 - t) * y, s * u + (1.0 - s) * v)?;
    let rhs = t * s * g(x, u)?
        + s * (1.0 - t) * g(y, u)?
        + t * (1.0 - s) * g(x, v)?
        + (1.0 - t) * (1.0 - s) * g(y, v)?;
    Ok(Counterexample {
        witness: Witness::Coordinated { t, s, x, y, u, v },
        lhs,
        rhs,
    })
}

/// Co-ordinated convexity check for an arbitrary field on the rectangle.
///
/// Draws `n_samples` uniform tuples `(t, s) ∈ [0,1]²`, `x, y ∈ [a,b]`, `u, v ∈ [c,d]`, then
/// adds a `17 × 17` lattice of midpoint (`t = s = 1/2`) tests.
pub fn check_coordinated_convexity_fn<G>(mut g: G, rect: &Rectangle, plan: &SamplingPlan) -> Result<ConvexityVerdict>
where
    G: FnMut(f64, f64) -> Result<f64>,
{
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut worst = Worst::default();
    for _ in 0..plan.n_samples {
        let t: f64 = rng.gen();
        let s: f64 = rng.gen();
        let x = rng.gen_range(rect.a()..=rect.b());
        let y = rng.gen_range(rect.a()..=rect.b());
        let u = rng.gen_range(rect.c()..=rect.d());
        let v = rng.gen_range(rect.c()..=rect.d());
        worst.record(coordinated_sample(&mut g, t, s, x, y, u, v)?);
    }

    let n = LATTICE_SIDE - 1;
    let node = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * (k as f64 / n as f64);
    for i in 0..LATTICE_SIDE {
        for j in 0..LATTICE_SIDE {
            // pair every lattice line with the one half a lattice away
            let i2 = (i + LATTICE_SIDE / 2) % LATTICE_SIDE;
            let j2 = (j + LATTICE_SIDE / 2) % LATTICE_SIDE;
            worst.record(coordinated_sample(
                &mut g,
                0.5,
                0.5,
                node(rect.a(), rect.b(), i),
                node(rect.a(), rect.b(), i2),
                node(rect.c(), rect.d(), j),
                node(rect.c(), rect.d(), j2),
            )?);
        }
    }
    Ok(worst.verdict(plan.tolerance))
}

pub fn check_coordinated_convexity(f: &Expression, rect: &Rectangle, plan: &SamplingPlan) -> Result<ConvexityVerdict> {
    check_coordinated_convexity_fn(|x, y| Ok(f.eval(x, y)?), rect, plan)
}

/// Secant tests on `n_lines` evenly spaced slices in each direction, `n_samples` per slice.
pub fn check_partial_convexity(
    f: &Expression,
    rect: &Rectangle,
    n_lines: usize,
    plan: &SamplingPlan,
) -> Result<ConvexityVerdict> {
    plan.validate()?;
    if n_lines == 0 {
        return Err(Error::InvalidArgument("n_lines must be >= 1".into()));
    }
    let lines = |lo: f64, hi: f64| -> Vec<f64> {
        if n_lines == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n_lines)
                .map(|k| lo + (hi - lo) * (k as f64 / (n_lines - 1) as f64))
                .collect()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut worst = Worst::default();
    for (axis, fixed_values, lo, hi) in [
        (Axis::X, lines(rect.c(), rect.d()), rect.a(), rect.b()),
        (Axis::Y, lines(rect.a(), rect.b()), rect.c(), rect.d()),
    ] {
        for fixed in fixed_values {
            let g = |w: f64| match axis {
                Axis::X => f.eval(w, fixed),
                Axis::Y => f.eval(fixed, w),
            };
            for _ in 0..plan.n_samples {
                let p = rng.gen_range(lo..=hi);
                let r = rng.gen_range(lo..=hi);
                let lambda: f64 = rng.gen();
                let lhs = g(lambda * p + (1.0 - lambda) * r)?;
                let rhs = lambda * g(p)? + (1.0 - lambda) * g(r)?;
                worst.record(Counterexample {
                    witness: Witness::Slice { axis, fixed, lambda, p, r },
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(worst.verdict(plan.tolerance))
}

/// Co-ordinated convexity of `|f_xy|^q`, with `f_xy` from dual numbers.
pub fn check_hypothesis(f: &Expression, rect: &Rectangle, q: f64, plan: &SamplingPlan) -> Result<ConvexityVerdict> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be a finite number >= 1, got {q}")));
    }
    check_coordinated_convexity_fn(
        |x, y| {
            let d = f.mixed_partial(x, y, DerivativeMethod::Dual)?.abs();
            Ok(if q == 1.0 { d } else { d.powf(q) })
        },
        rect,
        plan,
    )
}

/// Terms of the one-dimensional chain `g(mid) <= mean(g) <= (g(lo) + g(hi))/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HhChain1d {
    pub left: f64,
    pub mid: f64,
    pub right: f64,
}

impl HhChain1d {
    /// Verdicts on the two links with tolerance `slack * (1 + |right|)`.
    pub fn holds(&self, slack: f64) -> (bool, bool) {
        let tol = slack * (1.0 + self.right.abs());
        (self.left <= self.mid + tol, self.mid <= self.right + tol)
    }
}

pub fn hh_chain_1d<G>(mut g: G, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<HhChain1d>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mid = integrate_1d(&mut g, lo, hi, spec)? / (hi - lo);
    Ok(HhChain1d {
        left: g(0.5 * (lo + hi))?,
        mid,
        right: 0.5 * (g(lo)? + g(hi)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Expression {
        Expression::parse(s).unwrap()
    }

    #[test]
    fn convex_and_bilinear_functions_pass() {
        let plan = SamplingPlan::default();
        let unit = Rectangle::unit();
        for f in ["x^2+y^2", "x*y", "x^2*y^2"] {
            let v = check_coordinated_convexity(&parse(f), &unit, &plan).unwrap();
            assert!(v.passed, "{f}: {v:?}");
            assert!(v.counterexample.is_none());
            assert_eq!(v.samples_tested, plan.n_samples + LATTICE_SIDE * LATTICE_SIDE);
        }
    }

    #[test]
    fn concave_function_fails_with_counterexample() {
        let v = check_coordinated_convexity(&parse("-x^2-y^2"), &Rectangle::unit(), &SamplingPlan::default()).unwrap();
        assert!(!v.passed);
        let c = v.counterexample.unwrap();
        assert!(c.lhs - c.rhs > DEFAULT_TOLERANCE);
        assert!(matches!(c.witness, Witness::Coordinated { .. }));
    }

    #[test]
    fn partial_convexity_examples() {
        let plan = SamplingPlan::with_samples(500, 7);
        let unit = Rectangle::unit();
        assert!(check_partial_convexity(&parse("x*y"), &unit, 9, &plan).unwrap().passed);
        assert!(check_partial_convexity(&parse("x^2*y^2"), &unit, 9, &plan).unwrap().passed);
        let pi = std::f64::consts::PI;
        let sq = Rectangle::new(0.0, pi, 0.0, pi).unwrap();
        let v = check_partial_convexity(&parse("sin(x)+sin(y)"), &sq, 9, &plan).unwrap();
        assert!(!v.passed);
        assert!(matches!(v.counterexample.unwrap().witness, Witness::Slice { .. }));
    }

    #[test]
    fn hypothesis_examples() {
        let plan = SamplingPlan::with_samples(2000, 1);
        let unit = Rectangle::unit();
        assert!(check_hypothesis(&parse("x*y"), &unit, 3.0, &plan).unwrap().passed);
        assert!(check_hypothesis(&parse("x^2*y^2"), &unit, 1.0, &plan).unwrap().passed);
        assert!(check_hypothesis(&parse("x^2*y^2"), &unit, 2.0, &plan).unwrap().passed);
        // |cos x cos y| is concave in each coordinate on the unit square
        assert!(!check_hypothesis(&parse("sin(x)*sin(y)"), &unit, 1.0, &plan).unwrap().passed);
        assert!(check_hypothesis(&parse("x*y"), &unit, 0.5, &plan).is_err());
    }

    #[test]
    fn rejects_empty_plans() {
        let f = parse("x");
        let unit = Rectangle::unit();
        assert!(check_coordinated_convexity(&f, &unit, &SamplingPlan::with_samples(0, 1)).is_err());
        assert!(check_partial_convexity(&f, &unit, 0, &SamplingPlan::default()).is_err());
    }

    #[test]
    fn evaluation_errors_abort_the_check() {
        let r = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let err = check_coordinated_convexity(&parse("log(x)"), &r, &SamplingPlan::default()).unwrap_err();
        assert!(matches!(err, Error::Eval(_)));
    }

    #[test]
    fn chain_1d_examples() {
        let spec = QuadratureSpec::default();
        let c = hh_chain_1d(|x| Ok(x * x), 0.0, 1.0, &spec).unwrap();
        assert_eq!(c.left, 0.25);
        assert!((c.mid - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.right, 0.5);
        assert_eq!(c.holds(1e-9), (true, true));

        let c = hh_chain_1d(|x| Ok(3.0 * x - 1.0), -2.0, 5.0, &spec).unwrap();
        assert!((c.left - c.mid).abs() < 1e-13 && (c.mid - c.right).abs() < 1e-13);

        let e = std::f64::consts::E;
        let c = hh_chain_1d(|x| Ok(x.exp()), 0.0, 1.0, &spec).unwrap();
        assert!((c.left - 0.5f64.exp()).abs() < 1e-15);
        assert!((c.mid - (e - 1.0)).abs() < 1e-13);
        assert!((c.right - (1.0 + e) / 2.0).abs() < 1e-15);
        assert_eq!(c.holds(1e-9), (true, true));

        let c = hh_chain_1d(|x| Ok(-x * x), 0.0, 1.0, &spec).unwrap();
        assert_eq!(c.holds(1e-9), (false, false));
    }
}
