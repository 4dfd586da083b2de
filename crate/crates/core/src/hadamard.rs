//! The Hermite–Hadamard chain for co-ordinated convex functions, the corner/edge/integral
//! identity and the three corner-derivative bounds built on it.

use serde::Serialize;

use crate::convexity::{check_hypothesis, ConvexityVerdict, SamplingPlan};
use crate::error::{Error, Result};
use crate::expr::{DerivativeMethod, Expression};
use crate::quadrature::{integrate_1d, integrate_2d, kernel_integral, QuadratureSpec, Rectangle};

/// Default relative slack for inequality verdicts between quadrature-derived values.
pub const CHAIN_SLACK: f64 = 1e-9;
/// Absolute slack for `lhs <= bound` verdicts.
pub const BOUND_SLACK: f64 = 1e-10;

/// Means of `f` along the four edges of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeMeans {
    /// `1/(b-a) ∫ f(x, c) dx`
    pub bottom: f64,
    /// `1/(b-a) ∫ f(x, d) dx`
    pub top: f64,
    /// `1/(d-c) ∫ f(a, y) dy`
    pub left: f64,
    /// `1/(d-c) ∫ f(b, y) dy`
    pub right: f64,
}

impl EdgeMeans {
    pub fn compute(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<Self> {
        let horizontal = |y: f64| {
            integrate_1d(|x| Ok(f.eval(x, y)?), rect.a(), rect.b(), spec).map(|v| v / rect.width())
        };
        let vertical = |x: f64| {
            integrate_1d(|y| Ok(f.eval(x, y)?), rect.c(), rect.d(), spec).map(|v| v / rect.height())
        };
        Ok(Self {
            bottom: horizontal(rect.c())?,
            top: horizontal(rect.d())?,
            left: vertical(rect.a())?,
            right: vertical(rect.b())?,
        })
    }

    /// Quarter-sum of the four edge means.
    pub fn average(&self) -> f64 {
        (self.bottom + self.top + self.left + self.right) / 4.0
    }

    /// Half the sum of the horizontal-pair mean and the vertical-pair mean.
    pub fn functional_a(&self) -> f64 {
        0.5 * ((self.bottom + self.top) + (self.left + self.right))
    }
}

pub fn corner_average(f: &Expression, rect: &Rectangle) -> Result<f64> {
    let mut sum = 0.0;
    for (x, y) in rect.corners() {
        sum += f.eval(x, y)?;
    }
    Ok(sum / 4.0)
}

pub fn center_value(f: &Expression, rect: &Rectangle) -> Result<f64> {
    let (x, y) = rect.center();
    Ok(f.eval(x, y)?)
}

/// Average of the means along the two midlines of the rectangle.
pub fn midline_term(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    let (mx, my) = rect.center();
    let along_x = integrate_1d(|x| Ok(f.eval(x, my)?), rect.a(), rect.b(), spec)? / rect.width();
    let along_y = integrate_1d(|y| Ok(f.eval(mx, y)?), rect.c(), rect.d(), spec)? / rect.height();
    Ok(0.5 * (along_x + along_y))
}

pub fn integral_mean(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_2d(f, rect, spec)? / rect.area())
}

pub fn edge_mean_term(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    Ok(EdgeMeans::compute(f, rect, spec)?.average())
}

pub fn functional_a(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    Ok(EdgeMeans::compute(f, rect, spec)?.functional_a())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// The five nested chain values and the verdicts on the four links between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// `f` at the center.
    pub center: f64,
    /// Average of the two midline means.
    pub midline: f64,
    /// Mean of `f` over the rectangle.
    pub integral_mean: f64,
    /// Average of the four edge means.
    pub edge_mean: f64,
    /// Average of the four corner values.
    pub corner: f64,
    pub slack: f64,
    pub links: [Link; 4],
}

impl ChainReport {
    pub fn values(&self) -> [f64; 5] {
        [
            self.center,
            self.midline,
            self.integral_mean,
            self.edge_mean,
            self.corner,
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }
}

/// Evaluate the five chain terms and check `L1 <= L2 <= L3 <= L4 <= L5`, each link with
/// tolerance `slack * (1 + |L5|)`.
pub fn chain(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec, slack: f64) -> Result<ChainReport> {
    let values = [
        center_value(f, rect)?,
        midline_term(f, rect, spec)?,
        integral_mean(f, rect, spec)?,
        edge_mean_term(f, rect, spec)?,
        corner_average(f, rect)?,
    ];
    let tol = slack * (1.0 + values[4].abs());
    let links = std::array::from_fn(|i| Link {
        lower: values[i],
        upper: values[i + 1],
        holds: values[i] <= values[i + 1] + tol,
    });
    Ok(ChainReport {
        center: values[0],
        midline: values[1],
        integral_mean: values[2],
        edge_mean: values[3],
        corner: values[4],
        slack,
        links,
    })
}

/// Signed left side of the identity: corner average + integral mean − A.
pub fn identity_lhs(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    let a = functional_a(f, rect, spec)?;
    Ok(corner_average(f, rect)? + integral_mean(f, rect, spec)? - a)
}

/// Right side of the identity: `area/4` times the kernel-weighted mixed-partial integral.
pub fn identity_rhs(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    Ok(rect.area() / 4.0 * kernel_integral(f, rect, spec)?)
}

/// `|f_xy|` at the corners `(a,c), (a,d), (b,c), (b,d)`.
pub fn corner_derivatives(f: &Expression, rect: &Rectangle) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (slot, (x, y)) in out.iter_mut().zip(rect.corners()) {
        *slot = f.mixed_partial(x, y, DerivativeMethod::Dual)?.abs();
    }
    Ok(out)
}

/// `((Σ v_i^q) / 4)^(1/q)` over the four corner values.
pub fn corner_power_mean(values: &[f64; 4], q: f64) -> f64 {
    if q == 1.0 {
        return values.iter().sum::<f64>() / 4.0;
    }
    let sum: f64 = values.iter().map(|v| v.powf(q)).sum();
    (sum / 4.0).powf(1.0 / q)
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Coefficient `1 / (p+1)^(2/p)` relating the Hölder bound to the plain `area/4` scale.
pub fn holder_coefficient(p: f64) -> f64 {
    1.0 / (p + 1.0).powf(2.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be a finite number > 1, got {p}")));
    }
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be a finite number >= 1, got {q}")));
    }
    Ok(())
}

pub fn bound21_from_corners(rect: &Rectangle, corners: &[f64; 4]) -> f64 {
    rect.area() / 16.0 * corner_power_mean(corners, 1.0)
}

pub fn bound22_from_corners(rect: &Rectangle, corners: &[f64; 4], p: f64) -> Result<f64> {
    check_p(p)?;
    let q = conjugate(p);
    Ok(rect.area() / 4.0 * holder_coefficient(p) * corner_power_mean(corners, q))
}

pub fn bound23_from_corners(rect: &Rectangle, corners: &[f64; 4], q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(rect.area() / 16.0 * corner_power_mean(corners, q))
}

/// `area/16` times the corner mean of `|f_xy|`.
pub fn bound_thm21(f: &Expression, rect: &Rectangle) -> Result<f64> {
    Ok(bound21_from_corners(rect, &corner_derivatives(f, rect)?))
}

/// Hölder form: `area / (4 (p+1)^(2/p))` times the corner `q`-mean of `|f_xy|`, `q = p/(p-1)`.
pub fn bound_thm22(f: &Expression, rect: &Rectangle, p: f64) -> Result<f64> {
    check_p(p)?;
    bound22_from_corners(rect, &corner_derivatives(f, rect)?, p)
}

/// Power-mean form: `area/16` times the corner `q`-mean of `|f_xy|`.
pub fn bound_thm23(f: &Expression, rect: &Rectangle, q: f64) -> Result<f64> {
    check_q(q)?;
    bound23_from_corners(rect, &corner_derivatives(f, rect)?, q)
}

/// Outcome of one convexity hypothesis check attached to a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub q: f64,
    pub verdict: ConvexityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    /// `lhs_abs <= value + BOUND_SLACK`.
    pub holds: bool,
    /// `Some(true)` when `|f_xy|^q` passed the co-ordinated convexity check,
    /// `None` when no check was requested.
    pub hypothesis_passed: Option<bool>,
}

impl BoundCheck {
    pub fn guaranteed(&self) -> bool {
        self.hypothesis_passed == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderPair {
    pub p: f64,
    pub q: f64,
    pub bound22: BoundCheck,
    pub bound23: BoundCheck,
    /// `bound23(q) <= bound22(p)`.
    pub ordering_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerMeanBound {
    pub q: f64,
    pub bound23: BoundCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub identity_lhs: f64,
    pub lhs_abs: f64,
    pub corner_derivatives: [f64; 4],
    pub bound21: BoundCheck,
    pub pairs: Vec<HolderPair>,
    pub extra_q: Vec<PowerMeanBound>,
}

impl BoundReport {
    /// Every bound whose hypothesis was verified actually holds, and every Hölder pair
    /// is ordered.
    pub fn consistent(&self) -> bool {
        let all = std::iter::once(&self.bound21)
            .chain(self.pairs.iter().flat_map(|p| [&p.bound22, &p.bound23]))
            .chain(self.extra_q.iter().map(|b| &b.bound23));
        let mut ok = true;
        for b in all {
            if b.guaranteed() && !b.holds {
                ok = false;
            }
        }
        ok && self.pairs.iter().all(|p| p.ordering_holds)
    }
}

/// Compute `|identity_lhs|` and all three bounds.
///
/// For each `p` the Hölder bound and the power-mean bound at the conjugate `q` are paired
/// and their ordering checked. `q_list` adds standalone power-mean bounds. With a sampling
/// plan, `|f_xy|^q` is checked for co-ordinated convexity for every `q` used; failures mark
/// the affected bounds as unguaranteed but never suppress them.
pub fn verify_bounds(
    f: &Expression,
    rect: &Rectangle,
    spec: &QuadratureSpec,
    p_list: &[f64],
    q_list: &[f64],
    hypothesis: Option<&SamplingPlan>,
) -> Result<BoundReport> {
    p_list.iter().try_for_each(|&p| check_p(p))?;
    q_list.iter().try_for_each(|&q| check_q(q))?;

    let lhs = identity_lhs(f, rect, spec)?;
    let lhs_abs = lhs.abs();
    let corners = corner_derivatives(f, rect)?;

    let mut hypothesis_cache: Vec<(f64, bool)> = Vec::new();
    let mut hyp = |q: f64| -> Result<Option<bool>> {
        let Some(plan) = hypothesis else {
            return Ok(None);
        };
        if let Some(&(_, passed)) = hypothesis_cache.iter().find(|(cq, _)| *cq == q) {
            return Ok(Some(passed));
        }
        let passed = check_hypothesis(f, rect, q, plan)?.passed;
        hypothesis_cache.push((q, passed));
        Ok(Some(passed))
    };
    let check = |value: f64, hypothesis_passed: Option<bool>| BoundCheck {
        value,
        holds: lhs_abs <= value + BOUND_SLACK,
        hypothesis_passed,
    };

    let bound21 = check(bound21_from_corners(rect, &corners), hyp(1.0)?);
    let mut pairs = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let q = conjugate(p);
        let h = hyp(q)?;
        let b22 = bound22_from_corners(rect, &corners, p)?;
        let b23 = bound23_from_corners(rect, &corners, q)?;
        pairs.push(HolderPair {
            p,
            q,
            bound22: check(b22, h),
            bound23: check(b23, h),
            ordering_holds: b23 <= b22,
        });
    }
    let mut extra_q = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let h = hyp(q)?;
        extra_q.push(PowerMeanBound {
            q,
            bound23: check(bound23_from_corners(rect, &corners, q)?, h),
        });
    }
    Ok(BoundReport {
        identity_lhs: lhs,
        lhs_abs,
        corner_derivatives: corners,
        bound21,
        pairs,
        extra_q,
    })
}
