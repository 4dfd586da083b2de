//! Composite Gauss–Legendre integration in one and two dimensions.
//!
//! All sums use Neumaier compensated accumulation in a fixed order, so identical inputs
//! give bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{DerivativeMethod, Expression};

/// The domain `[a, b] × [c, d]` with `a < b` and `c < d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Rectangle {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rectangle bounds must be finite, got [{a}, {b}] x [{c}, {d}]"
            )));
        }
        if !(a < b && c < d) {
            return Err(Error::InvalidArgument(format!(
                "rectangle requires a < b and c < d, got [{a}, {b}] x [{c}, {d}]"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0, c: 0.0, d: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.a + self.b) / 2.0, (self.c + self.d) / 2.0)
    }

    /// Corners in the order `(a,c), (a,d), (b,c), (b,d)`.
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.c),
            (self.a, self.d),
            (self.b, self.c),
            (self.b, self.d),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub panels_1d: usize,
    pub panels_2d_per_axis: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            panels_1d: 64,
            panels_2d_per_axis: 64,
            nodes_per_panel: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn new(panels_1d: usize, panels_2d_per_axis: usize, nodes_per_panel: usize) -> Result<Self> {
        let spec = Self {
            panels_1d,
            panels_2d_per_axis,
            nodes_per_panel,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels_1d == 0 || self.panels_2d_per_axis == 0 || self.nodes_per_panel == 0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature counts must be >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Same rule with every panel count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            panels_1d: self.panels_1d * factor,
            panels_2d_per_axis: self.panels_2d_per_axis * factor,
            nodes_per_panel: self.nodes_per_panel,
        }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Newton on P_n from the Tricomi initial guess
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let step = p / d;
                z -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&z, &w)| (mid + half * z, half * w))
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Abscissae `lo + (hi - lo) * k / panels` for `k = 0..=panels`, with exact endpoints.
fn breakpoints(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=panels)
        .map(|k| lo + (hi - lo) * (k as f64 / panels as f64))
        .collect();
    pts[panels] = hi;
    pts
}

/// Composite Gauss–Legendre estimate of `∫_lo^hi g`.
pub fn integrate_1d<G>(mut g: G, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "integration interval requires lo < hi, got [{lo}, {hi}]"
        )));
    }
    let rule = GaussLegendre::new(spec.nodes_per_panel);
    let edges = breakpoints(lo, hi, spec.panels_1d);
    let mut total = CompensatedSum::new();
    for w in edges.windows(2) {
        let mut panel = CompensatedSum::new();
        for (t, wt) in rule.mapped(w[0], w[1]) {
            panel.add(wt * g(t)?);
        }
        total.add(panel.total());
    }
    Ok(total.total())
}

/// Tensor-product composite rule for `∬ g` over the rectangle given by two breakpoint lists.
fn tensor_rule<G>(mut g: G, xs: &[f64], ys: &[f64], rule: &GaussLegendre) -> Result<f64>
where
    G: FnMut(f64, f64) -> Result<f64>,
{
    let mut total = CompensatedSum::new();
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let mut panel = CompensatedSum::new();
            for (x, ax) in rule.mapped(wx[0], wx[1]) {
                for (y, ay) in rule.mapped(wy[0], wy[1]) {
                    panel.add(ax * ay * g(x, y)?);
                }
            }
            total.add(panel.total());
        }
    }
    Ok(total.total())
}

/// `∬_rect g(x, y) dy dx` for an arbitrary integrand.
pub fn integrate_2d_fn<G>(g: G, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64>
where
    G: FnMut(f64, f64) -> Result<f64>,
{
    spec.validate()?;
    let rule = GaussLegendre::new(spec.nodes_per_panel);
    let xs = breakpoints(rect.a, rect.b, spec.panels_2d_per_axis);
    let ys = breakpoints(rect.c, rect.d, spec.panels_2d_per_axis);
    tensor_rule(g, &xs, &ys, &rule)
}

pub fn integrate_2d(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    integrate_2d_fn(|x, y| Ok(f.eval(x, y)?), rect, spec)
}

/// Breakpoints on `[0, 1]` with `1/2` always among them.
fn split_at_half(panels: usize) -> Vec<f64> {
    let per_half = panels.div_ceil(2).max(1);
    let mut pts = breakpoints(0.0, 0.5, per_half);
    pts.extend(breakpoints(0.5, 1.0, per_half).into_iter().skip(1));
    pts
}

/// `∫₀¹∫₀¹ (1-2t)(1-2s) f_xy(ta + (1-t)b, sc + (1-s)d) dt ds`, with `f_xy` the mixed
/// partial in the spatial coordinates taken by dual numbers.
///
/// Panels are split at `t = 1/2` and `s = 1/2` where the kernel changes sign.
pub fn kernel_integral(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let rule = GaussLegendre::new(spec.nodes_per_panel);
    let ts = split_at_half(spec.panels_2d_per_axis);
    let (a, b, c, d) = (rect.a, rect.b, rect.c, rect.d);
    tensor_rule(
        |t, s| {
            let x = t * a + (1.0 - t) * b;
            let y = s * c + (1.0 - s) * d;
            let fxy = f.mixed_partial(x, y, DerivativeMethod::Dual)?;
            Ok((1.0 - 2.0 * t) * (1.0 - 2.0 * s) * fxy)
        },
        &ts,
        &ts,
        &rule,
    )
}
