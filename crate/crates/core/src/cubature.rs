//! Corrected-trapezoid cubature with a-priori error certificates.
//!
//! On a tile `T` with edge-pair functional `A` and corner average `C`, the corner/edge
//! identity rearranges to `∬_T f = |T|·(A − C) + |T|·E`, where `|E|` is bounded by
//! `|T|/16` times the corner mean of `|f_xy|` whenever `|f_xy|` is co-ordinated convex on `T`.
//! The estimate drops `E`; the certificate sums the bounds.

use serde::Serialize;

use crate::convexity::{check_hypothesis, SamplingPlan};
use crate::error::{Error, Result};
use crate::expr::{DerivativeMethod, Expression};
use crate::hadamard::{corner_average, functional_a};
use crate::quadrature::{integrate_1d, integrate_2d, CompensatedSum, QuadratureSpec, Rectangle};

/// Samples per tile when the global hypothesis check fails and tiles are checked one by one.
pub const TILE_HYPOTHESIS_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedIntegral {
    pub estimate: f64,
    pub error_bound: f64,
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// True only when `|f_xy|` passed the co-ordinated convexity check on every tile.
    pub hypothesis_checked: bool,
}

/// `area · (A − corner average)` on a single tile, using only 1D edge integrals.
pub fn corrected_tile_estimate(f: &Expression, tile: &Rectangle, spec: &QuadratureSpec) -> Result<f64> {
    Ok(tile.area() * (functional_a(f, tile, spec)? - corner_average(f, tile)?))
}

/// Uniform `m × n` composite rule over `rect`.
///
/// Every interior edge is integrated once and shared by the two tiles that meet there.
/// With `check_hypothesis` set, `|f_xy|` is first checked on the whole rectangle with
/// `plan`; if that fails, each tile is checked with [`TILE_HYPOTHESIS_SAMPLES`] samples.
pub fn composite_integrate(
    f: &Expression,
    rect: &Rectangle,
    m: usize,
    n: usize,
    spec: &QuadratureSpec,
    check_hypothesis_with: Option<&SamplingPlan>,
) -> Result<CertifiedIntegral> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("tile counts must be >= 1, got {m} x {n}")));
    }
    let grid = TileGrid::new(rect, m, n);
    let (w, h) = (rect.width() / m as f64, rect.height() / n as f64);

    // horizontal[j][i]: ∫ f(x, ys[j]) over [xs[i], xs[i+1]]
    let mut horizontal = vec![vec![0.0; m]; n + 1];
    for (j, row) in horizontal.iter_mut().enumerate() {
        let y = grid.ys[j];
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = integrate_1d(|x| Ok(f.eval(x, y)?), grid.xs[i], grid.xs[i + 1], spec)?;
        }
    }
    // vertical[i][j]: ∫ f(xs[i], y) over [ys[j], ys[j+1]]
    let mut vertical = vec![vec![0.0; n]; m + 1];
    for (i, col) in vertical.iter_mut().enumerate() {
        let x = grid.xs[i];
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = integrate_1d(|y| Ok(f.eval(x, y)?), grid.ys[j], grid.ys[j + 1], spec)?;
        }
    }
    let mut values = vec![vec![0.0; n + 1]; m + 1];
    let mut mixed = vec![vec![0.0; n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            values[i][j] = f.eval(grid.xs[i], grid.ys[j])?;
            mixed[i][j] = f
                .mixed_partial(grid.xs[i], grid.ys[j], DerivativeMethod::Dual)?
                .abs();
        }
    }

    let mut estimate = CompensatedSum::new();
    let mut bound = CompensatedSum::new();
    for j in 0..n {
        for i in 0..m {
            let tile = grid.tile(i, j);
            let area = tile.area();
            let a = 0.5 * ((horizontal[j][i] + horizontal[j + 1][i]) / w + (vertical[i][j] + vertical[i + 1][j]) / h);
            let corners = (values[i][j] + values[i][j + 1] + values[i + 1][j] + values[i + 1][j + 1]) / 4.0;
            let corner_fxy = (mixed[i][j] + mixed[i][j + 1] + mixed[i + 1][j] + mixed[i + 1][j + 1]) / 4.0;
            estimate.add(area * (a - corners));
            bound.add(area * area / 16.0 * corner_fxy);
        }
    }

    let hypothesis_checked = match check_hypothesis_with {
        None => false,
        Some(plan) => {
            if check_hypothesis(f, rect, 1.0, plan)?.passed {
                true
            } else {
                let mut all = true;
                'tiles: for j in 0..n {
                    for i in 0..m {
                        let tile_plan = SamplingPlan {
                            n_samples: TILE_HYPOTHESIS_SAMPLES,
                            seed: plan.seed.wrapping_add((j * m + i) as u64),
                            tolerance: plan.tolerance,
                        };
                        if !check_hypothesis(f, &grid.tile(i, j), 1.0, &tile_plan)?.passed {
                            all = false;
                            break 'tiles;
                        }
                    }
                }
                all
            }
        }
    };

    Ok(CertifiedIntegral {
        estimate: estimate.total(),
        error_bound: bound.total(),
        tiles_x: m,
        tiles_y: n,
        hypothesis_checked,
    })
}

/// Breakpoints of a uniform partition.
pub struct TileGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl TileGrid {
    pub fn new(rect: &Rectangle, m: usize, n: usize) -> Self {
        let split = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
            let mut v: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * (i as f64 / k as f64)).collect();
            v[k] = hi;
            v
        };
        Self {
            xs: split(rect.a(), rect.b(), m),
            ys: split(rect.c(), rect.d(), n),
        }
    }

    /// Tile `i` along x, `j` along y.
    pub fn tile(&self, i: usize, j: usize) -> Rectangle {
        Rectangle::new(self.xs[i], self.xs[i + 1], self.ys[j], self.ys[j + 1])
            .expect("partition of a valid rectangle yields valid tiles")
    }
}

/// How `convergence_table` fills the true-error column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    Value(f64),
    /// `integrate_2d` with every panel count multiplied by 4.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub n: usize,
    pub estimate: f64,
    pub error_bound: f64,
    pub true_error: Option<f64>,
}

/// `composite_integrate` at `m = n = 2^k` for `k < levels`.
pub fn convergence_table(
    f: &Expression,
    rect: &Rectangle,
    levels: usize,
    spec: &QuadratureSpec,
    reference: Reference,
) -> Result<Vec<ConvergenceRow>> {
    let reference = match reference {
        Reference::None => None,
        Reference::Value(v) => Some(v),
        Reference::Computed => Some(integrate_2d(f, rect, &spec.refined(4))?),
    };
    (0..levels)
        .map(|k| {
            let tiles = 1usize << k;
            let c = composite_integrate(f, rect, tiles, tiles, spec, None)?;
            Ok(ConvergenceRow {
                m: tiles,
                n: tiles,
                estimate: c.estimate,
                error_bound: c.error_bound,
                true_error: reference.map(|r| (c.estimate - r).abs()),
            })
        })
        .collect()
}
