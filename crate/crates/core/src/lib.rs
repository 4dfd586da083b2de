//! Hermite–Hadamard inequalities for co-ordinated convex functions on a rectangle
//! `[a, b] × [c, d]`.
//!
//! - [`expr`]: parse `f(x, y)` from text, evaluate it, and take exact mixed partials.
//! - [`quadrature`]: composite Gauss–Legendre rules in one and two dimensions.
//! - [`hadamard`]: the five-term chain, the corner/edge/integral identity, and the three
//!   corner-derivative bounds.
//! - [`convexity`]: sampling checks for co-ordinated convexity and the bound hypotheses.
//! - [`cubature`]: composite corrected-trapezoid cubature with error certificates.
//! - [`cli`]: the `coordhh` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convexity;
pub mod cubature;
pub mod error;
pub mod expr;
pub mod hadamard;
pub mod quadrature;

pub use convexity::{ConvexityVerdict, SamplingPlan};
pub use cubature::CertifiedIntegral;
pub use error::{Error, EvalError, ParseError, Result};
pub use expr::{DerivativeMethod, DualValue, Expression};
pub use hadamard::{BoundReport, ChainReport};
pub use quadrature::{QuadratureSpec, Rectangle};
