//! Two-variable function expressions: parsing, printing, evaluation and mixed partials.

mod dual;
mod lexer;
mod parser;

use std::fmt;
use std::str::FromStr;

pub use dual::DualValue;

use crate::error::{EvalError, EvalErrorKind, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree node. Exponents of `Pow` are variable-free.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn has_variables(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::X | Node::Y => true,
            Node::Neg(a) | Node::Call(_, a) => a.has_variables(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.has_variables() || b.has_variables()
            }
        }
    }

    fn contains_abs(&self) -> bool {
        match self {
            Node::Num(_) | Node::X | Node::Y => false,
            Node::Call(Func::Abs, _) => true,
            Node::Neg(a) | Node::Call(_, a) => a.contains_abs(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.contains_abs() || b.contains_abs()
            }
        }
    }

    // binding strength of the node as printed: sum 1, product 2, negation 3, power 4, atom 5
    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            Node::Num(_) | Node::X | Node::Y | Node::Call(..) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, required: u8) -> fmt::Result {
        if self.precedence() < required {
            f.write_str("(")?;
            self.write_bare(f)?;
            f.write_str(")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node, lp: u8, rp: u8| {
            a.write_at(f, lp)?;
            f.write_str(op)?;
            b.write_at(f, rp)
        };
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::X => f.write_str("x"),
            Node::Y => f.write_str("y"),
            Node::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 4)
            }
            Node::Add(a, b) => binary(f, a, " + ", b, 1, 2),
            Node::Sub(a, b) => binary(f, a, " - ", b, 1, 2),
            Node::Mul(a, b) => binary(f, a, "*", b, 2, 3),
            Node::Div(a, b) => binary(f, a, "/", b, 2, 3),
            Node::Pow(a, b) => binary(f, a, "^", b, 5, 3),
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 1)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 1)
    }
}

/// A parsed function `f(x, y)`.
///
/// Immutable once built; `Display` prints a form that parses back to the same tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMethod {
    /// Nested dual numbers; exact to rounding.
    Dual,
    /// Four-point cross stencil with step `h`.
    CentralFd { h: f64 },
}

impl DerivativeMethod {
    /// Central differences with `h = cbrt(eps) * max(1, |x|, |y|)`.
    pub fn default_fd_step(x: f64, y: f64) -> f64 {
        f64::EPSILON.cbrt() * 1f64.max(x.abs()).max(y.abs())
    }
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parser::parse_node(source).map(|root| Self { root })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when the expression uses `abs`, whose kink is not dual-differentiable.
    pub fn contains_abs(&self) -> bool {
        self.root.contains_abs()
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, x, y, &Point { x, y })
    }

    /// `(f, f_x, f_y, f_xy)` at the point.
    pub fn eval_dual(&self, x: f64, y: f64) -> Result<DualValue, EvalError> {
        eval_node(
            &self.root,
            DualValue::seed_x(x),
            DualValue::seed_y(y),
            &Point { x, y },
        )
    }

    pub fn mixed_partial(&self, x: f64, y: f64, method: DerivativeMethod) -> Result<f64, EvalError> {
        match method {
            DerivativeMethod::Dual => self.eval_dual(x, y).map(|d| d.dxy),
            DerivativeMethod::CentralFd { h } => {
                let pp = self.eval(x + h, y + h)?;
                let pm = self.eval(x + h, y - h)?;
                let mp = self.eval(x - h, y + h)?;
                let mm = self.eval(x - h, y - h)?;
                Ok((pp - pm - mp + mm) / (4.0 * h * h))
            }
        }
    }
}

impl FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

struct Point {
    x: f64,
    y: f64,
}

enum Fault {
    Domain(&'static str),
    NonDifferentiable(&'static str),
}

/// Arithmetic shared by plain and dual evaluation.
trait Scalar: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> + std::ops::Neg<Output = Self> {
    fn lift(v: f64) -> Self;
    fn finite(&self) -> bool;
    fn recip(self) -> Result<Self, Fault>;
    fn call(self, func: Func) -> Result<Self, Fault>;
    fn powf(self, r: f64) -> Result<Self, Fault>;
}

fn check_power_domain(base: f64, r: f64) -> Result<(), Fault> {
    if base < 0.0 && r.fract() != 0.0 {
        return Err(Fault::Domain("negative base with non-integer exponent"));
    }
    if base == 0.0 && r < 0.0 {
        return Err(Fault::Domain("zero raised to a negative power"));
    }
    Ok(())
}

fn check_call_domain(func: Func, v: f64) -> Result<(), Fault> {
    match func {
        Func::Log if v <= 0.0 => Err(Fault::Domain("log of a nonpositive number")),
        Func::Sqrt if v < 0.0 => Err(Fault::Domain("sqrt of a negative number")),
        _ => Ok(()),
    }
}

impl Scalar for f64 {
    fn lift(v: f64) -> Self {
        v
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn recip(self) -> Result<Self, Fault> {
        if self == 0.0 {
            return Err(Fault::Domain("division by zero"));
        }
        Ok(1.0 / self)
    }
    fn call(self, func: Func) -> Result<Self, Fault> {
        check_call_domain(func, self)?;
        Ok(match func {
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Abs => self.abs(),
            Func::Sqrt => self.sqrt(),
        })
    }
    fn powf(self, r: f64) -> Result<Self, Fault> {
        check_power_domain(self, r)?;
        Ok(f64::powf(self, r))
    }
}

impl Scalar for DualValue {
    fn lift(v: f64) -> Self {
        DualValue::constant(v)
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn recip(self) -> Result<Self, Fault> {
        if self.value == 0.0 {
            return Err(Fault::Domain("division by zero"));
        }
        Ok(DualValue::recip(self))
    }
    fn call(self, func: Func) -> Result<Self, Fault> {
        check_call_domain(func, self.value)?;
        Ok(match func {
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Abs => {
                if self.value == 0.0 {
                    return Err(Fault::NonDifferentiable("abs has a kink at 0"));
                }
                self.abs()
            }
            Func::Sqrt => {
                if self.value == 0.0 {
                    return Err(Fault::NonDifferentiable("sqrt is not differentiable at 0"));
                }
                self.sqrt()
            }
        })
    }
    fn powf(self, r: f64) -> Result<Self, Fault> {
        check_power_domain(self.value, r)?;
        let out = DualValue::powf(self, r);
        if out.value.is_finite() && !out.is_finite() {
            return Err(Fault::NonDifferentiable("power has an unbounded derivative at 0"));
        }
        Ok(out)
    }
}

fn fail(node: &Node, at: &Point, fault: Fault) -> EvalError {
    let (kind, reason) = match fault {
        Fault::Domain(r) => (EvalErrorKind::Domain, r),
        Fault::NonDifferentiable(r) => (EvalErrorKind::NonDifferentiable, r),
    };
    EvalError {
        kind,
        subterm: node.to_string(),
        reason,
        x: at.x,
        y: at.y,
    }
}

fn eval_node<T: Scalar>(node: &Node, x: T, y: T, at: &Point) -> Result<T, EvalError> {
    let out = match node {
        Node::Num(v) => T::lift(*v),
        Node::X => x,
        Node::Y => y,
        Node::Neg(a) => -eval_node(a, x, y, at)?,
        Node::Add(a, b) => eval_node(a, x, y, at)? + eval_node(b, x, y, at)?,
        Node::Sub(a, b) => eval_node(a, x, y, at)? - eval_node(b, x, y, at)?,
        Node::Mul(a, b) => eval_node(a, x, y, at)? * eval_node(b, x, y, at)?,
        Node::Div(a, b) => {
            let num = eval_node(a, x, y, at)?;
            let den = eval_node(b, x, y, at)?;
            num * den.recip().map_err(|e| fail(node, at, e))?
        }
        Node::Pow(a, e) => {
            let base = eval_node(a, x, y, at)?;
            // exponent is variable-free, so its plain value is exact
            let r = eval_node(e, 0.0, 0.0, at)?;
            base.powf(r).map_err(|err| fail(node, at, err))?
        }
        Node::Call(func, a) => eval_node(a, x, y, at)?
            .call(*func)
            .map_err(|e| fail(node, at, e))?,
    };
    if !out.finite() {
        return Err(fail(node, at, Fault::Domain("result is not finite")));
    }
    Ok(out)
}
