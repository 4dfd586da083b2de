#![allow(dead_code)]

use coordhh::{Expression, Rectangle};

/// Identity corpus: smooth functions with closed-form-friendly mixed partials.
pub const IDENTITY_CORPUS: [&str; 6] = [
    "x*y",
    "x^2*y^2",
    "x^3+y^3+x^2*y^2",
    "exp(x+y)",
    "sin(x)*sin(y)",
    "(x+2*y)^4",
];

pub fn rectangles() -> [Rectangle; 2] {
    [Rectangle::unit(), Rectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap()]
}

/// Grammar corpus for print/parse round trips.
pub const GRAMMAR_CORPUS: [&str; 50] = [
    "x",
    "y",
    "42",
    "3.25",
    "1e-3",
    "2.5E+4",
    ".5",
    "x*y",
    "x+y",
    "x-y",
    "x/y",
    "-x",
    "-x^2",
    "(-x)^2",
    "x^-2",
    "x^2^3",
    "(x^2)^3",
    "2^-1^2",
    "x - y - 1",
    "x - (y - 1)",
    "x/y/2",
    "x/(y/2)",
    "x*y*x*y",
    "x*(y*x)",
    "x*-y",
    "x - -y",
    "-(x+y)",
    "-(x*y)",
    "-sin(x)",
    "sin(x)*sin(y) + x^2",
    "exp(x+y)",
    "log(1+x^2+y^2)",
    "cos(x)*cos(y)",
    "abs(x-y)",
    "sqrt(1+x*x)",
    "exp(-x^2-y^2)",
    "(x+2*y)^4",
    "x^3+y^3+x^2*y^2",
    "x^2*y^2",
    "x^0.5*y^1.5",
    "1/(1+x^2)",
    "(x+y)*(x-y)",
    "((x))",
    "sin(cos(exp(x)))",
    "x^(1/3)",
    "2*x*y - 3*x + 4*y - 5",
    "log(exp(x))*y",
    "abs(sin(x))*abs(cos(y))",
    "(1+x)^-1.5*(2+y)",
    "-(-x)",
];

pub fn parse(s: &str) -> Expression {
    Expression::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}
