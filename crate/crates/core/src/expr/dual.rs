use std::ops::{Add, Mul, Neg, Sub};

/// Truncated two-direction hyper-dual number.
///
/// Represents `v + dx·ε₁ + dy·ε₂ + dxy·ε₁ε₂` with `ε₁² = ε₂² = 0`, so that evaluating
/// a function on the seeds `x = (x, 1, 0, 0)` and `y = (y, 0, 1, 0)` yields
/// `(f, ∂f/∂x, ∂f/∂y, ∂²f/∂x∂y)` exactly up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualValue {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxy: f64,
}

impl DualValue {
    pub const fn new(value: f64, dx: f64, dy: f64, dxy: f64) -> Self {
        Self { value, dx, dy, dxy }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0, 0.0)
    }

    pub const fn seed_x(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    pub const fn seed_y(y: f64) -> Self {
        Self::new(y, 0.0, 1.0, 0.0)
    }

    /// Apply a scalar function given its value and first two derivatives at `self.value`.
    ///
    /// Derivative factors are only multiplied in where the matching seed part is nonzero,
    /// so an infinite `d1`/`d2` only poisons the result when it actually matters.
    pub fn chain(self, f: f64, d1: f64, d2: f64) -> Self {
        let scale = |k: f64, s: f64| if s == 0.0 { 0.0 } else { k * s };
        Self {
            value: f,
            dx: scale(d1, self.dx),
            dy: scale(d1, self.dy),
            dxy: scale(d2, self.dx * self.dy) + scale(d1, self.dxy),
        }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(self.value.ln(), inv, -inv * inv)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }

    /// `|v|` away from zero; the caller rejects `v == 0`.
    pub fn abs(self) -> Self {
        let sign = self.value.signum();
        self.chain(self.value.abs(), sign, 0.0)
    }

    /// Constant real exponent.
    pub fn powf(self, r: f64) -> Self {
        let v = self.value;
        if r == 0.0 {
            return Self::constant(1.0);
        }
        if r == 1.0 {
            return self;
        }
        if r.fract() == 0.0 && r.abs() < i32::MAX as f64 {
            let n = r as i32;
            return self.chain(
                v.powi(n),
                r * v.powi(n - 1),
                r * (r - 1.0) * v.powi(n - 2),
            );
        }
        self.chain(
            v.powf(r),
            r * v.powf(r - 1.0),
            r * (r - 1.0) * v.powf(r - 2.0),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.dx.is_finite() && self.dy.is_finite() && self.dxy.is_finite()
    }
}

impl Add for DualValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.value + rhs.value,
            self.dx + rhs.dx,
            self.dy + rhs.dy,
            self.dxy + rhs.dxy,
        )
    }
}

impl Sub for DualValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.value - rhs.value,
            self.dx - rhs.dx,
            self.dy - rhs.dy,
            self.dxy - rhs.dxy,
        )
    }
}

impl Mul for DualValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.dx * rhs.value + self.value * rhs.dx,
            self.dy * rhs.value + self.value * rhs.dy,
            self.dxy * rhs.value + self.dx * rhs.dy + self.dy * rhs.dx + self.value * rhs.dxy,
        )
    }
}

impl Neg for DualValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.dx, -self.dy, -self.dxy)
    }
}
