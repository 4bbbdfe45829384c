//! Hyper-dual numbers `v + d1 e1 + d2 e2 + d12 e1 e2` with `e1^2 = e2^2 = 0`.
//!
//! Carrying two independent infinitesimals gives first derivatives in two
//! variables and their mixed second derivative exactly.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d12: Complex64,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl HyperDual {
    pub fn constant(v: Complex64) -> Self {
        HyperDual { v, d1: ZERO, d2: ZERO, d12: ZERO }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    /// Independent variable in slot 1.
    pub fn var1(v: f64) -> Self {
        HyperDual { v: Complex64::new(v, 0.0), d1: Complex64::new(1.0, 0.0), d2: ZERO, d12: ZERO }
    }

    /// Independent variable in slot 2.
    pub fn var2(v: f64) -> Self {
        HyperDual { v: Complex64::new(v, 0.0), d1: ZERO, d2: Complex64::new(1.0, 0.0), d12: ZERO }
    }

    /// `g(self)` given `g`, `g'`, `g''` at `self.v`.
    pub fn lift(self, g0: Complex64, g1: Complex64, g2: Complex64) -> Self {
        HyperDual { v: g0, d1: g1 * self.d1, d2: g1 * self.d2, d12: g1 * self.d12 + g2 * self.d1 * self.d2 }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.lift(e, e, e)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.lift(c, -s, -c)
    }

    pub fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.lift(s, c, -s)
    }

    pub fn scale(self, k: Complex64) -> Self {
        HyperDual { v: self.v * k, d1: self.d1 * k, d2: self.d2 * k, d12: self.d12 * k }
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        HyperDual { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2, d12: self.d12 + o.d12 }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        HyperDual { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2, d12: self.d12 - o.d12 }
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        HyperDual { v: -self.v, d1: -self.d1, d2: -self.d2, d12: -self.d12 }
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        HyperDual {
            v: self.v * o.v,
            d1: self.v * o.d1 + self.d1 * o.v,
            d2: self.v * o.d2 + self.d2 * o.v,
            d12: self.v * o.d12 + self.d1 * o.d2 + self.d2 * o.d1 + self.d12 * o.v,
        }
    }
}

impl Mul<Complex64> for HyperDual {
    type Output = Self;
    fn mul(self, k: Complex64) -> Self {
        self.scale(k)
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }
}
