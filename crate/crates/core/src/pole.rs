//! Integrals against the coincidence kernel `(a^2/4) / sinh^2(a (D - c) / 2)`.
//!
//! The kernel has a double pole at `D = c`, which sits just above the real
//! axis (`c = i eps`). Integrands are exponential sums `f(D)`, so the
//! linear Taylor part of `f` is integrated against `1/(D-c)^2` in closed
//! form and only the bounded remainder goes to quadrature.

use num_complex::Complex64;

use crate::error::Result;
use crate::quad::{integrate_pts, QuadConfig};

/// Kernel is below `e^{-60}` of its peak past this many `1/a`.
const KERNEL_REACH: f64 = 60.0;

/// `f(x) = sum_j (c_j + d_j x) e^{beta_j x}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyExp {
    pub terms: Vec<ExpTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub c: Complex64,
    pub d: Complex64,
    pub beta: Complex64,
}

/// `(e^z - 1)/z`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..16 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(e^z - 1 - z)/z^2`.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for k in 3..17 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

impl PolyExp {
    pub fn new() -> Self {
        PolyExp { terms: Vec::new() }
    }

    pub fn push(&mut self, c: Complex64, d: Complex64, beta: Complex64) {
        self.terms.push(ExpTerm { c, d, beta });
    }

    pub fn scaled(&self, s: Complex64) -> PolyExp {
        PolyExp { terms: self.terms.iter().map(|t| ExpTerm { c: t.c * s, d: t.d * s, beta: t.beta }).collect() }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| (t.c + t.d * x) * (t.beta * x).exp()).sum()
    }

    /// `(f(0), f'(0))`.
    pub fn taylor(&self) -> (Complex64, Complex64) {
        let f0 = self.terms.iter().map(|t| t.c).sum();
        let f1 = self.terms.iter().map(|t| t.c * t.beta + t.d).sum();
        (f0, f1)
    }

    /// `(f(x) - f(0) - f'(0) x) / x^2` without cancellation at small `x`.
    pub fn remainder2(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let z = t.beta * x;
                t.c * t.beta * t.beta * phi2(z) + t.d * t.beta * phi1(z)
            })
            .sum()
    }

    fn max_frequency(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.beta.im.abs()))
    }

    /// `sum_j |c_j|`; sets the rounding floor when terms cancel.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.c.norm()).sum()
    }
}

/// `csch^2 x - 1/x^2`, regular at the origin.
pub fn csch2_minus_inv2(x: Complex64) -> Complex64 {
    if x.norm() < 0.1 {
        let x2 = x * x;
        // -1/3 + x^2/15 - 2x^4/189 + x^6/675 - 2x^8/10395 + 1382 x^10/58046625
        let coeffs = [
            -1.0 / 3.0,
            1.0 / 15.0,
            -2.0 / 189.0,
            1.0 / 675.0,
            -2.0 / 10395.0,
            1382.0 / 58_046_625.0,
        ];
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * x2 + *c;
        }
        acc
    } else {
        let s = x.sinh();
        (s * s).inv() - (x * x).inv()
    }
}

/// `(a^2/4) csch^2(a z/2) - 1/z^2`.
pub fn rho(z: Complex64, a: f64) -> Complex64 {
    csch2_minus_inv2(z * (0.5 * a)) * (0.25 * a * a)
}

/// The full kernel `(a^2/4) / sinh^2(a (x - c)/2)`.
pub fn kernel(x: f64, c: Complex64, a: f64) -> Complex64 {
    let s = ((Complex64::new(x, 0.0) - c) * (0.5 * a)).sinh();
    (s * s).inv() * (0.25 * a * a)
}

fn ratio_sq(x: f64, c: Complex64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let q = Complex64::new(x, 0.0) / (Complex64::new(x, 0.0) - c);
    q * q
}

fn breakpoints(lo: f64, hi: f64, chunk: f64, c: Complex64) -> Vec<f64> {
    let n = ((hi - lo) / chunk).ceil().clamp(1.0, 4096.0) as usize;
    let mut pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    pts.push(hi);
    if lo < 0.0 && hi > 0.0 {
        pts.push(0.0);
    }
    // geometric grading toward a pole close to the axis
    let w = c.im.abs().max(chunk * 1e-12);
    let mut r = w;
    while r < chunk {
        for x in [c.re - r, c.re + r] {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
        r *= 8.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn chunk_len(f: &PolyExp, a: f64) -> f64 {
    let w = f.max_frequency();
    let osc = if w > 0.0 { std::f64::consts::PI / w } else { f64::INFINITY };
    (4.0 / a).min(osc)
}

/// `int_lo^hi f(x) (a^2/4)/sinh^2(a(x-c)/2) dx` for `Im c > 0` or `c` off `[lo, hi]`.
pub fn pole_integral(f: &PolyExp, lo: f64, hi: f64, c: Complex64, a: f64, cfg: &QuadConfig) -> Result<Complex64> {
    let reach = KERNEL_REACH / a;
    let l = lo.max(-reach);
    let h = hi.min(reach);
    if !(l < h) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (f0, f1) = f.taylor();
    let lc = Complex64::new(l, 0.0) - c;
    let hc = Complex64::new(h, 0.0) - c;
    let m0 = lc.inv() - hc.inv();
    let m1 = hc.ln() - lc.ln() + c * m0;
    let analytic = f0 * m0 + f1 * m1;
    let g = |x: f64| f.remainder2(x) * ratio_sq(x, c) + f.eval(x) * rho(Complex64::new(x, 0.0) - c, a);
    let numeric = integrate_pts(g, &breakpoints(l, h, chunk_len(f, a), c), cfg)?;
    Ok(analytic + numeric.value)
}

/// `Re int_{-h}^{h} f(|x|) (a^2/4)/sinh^2(a(x - i eps)/2) dx` for real-valued `f`.
pub fn even_pole_integral_re(f: &PolyExp, h: f64, eps: f64, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let reach = KERNEL_REACH / a;
    let h = h.min(reach);
    if !(h > 0.0) {
        return Ok(0.0);
    }
    let (f0, f1) = f.taylor();
    let (g0, g1) = (f0.re, f1.re);
    let e2 = eps * eps;
    let s = h * h + e2;
    let analytic = g0 * (-h / s) + 0.5 * g1 * ((s / e2).ln() + 2.0 * e2 / s - 2.0);
    let c = Complex64::new(0.0, eps);
    let g = |x: f64| f.remainder2(x).re * ratio_sq(x, c).re + f.eval(x).re * rho(Complex64::new(x, 0.0) - c, a).re;
    let numeric = integrate_pts(g, &breakpoints(0.0, h, chunk_len(f, a), c), cfg)?;
    Ok(2.0 * (analytic + numeric.value))
}
