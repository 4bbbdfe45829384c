//! Special functions behind the closed-form correlators.
//!
//! The central object is the kernel
//!
//! ```text
//! F_K(x) = -x 2F1(1, 1+K; 2+K; x) / (1+K) = -sum_{m>=1} x^m / (m+K)
//! ```
//!
//! evaluated on the negative real axis, `x = -e^w`. Arguments reach
//! `e^{2 a tau}` with `a tau` in the hundreds of thousands, so the argument is
//! carried as its logarithm `w` and every power of `x` or `1/x` is formed in
//! the exponent.
//!
//! For `w <= 1` the Pfaff transformation maps the argument to
//! `y = x/(x-1) = 1/(1+e^{-w})` in `(0, 0.73]` where the series converges
//! geometrically. For `w > 1` the inverse-argument expansion in `z = e^{-w}`
//!
//! ```text
//! F_K(-1/z) = 1/K - pi z^K / sin(pi K) + sum_{n>=1} (-z)^n / (K-n)
//! ```
//!
//! is summed to convergence.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_TOL: f64 = 1e-16;
const MAX_TERMS: usize = 100_000;
/// Log-argument above which the inverse expansion is used.
pub const W_SWITCH: f64 = 1.0;

/// Complex index `K = (gamma - i Omega) / a` of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexIndex(pub Complex64);

impl ComplexIndex {
    pub fn new(k: Complex64) -> Self {
        ComplexIndex(k)
    }

    /// `K_- = (gamma - i Omega)/a`.
    pub fn from_params(gamma: f64, omega: f64, a: f64) -> Self {
        ComplexIndex(Complex64::new(gamma / a, -omega / a))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    fn check(self) -> Result<Complex64> {
        let k = self.0;
        if k.im == 0.0 && k.re <= 0.0 && k.re.fract() == 0.0 {
            return Err(Error::InvalidIndex { re: k.re, im: k.im });
        }
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(Error::InvalidIndex { re: k.re, im: k.im });
        }
        Ok(k)
    }
}

/// Logarithm `w` of the magnitude of the kernel argument, `x = -e^w`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogArgument(pub f64);

/// `F_K(-e^w)` together with its derivatives in `K` and `w`.
///
/// `f_w` is `x dF/dx`, `f_ww` is `(x d/dx)^2 F`; the `*_k` fields are the
/// corresponding `d/dK`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FkJet {
    pub f: Complex64,
    pub f_k: Complex64,
    pub f_w: Complex64,
    pub f_wk: Complex64,
    pub f_ww: Complex64,
    pub f_wwk: Complex64,
}

/// `F_K(-e^w)`.
pub fn f_k(k: ComplexIndex, w: LogArgument) -> Result<Complex64> {
    Ok(f_k_jet(k, w)?.f)
}

/// `d/dOmega F_{K_-}(-e^w)` at fixed argument, with `dK/dOmega = -i/a`.
pub fn f_k_domega(k: ComplexIndex, w: LogArgument, a: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("acceleration must be positive, got {a}")));
    }
    Ok(Complex64::new(0.0, -1.0 / a) * f_k_jet(k, w)?.f_k)
}

/// Full jet of `F_K(-e^w)`, choosing the series or the inverse expansion by `w`.
pub fn f_k_jet(k: ComplexIndex, w: LogArgument) -> Result<FkJet> {
    let kv = k.check()?;
    let w = w.0;
    if w.is_nan() || w == f64::INFINITY {
        return Err(Error::DomainError { what: "F_K log-argument", x: w });
    }
    if w <= W_SWITCH {
        pfaff_series(kv, w)
    } else {
        inverse_expansion(kv, w)
    }
}

/// Pfaff-transformed power series; valid for every finite `w`, fast for `w <= 1`.
pub fn pfaff_series(k: Complex64, w: f64) -> Result<FkJet> {
    // y = e^w / (1 + e^w) and 1 - y without cancellation
    let (y, one_minus_y) = if w >= 0.0 {
        let e = (-w).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = w.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    if y == 0.0 {
        return Ok(FkJet::default());
    }
    let c = k + 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut harmonic = Complex64::new(0.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    let mut s_k = Complex64::new(0.0, 0.0);
    let mut converged = false;
    for n in 0..MAX_TERMS {
        s += term;
        s_k -= term * harmonic;
        let nf = n as f64;
        if n > 0 && term.norm() <= SERIES_TOL * s.norm() && (term * harmonic).norm() <= SERIES_TOL * s_k.norm().max(s.norm()) {
            converged = true;
            break;
        }
        let denom = c + nf;
        term *= (nf + 1.0) * y / denom;
        harmonic += denom.inv();
    }
    if !converged {
        return Err(Error::NonConvergence(format!("Pfaff series for F_K at w = {w}")));
    }
    let inv1k = (k + 1.0).inv();
    let f = s * y * inv1k;
    let f_k = y * (s_k * inv1k - s * inv1k * inv1k);
    let f_w = y - k * f;
    let f_wk = -f - k * f_k;
    let f_ww = y * one_minus_y - k * f_w;
    let f_wwk = -f_w - k * f_wk;
    Ok(FkJet { f, f_k, f_w, f_wk, f_ww, f_wwk })
}

/// `pi e^{-wK} / sin(pi K)` and `pi cot(pi K)` without overflow.
fn reflection_terms(k: Complex64, w: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let s = k * PI;
    if s.im < 0.0 {
        // sin s = e^{is} (1 - q) / (2i), q = e^{-2is}, |q| < 1
        let q = (-2.0 * i * s).exp();
        let p = PI * 2.0 * i * (-k * w - i * s).exp() / (1.0 - q);
        let cot = i * (1.0 + q) / (1.0 - q);
        (p, PI * cot)
    } else if s.im > 0.0 {
        let q = (2.0 * i * s).exp();
        let p = -PI * 2.0 * i * (-k * w + i * s).exp() / (1.0 - q);
        let cot = -i * (1.0 + q) / (1.0 - q);
        (p, PI * cot)
    } else {
        let p = PI * (-k * w).exp() / s.sin();
        (p, PI * s.cos() / s.sin())
    }
}

/// Inverse-argument expansion in `z = e^{-w}`; converges for `w > 0`.
pub fn inverse_expansion(k: Complex64, w: f64) -> Result<FkJet> {
    if !(w > 0.0) {
        return Err(Error::DomainError { what: "inverse expansion (needs w > 0)", x: w });
    }
    let z = (-w).exp();
    let (p, pi_cot) = reflection_terms(k, w);
    let p_k = -p * (w + pi_cot);

    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut s0k = Complex64::new(0.0, 0.0);
    let mut s1k = Complex64::new(0.0, 0.0);
    let mut s2k = Complex64::new(0.0, 0.0);
    let scale = k.inv().norm() + p.norm() * (1.0 + k.norm()).powi(2) + 1e-300;
    let mut zn = 1.0;
    let mut converged = false;
    for n in 1..MAX_TERMS {
        let nf = n as f64;
        zn *= -z;
        let inv = (k - nf).inv();
        let t = inv * zn;
        let tk = -t * inv;
        s0 += t;
        s1 += t * nf;
        s2 += t * nf * nf;
        s0k += tk;
        s1k += tk * nf;
        s2k += tk * nf * nf;
        if zn.abs() * (nf * nf + 1.0) * (1.0 + inv.norm()) < SERIES_TOL * 1e-2 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!("inverse expansion for F_K at w = {w}")));
    }
    let kinv = k.inv();
    Ok(FkJet {
        f: kinv - p + s0,
        f_k: -kinv * kinv - p_k + s0k,
        f_w: k * p - s1,
        f_wk: p + k * p_k - s1k,
        f_ww: -k * k * p + s2,
        f_wwk: -2.0 * k * p - k * k * p_k + s2k,
    })
}

const BERNOULLI_2K: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn check_pole(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::PoleArgument { re: z.re, im: z.im });
    }
    Ok(())
}

/// `pi cot(pi z)` for complex `z`, stable for large `|Im z|`.
fn pi_cot_pi(z: Complex64) -> Complex64 {
    reflection_terms(z, 0.0).1
}

/// Complex digamma function.
pub fn digamma_c(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.0 {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        return Ok(digamma_c(1.0 - z)? - pi_cot_pi(z));
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 16.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (j, b) in BERNOULLI_2K.iter().enumerate() {
        let k2 = 2.0 * (j as f64 + 1.0);
        series += pow * (*b / k2);
        pow *= inv2;
    }
    Ok(acc + z.ln() - 0.5 * inv - series)
}

/// Complex trigamma function.
pub fn trigamma_c(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.0 {
        // psi1(z) = -psi1(1 - z) + pi^2 / sin^2(pi z)
        let s = (z * PI).sin();
        return Ok(-trigamma_c(1.0 - z)? + PI * PI / (s * s));
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 16.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2 * inv;
    for b in BERNOULLI_2K.iter() {
        series += pow * *b;
        pow *= inv2;
    }
    Ok(acc + inv + 0.5 * inv2 + series)
}

/// Real branch of the Lambert W function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambertBranch {
    /// Principal branch, `W >= -1`.
    Principal,
    /// Lower branch, `W <= -1`, defined on `[-1/e, 0)`.
    Lower,
}

impl LambertBranch {
    pub fn from_index(k: i32) -> Option<Self> {
        match k {
            0 => Some(LambertBranch::Principal),
            -1 => Some(LambertBranch::Lower),
            _ => None,
        }
    }
}

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Real Lambert W on branch 0 or -1, refined by Halley iteration.
pub fn lambert_w(branch: LambertBranch, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::DomainError { what: "lambert_w", x });
    }
    // tolerate rounding of -1/e itself
    let branch_gap = x + INV_E;
    if branch_gap < -4.0 * f64::EPSILON {
        return Err(Error::DomainError { what: "lambert_w", x });
    }
    if branch == LambertBranch::Lower && x >= 0.0 {
        return Err(Error::DomainError { what: "lambert_w branch -1", x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if branch_gap <= 0.0 {
        return Ok(-1.0);
    }

    let p = (2.0 * std::f64::consts::E * branch_gap).sqrt();
    let mut w = match branch {
        LambertBranch::Principal => {
            if branch_gap < 0.25 {
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if x < 3.0 {
                // log1p-based start is good near the origin
                let l = x.ln_1p();
                l * (1.0 - l.ln_1p() / (2.0 + l))
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        LambertBranch::Lower => {
            if branch_gap < 0.25 {
                -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    };

    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * w.abs().max(1e-300) {
            break;
        }
    }
    match branch {
        LambertBranch::Principal if w < -1.0 => Ok(-1.0),
        LambertBranch::Lower if w > -1.0 => Ok(-1.0),
        _ => Ok(w),
    }
}
