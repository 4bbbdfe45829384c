//! Detector worldlines and the vacuum Wightman function on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    A,
    B,
}

/// Uniformly accelerated worldline; A in the right wedge, B in the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Worldline {
    pub detector: Detector,
    pub a: f64,
}

/// Minkowski coordinates `(t, x, y, z)` at proper time `tau`.
pub fn trajectory(w: Worldline, tau: f64) -> [f64; 4] {
    let sign = match w.detector {
        Detector::A => 1.0,
        Detector::B => -1.0,
    };
    [(w.a * tau).sinh() / w.a, sign * (w.a * tau).cosh() / w.a, 0.0, 0.0]
}

/// Four-velocity `dz/dtau`.
pub fn velocity(w: Worldline, tau: f64) -> [f64; 4] {
    let sign = match w.detector {
        Detector::A => 1.0,
        Detector::B => -1.0,
    };
    [(w.a * tau).cosh(), sign * (w.a * tau).sinh(), 0.0, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegulatorKind {
    /// The `e^{-omega eps}` regulator carried through to the worldline.
    OriginalEps,
    /// Translation-invariant replacement with `Delta -> Delta - i eps'`.
    ModifiedEpsPrime,
    /// Kernel at `eps = 0`; the cutoffs shift the integration bounds instead.
    ShiftedBounds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulatorScheme {
    pub kind: RegulatorKind,
    pub eps: f64,
    pub eps0: f64,
    pub eps1: f64,
}

impl RegulatorScheme {
    pub fn original(eps: f64) -> Self {
        RegulatorScheme { kind: RegulatorKind::OriginalEps, eps, eps0: 0.0, eps1: 0.0 }
    }

    pub fn modified(eps: f64) -> Self {
        RegulatorScheme { kind: RegulatorKind::ModifiedEpsPrime, eps, eps0: 0.0, eps1: 0.0 }
    }

    pub fn shifted(eps0: f64, eps1: f64) -> Self {
        RegulatorScheme { kind: RegulatorKind::ShiftedBounds, eps: 0.0, eps0, eps1 }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.eps, self.eps0, self.eps1] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("regulator cutoffs must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn prefactor(hbar: f64) -> f64 {
    hbar / (4.0 * PI * PI)
}

/// `D+(z_A(s), z_A(s'))` under the given regulator.
pub fn wightman_self(s: f64, s_prime: f64, a: f64, hbar: f64, reg: RegulatorScheme) -> Result<Complex64> {
    let delta = s - s_prime;
    let t = 0.5 * (s + s_prime);
    let x = 0.5 * a * delta;
    if x.abs() > 700.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let denom = match reg.kind {
        RegulatorKind::OriginalEps | RegulatorKind::ShiftedBounds => {
            let eps = if reg.kind == RegulatorKind::ShiftedBounds { 0.0 } else { reg.eps };
            let sh = x.sinh();
            let inner = Complex64::new(sh, -eps * a * (a * t).cosh());
            inner * (-4.0 / (a * a) * sh) + eps * eps
        }
        RegulatorKind::ModifiedEpsPrime => {
            let sh = Complex64::new(x, -0.5 * a * reg.eps).sinh();
            sh * sh * (-4.0 / (a * a))
        }
    };
    if denom == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint { s, s_prime });
    }
    if !(denom.re.is_finite() && denom.im.is_finite()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(denom.inv() * prefactor(hbar))
}

// ln cosh y and ln|sinh y| without overflow
fn ln_cosh(y: f64) -> f64 {
    let y = y.abs();
    y + (0.5 * (1.0 + (-2.0 * y).exp())).ln()
}

fn ln_sinh_abs(y: f64) -> f64 {
    let y = y.abs();
    y + (0.5 * -(-2.0 * y).exp_m1()).ln()
}

/// `D+(z_A(s), z_B(s'))`; regular everywhere, a function of `T` alone at `eps = 0`.
pub fn wightman_cross(s: f64, s_prime: f64, a: f64, hbar: f64, eps: f64) -> Complex64 {
    let t = 0.5 * (s + s_prime);
    let x = 0.5 * a * (s - s_prime);
    let at = a * t;
    let sech = (-ln_cosh(at)).exp();
    let base = hbar * a * a / (16.0 * PI * PI) * sech * sech;
    if eps == 0.0 {
        return Complex64::new(base, 0.0);
    }
    // divide numerator and denominator by (4/a^2) cosh^2 aT
    let ratio = if x == 0.0 { 0.0 } else { x.signum() * (ln_sinh_abs(x) - ln_cosh(at)).exp() };
    let e = 0.5 * eps * a;
    let denom = Complex64::new(1.0 + e * e * sech * sech, eps * a * ratio);
    if !(denom.im.is_finite()) {
        return Complex64::new(0.0, 0.0);
    }
    denom.inv() * base
}

/// Half-width `tau_1 = asinh(1/(a eps))/a` of the cross-channel ridge in `Delta`.
pub fn ridge_width(a: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::DomainError { what: "ridge_width (eps must be > 0)", x: eps });
    }
    if !(a > 0.0) {
        return Err(Error::DomainError { what: "ridge_width (a must be > 0)", x: a });
    }
    Ok((1.0 / (a * eps)).asinh() / a)
}
