//! Self correlators of one detector: the v-part driven by the field and the
//! a-part carrying the initial zero-point fluctuations.
//!
//! With the translation-invariant regulated kernel the v-part double integral
//! reduces to one integral over the time difference. The overlap of the two
//! response kernels is an exponential sum, so the coincidence pole is handled
//! by [`even_pole_integral_re`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Detector;
use crate::params::ModelParams;
use crate::pole::{even_pole_integral_re, PolyExp};
use crate::quad::QuadConfig;

/// Symmetrized self correlators of one detector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelfSet {
    pub qq: f64,
    pub qp: f64,
    pub pp: f64,
}

impl std::ops::Add for SelfSet {
    type Output = SelfSet;
    fn add(self, o: SelfSet) -> SelfSet {
        SelfSet { qq: self.qq + o.qq, qp: self.qp + o.qp, pp: self.pp + o.pp }
    }
}

// k(u) = Re(c e^{mu u}) written as two exponentials
fn kernel_terms(c: Complex64, mu: Complex64) -> [(Complex64, Complex64); 2] {
    [(0.5 * c, mu), (0.5 * c.conj(), mu.conj())]
}

fn kernel_eval(c: Complex64, mu: Complex64, u: f64) -> f64 {
    (c * (mu * u).exp()).re
}

/// Even part of the overlap `int k_X(u) k_Y(u + D) du` over `u, u+D in [0, eta]`, for `D >= 0`.
fn overlap(x: (Complex64, Complex64), y: (Complex64, Complex64), eta: f64) -> PolyExp {
    let mut f = PolyExp::new();
    let zero = Complex64::new(0.0, 0.0);
    for (first, second) in [(x, y), (y, x)] {
        let kx = kernel_terms(first.0, first.1);
        let ky = kernel_terms(second.0, second.1);
        for &(ap, mp) in &kx {
            for &(bq, mq) in &ky {
                let nu = mp + mq;
                let w = 0.5 * ap * bq / nu;
                f.push(w * (nu * eta).exp(), zero, -mp);
                f.push(-w, zero, mq);
            }
        }
    }
    f
}

fn quad_config(quad_tol: f64, scale: f64) -> QuadConfig {
    QuadConfig::new(quad_tol * scale, quad_tol).with_max_evals(5_000_000)
}

/// v-part of the self correlators at proper time `tau`, with the regulated kernel at
/// `eps_phys`. The switch-on corner is moved from `Lambda1` to `Lambda0` analytically.
pub fn self_v_quad(p: &ModelParams, tau: f64, quad_tol: f64) -> Result<SelfSet> {
    self_v_with_eps(p, tau, p.eps_phys(), quad_tol)
}

/// As [`self_v_quad`] with an explicit regulator width `eps`.
pub fn self_v_with_eps(p: &ModelParams, tau: f64, eps: f64, quad_tol: f64) -> Result<SelfSet> {
    p.validate()?;
    if !(eps > 0.0) {
        return Err(Error::SingularKernel);
    }
    let eta = p.eta(tau);
    if eta < 0.0 {
        return Err(Error::InvalidParameter(format!("tau = {tau} precedes tau0 = {}", p.tau0)));
    }
    if eta == 0.0 {
        return Ok(SelfSet::default());
    }
    let (g, w, a, hbar) = (p.gamma, p.omega, p.a, p.hbar);
    let mu = Complex64::new(-g, w);
    let kq = (Complex64::new(0.0, -1.0), mu);
    let kp = (Complex64::new(0.0, -1.0) * mu, mu);
    let pref = -p.coupling_sq() / (w * w) * hbar / (4.0 * PI * PI);
    let corner = 2.0 * g * hbar / (PI * w * w) * (p.lambda0 - p.lambda_for(eps));

    let one = |x: (Complex64, Complex64), y: (Complex64, Complex64), scale: f64| -> Result<f64> {
        let f = overlap(x, y, eta);
        let mut cfg = quad_config(quad_tol, scale / pref.abs());
        // the overlap terms cancel to O(eta) from O(1/gamma) coefficients
        cfg.abs_tol = cfg.abs_tol.max(1e3 * f64::EPSILON * f.coeff_norm() * a * a);
        let v = even_pole_integral_re(&f, eta, eps, a, &cfg)?;
        let kk = kernel_eval(x.0, x.1, eta) * kernel_eval(y.0, y.1, eta);
        Ok(pref * v + corner * kk)
    };
    let scale = hbar * g / w;
    Ok(SelfSet {
        qq: one(kq, kq, scale / w)?,
        qp: one(kq, kp, scale)?,
        pp: one(kp, kp, scale * w)?,
    })
}

/// Homogeneous evolution of the initial Gaussian moments of one detector.
pub fn a_part(p: &ModelParams, eta: f64, detector: Detector) -> Result<SelfSet> {
    let (g, w) = (p.gamma, p.omega);
    let wr2 = p.omega_r() * p.omega_r();
    if wr2 <= g * g {
        return Err(Error::OverdampedUnsupported { omega_r_sq: wr2, gamma_sq: g * g });
    }
    let width = match detector {
        Detector::A => p.alpha,
        Detector::B => p.beta,
    };
    let q0 = p.hbar / (2.0 * width * width);
    let p0 = 0.5 * p.hbar * width * width;
    let damp = (-g * eta).exp();
    let (s, c) = (w * eta).sin_cos();
    let qa = damp * (c + g / w * s);
    let qb = damp * s / w;
    let pa = -damp * wr2 / w * s;
    let pb = damp * (c - g / w * s);
    Ok(SelfSet {
        qq: qa * qa * q0 + qb * qb * p0,
        qp: qa * pa * q0 + qb * pb * p0,
        pp: pa * pa * q0 + pb * pb * p0,
    })
}

/// Ultraweak closed forms: `<Q^2> ~ Q`, `<P^2> ~ Omega^2 Q + (2/pi) gamma hbar (Lambda1 - ln(a/Omega))`.
pub fn self_weak_closed(p: &ModelParams, eta: f64) -> SelfSet {
    let (g, w, a, hbar) = (p.gamma, p.omega, p.a, p.hbar);
    let q = weak_q(p, eta);
    SelfSet {
        qq: q,
        qp: 0.0,
        pp: w * w * q + 2.0 / PI * g * hbar * (p.lambda1 - (a / w).ln()),
    }
}

/// `(hbar/2 Omega)[e^{-2 gamma eta} + coth(pi Omega/a)(1 - e^{-2 gamma eta})]`.
pub fn weak_q(p: &ModelParams, eta: f64) -> f64 {
    let e = (-2.0 * p.gamma * eta).exp();
    let coth = 1.0 / (PI * p.omega / p.a).tanh();
    p.hbar / (2.0 * p.omega) * (e + coth * (1.0 - e))
}
