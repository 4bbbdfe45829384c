//! Second-order perturbative matrix elements of the two-detector density matrix.
//!
//! Self-channel integrals are reduced to `(T, D)` coordinates with
//! `T = (s + s')/2`, `D = s - s'`. For the translation-invariant kernels the
//! `T` integral is done by hand and the `D` integral goes through [`crate::pole`].
//! The cross kernel at zero regulator depends on `T` only, so the `D`
//! integral is elementary there.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{wightman_cross, RegulatorKind, RegulatorScheme};
use crate::params::ModelParams;
use crate::pole::{pole_integral, PolyExp};
use crate::quad::{integrate, integrate_pts, QuadConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Integrands are below `e^{-60}` of their peak this many `1/a` from the ridge.
const REACH: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    R1010,
    R1001,
    R1100,
    R1111,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::R1010 => "r1010",
            Which::R1001 => "r1001",
            Which::R1100 => "r1100",
            Which::R1111 => "r1111",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdptElement {
    pub which: Which,
    pub value: Complex64,
    pub scheme: RegulatorScheme,
    pub tau: f64,
    pub tau0: f64,
}

/// `lambda_0^2 / (2 hbar Omega)`.
fn coupling_pref(p: &ModelParams) -> f64 {
    p.coupling_sq() / (2.0 * p.hbar * p.omega)
}

fn wightman_pref(p: &ModelParams) -> f64 {
    p.hbar / (4.0 * PI * PI)
}

fn cfg(quad_tol: f64, scale: f64) -> QuadConfig {
    QuadConfig::new(quad_tol * 1e-6 * scale, quad_tol).with_max_evals(20_000_000)
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `int int e^{-i Omega (s - s')} D+(z_A(s), z_A(s'))` over the scheme's domain.
pub fn self_integral(p: &ModelParams, tau: f64, scheme: RegulatorScheme, quad_tol: f64) -> Result<Complex64> {
    scheme.validate()?;
    let eta = p.eta(tau);
    if eta == 0.0 {
        return Ok(ZERO);
    }
    let (w, a) = (p.omega, p.a);
    let c = cfg(quad_tol, 1.0);
    match scheme.kind {
        RegulatorKind::ModifiedEpsPrime => {
            if scheme.eps <= 0.0 {
                return Err(Error::SingularKernel);
            }
            // D < 0 half is the conjugate of the D > 0 half
            let mut f = PolyExp::new();
            f.push(c64(eta, 0.0), c64(-1.0, 0.0), c64(0.0, -w));
            let half = pole_integral(&f, 0.0, eta, c64(0.0, scheme.eps), a, &c)?;
            Ok(c64(-2.0 * wightman_pref(p) * half.re, 0.0))
        }
        RegulatorKind::ShiftedBounds => {
            let (e0, e1) = (scheme.eps0, scheme.eps1);
            if e0 <= 0.0 || e1 <= 0.0 {
                return Err(Error::SingularKernel);
            }
            if e0 >= eta {
                return Err(Error::InvalidParameter(format!("shift {e0} exceeds the elapsed time {eta}")));
            }
            // length of the T-slice at fixed D is (eta - e0) + psi(D), psi piecewise linear
            let pole = c64(0.0, f64::MIN_POSITIVE);
            let hi = eta + e1 - e0;
            let mut flat = PolyExp::new();
            flat.push(c64(eta - e0, 0.0), ZERO, c64(0.0, -w));
            let mut left = PolyExp::new();
            left.push(c64(e0, 0.0), c64(1.0, 0.0), c64(0.0, -w));
            let mut right = PolyExp::new();
            right.push(c64(e1, 0.0), c64(-1.0, 0.0), c64(0.0, -w));
            let total = pole_integral(&flat, -eta, hi, pole, a, &c)?
                + pole_integral(&left, -eta, -e0, pole, a, &c)?
                + pole_integral(&right, e1, hi, pole, a, &c)?;
            Ok(-total * wightman_pref(p))
        }
        RegulatorKind::OriginalEps => {
            if scheme.eps <= 0.0 {
                return Err(Error::SingularKernel);
            }
            original_self(p, tau, scheme.eps, quad_tol)
        }
    }
}

/// Original regulator continued to complex `D`.
fn original_kernel(delta: Complex64, t: f64, a: f64, eps: f64) -> Complex64 {
    let x = delta * (0.5 * a);
    if x.re.abs() > 300.0 {
        return ZERO;
    }
    let sh = x.sinh();
    let inner = sh - c64(0.0, eps * a * (a * t).cosh());
    let denom = sh * inner * (-4.0 / (a * a)) + eps * eps;
    denom.inv()
}

// The poles in D sit in the upper half plane or at least 2 pi / a below it,
// so the inner contour dips below the axis to stay clear of the near ones.
fn original_self(p: &ModelParams, tau: f64, eps: f64, quad_tol: f64) -> Result<Complex64> {
    let (w, a, t0) = (p.omega, p.a, p.tau0);
    let eta = p.eta(tau);
    let inner_cfg = QuadConfig::new(quad_tol * 1e-3, quad_tol).with_max_evals(200_000);
    let inner = |t: f64| -> Complex64 {
        let m = (t - t0).min(tau - t).max(0.0);
        let len = (2.0 * m).min(REACH / a);
        if len == 0.0 {
            return ZERO;
        }
        let depth = m.min(0.5 / a);
        let g = |u: f64| {
            let q = u / len;
            let z = c64(u, -depth * (1.0 - q * q));
            let dz = c64(1.0, 2.0 * depth * q / len);
            (c64(0.0, -w) * z).exp() * original_kernel(z, t, a, eps) * dz
        };
        let mut pts = vec![-len, len, 0.0];
        let mut r = eps.max(len * 1e-12);
        while r < len {
            pts.push(r);
            pts.push(-r);
            r *= 8.0;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        // a failed slice poisons the outer sum and is reported there
        integrate_pts(g, &pts, &inner_cfg).map(|r| r.value).unwrap_or(c64(f64::NAN, f64::NAN))
    };
    let mut pts = vec![t0, tau, t0 + 0.5 * eta];
    let mut r = eps;
    while r < 0.5 * eta {
        pts.push(t0 + r);
        pts.push(tau - r);
        r *= 8.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let outer = integrate_pts(inner, &pts, &cfg(quad_tol, 1.0))?;
    if !(outer.value.re.is_finite() && outer.value.im.is_finite()) {
        return Err(Error::QuadratureNonConvergence { value: f64::NAN, error: f64::NAN, evals: outer.evals });
    }
    Ok(outer.value * wightman_pref(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CrossKernel {
    /// `e^{-i Omega (s - s')}`
    Diff,
    /// `e^{+i Omega (s + s')}`
    SumPlus,
    /// `e^{-i Omega (s + s')}`
    SumMinus,
}

fn cross_integral(p: &ModelParams, tau: f64, eps: f64, kind: CrossKernel, quad_tol: f64) -> Result<Complex64> {
    let (w, a, t0) = (p.omega, p.a, p.tau0);
    let eta = p.eta(tau);
    if eta == 0.0 {
        return Ok(ZERO);
    }
    let scale = wightman_pref(p) * a;
    let mut pts = vec![t0, tau, t0 + 0.5 * eta];
    for x in [0.0, -4.0 / a, 4.0 / a] {
        if x > t0 && x < tau {
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    let phase_t = |t: f64| match kind {
        CrossKernel::Diff => c64(1.0, 0.0),
        CrossKernel::SumPlus => c64(0.0, 2.0 * w * t).exp(),
        CrossKernel::SumMinus => c64(0.0, -2.0 * w * t).exp(),
    };
    if eps == 0.0 {
        let g = |t: f64| {
            if (a * t).abs() > 700.0 {
                return ZERO;
            }
            let m = (t - t0).min(tau - t).max(0.0);
            let d = wightman_cross(t, t, a, p.hbar, 0.0);
            let len = match kind {
                CrossKernel::Diff => c64(2.0 * (2.0 * w * m).sin() / w, 0.0),
                _ => c64(4.0 * m, 0.0),
            };
            d * len * phase_t(t)
        };
        return Ok(integrate_pts(g, &pts, &cfg(quad_tol, scale))?.value);
    }
    let inner_cfg = QuadConfig::new(quad_tol * 1e-3 * scale, quad_tol).with_max_evals(200_000);
    let g = |t: f64| {
        let m = (t - t0).min(tau - t).max(0.0);
        if m == 0.0 {
            return ZERO;
        }
        let h = |u: f64| {
            let ph = match kind {
                CrossKernel::Diff => c64(0.0, -w * u).exp(),
                _ => c64(1.0, 0.0),
            };
            wightman_cross(t + 0.5 * u, t - 0.5 * u, a, p.hbar, eps) * ph
        };
        let v = integrate(h, -2.0 * m, 2.0 * m, &inner_cfg).map(|r| r.value).unwrap_or(c64(f64::NAN, f64::NAN));
        v * phase_t(t)
    };
    let r = integrate_pts(g, &pts, &cfg(quad_tol, scale))?;
    if !(r.value.re.is_finite() && r.value.im.is_finite()) {
        return Err(Error::QuadratureNonConvergence { value: f64::NAN, error: f64::NAN, evals: r.evals });
    }
    Ok(r.value)
}

/// Cross-channel regulator: zero unless the original scheme asks for one.
fn cross_eps(scheme: RegulatorScheme) -> f64 {
    match scheme.kind {
        RegulatorKind::OriginalEps => scheme.eps,
        _ => 0.0,
    }
}

fn check(p: &ModelParams, tau: f64, scheme: RegulatorScheme, quad_tol: f64) -> Result<()> {
    p.validate()?;
    scheme.validate()?;
    if !(quad_tol > 0.0 && quad_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if !(tau >= p.tau0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} precedes the switch-on time {}", p.tau0)));
    }
    Ok(())
}

pub fn tdpt_element(
    p: &ModelParams,
    which: Which,
    tau: f64,
    scheme: RegulatorScheme,
    quad_tol: f64,
) -> Result<TdptElement> {
    check(p, tau, scheme, quad_tol)?;
    let k = coupling_pref(p);
    let value = match which {
        Which::R1010 => self_integral(p, tau, scheme, quad_tol)? * k,
        Which::R1001 => cross_integral(p, tau, cross_eps(scheme), CrossKernel::Diff, quad_tol)? * k,
        Which::R1100 => {
            let i = cross_integral(p, tau, cross_eps(scheme), CrossKernel::SumPlus, quad_tol)?;
            -i * c64(0.0, -2.0 * p.omega * tau).exp() * k
        }
        Which::R1111 => tdpt_r1111(p, tau, scheme, quad_tol)?,
    };
    Ok(TdptElement { which, value, scheme, tau, tau0: p.tau0 })
}

/// Sum of the three factorized products.
pub fn tdpt_r1111(p: &ModelParams, tau: f64, scheme: RegulatorScheme, quad_tol: f64) -> Result<Complex64> {
    check(p, tau, scheme, quad_tol)?;
    if tau == p.tau0 {
        return Ok(ZERO);
    }
    let eps = cross_eps(scheme);
    let plus = cross_integral(p, tau, eps, CrossKernel::SumPlus, quad_tol)?;
    let minus = if eps == 0.0 { plus.conj() } else { cross_integral(p, tau, eps, CrossKernel::SumMinus, quad_tol)? };
    let j = self_integral(p, tau, scheme, quad_tol)?;
    let x = cross_integral(p, tau, eps, CrossKernel::Diff, quad_tol)?;
    let k = coupling_pref(p);
    Ok((plus * minus + j * j + x * x) * (k * k))
}

/// Late-time growth rate of the excited-state population, `2 gamma / (e^{2 pi Omega/a} - 1)`.
pub fn tdpt_inf_rate(p: &ModelParams) -> f64 {
    2.0 * p.gamma / (2.0 * PI * p.omega / p.a).exp_m1()
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::wightman_self;
    use crate::quad::{integrate_2d, Rect};

    fn fig6() -> ModelParams {
        ModelParams::new(1e-5, 2.3, 1.0, 0.0)
    }

    fn fig6_eps(p: &ModelParams) -> f64 {
        p.eps_for(14.0)
    }

    #[test]
    fn empty_domain_is_zero() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -3.0);
        for which in [Which::R1010, Which::R1001, Which::R1100, Which::R1111] {
            for scheme in [RegulatorScheme::modified(1e-4), RegulatorScheme::shifted(1e-4, 1e-4)] {
                let e = tdpt_element(&p, which, -3.0, scheme, 1e-10);
                // shifts longer than the elapsed time are rejected; zero length is fine
                assert_eq!(e.unwrap().value, ZERO);
            }
        }
        assert!(tdpt_element(&p, Which::R1010, -4.0, RegulatorScheme::modified(1e-4), 1e-10).is_err());
        assert!(matches!(
            tdpt_element(&p, Which::R1010, 1.0, RegulatorScheme::original(0.0), 1e-10),
            Err(Error::SingularKernel)
        ));
    }

    #[test]
    fn inf_rate_value() {
        let r = tdpt_inf_rate(&fig6());
        assert!((r / 1.06e-11 - 1.0).abs() < 0.01, "{r}");
        let mut p = fig6();
        p.a = 0.01;
        assert!(tdpt_inf_rate(&p) < 1e-300);
    }

    #[test]
    fn modified_matches_direct_double_integral() {
        let p = ModelParams::new(0.01, 1.3, 1.0, 0.0);
        let eps = 0.3;
        let tau = 2.5;
        let direct = integrate_2d(
            |s, sp| {
                c64(0.0, -p.omega * (s - sp)).exp()
                    * wightman_self(s, sp, p.a, 1.0, RegulatorScheme::modified(eps)).unwrap()
            },
            Rect { x0: 0.0, x1: tau, y0: 0.0, y1: tau },
            8,
            8,
            &QuadConfig::new(1e-13, 1e-11),
        )
        .unwrap()
        .value;
        let v = self_integral(&p, tau, RegulatorScheme::modified(eps), 1e-11).unwrap();
        assert!((v - direct).norm() < 1e-8 * direct.norm(), "{v} vs {direct}");
    }

    #[test]
    fn original_matches_direct_double_integral() {
        let p = ModelParams::new(0.01, 1.3, 1.0, 0.0);
        let eps = 0.3;
        let tau = 2.5;
        let direct = integrate_2d(
            |s, sp| {
                c64(0.0, -p.omega * (s - sp)).exp()
                    * wightman_self(s, sp, p.a, 1.0, RegulatorScheme::original(eps)).unwrap()
            },
            Rect { x0: 0.0, x1: tau, y0: 0.0, y1: tau },
            8,
            8,
            &QuadConfig::new(1e-13, 1e-11),
        )
        .unwrap()
        .value;
        let v = self_integral(&p, tau, RegulatorScheme::original(eps), 1e-11).unwrap();
        assert!((v - direct).norm() < 1e-7 * direct.norm(), "{v} vs {direct}");
    }

    #[test]
    fn shifted_matches_contour_double_integral() {
        // inner s integral on a path below the real axis, which realizes the zero-regulator limit
        let p = ModelParams::new(0.01, 1.3, 1.0, 0.0);
        let (e0, e1, tau) = (0.05, 0.08, 2.0);
        let (lo, hi) = (0.0, tau + e1);
        let depth = 0.3;
        let c = QuadConfig::new(1e-13, 1e-11);
        let inner = |sp: f64| {
            let g = |x: f64| {
                let u = (x - lo) / (hi - lo);
                let s = c64(x, -depth * (PI * u).sin());
                let ds = c64(1.0, -depth * PI / (hi - lo) * (PI * u).cos());
                let d = s - sp;
                let sh = (d * (0.5 * p.a)).sinh();
                let w = -(sh * sh).inv() * (0.25 * p.a * p.a) * wightman_pref(&p);
                (c64(0.0, -p.omega) * d).exp() * w * ds
            };
            integrate(g, lo, hi, &c).unwrap().value
        };
        let direct = integrate_pts(inner, &[e0, 0.5 * (e0 + tau), tau], &c).unwrap().value;
        let v = self_integral(&p, tau, RegulatorScheme::shifted(e0, e1), 1e-12).unwrap();
        assert!((v - direct).norm() < 1e-8 * direct.norm(), "{v} vs {direct}");
    }

    #[test]
    fn cross_reduction_matches_direct() {
        let p = ModelParams::new(0.01, 1.3, 1.0, -2.0);
        let tau = 1.5;
        let rect = Rect { x0: -2.0, x1: tau, y0: -2.0, y1: tau };
        let c = QuadConfig::new(1e-14, 1e-11);
        for (kind, ph) in [
            (CrossKernel::Diff, -1.0),
            (CrossKernel::SumPlus, 1.0),
        ] {
            let direct = integrate_2d(
                |s, sp| {
                    let e = if ph < 0.0 { c64(0.0, -p.omega * (s - sp)) } else { c64(0.0, p.omega * (s + sp)) };
                    e.exp() * wightman_cross(s, sp, p.a, 1.0, 0.0)
                },
                rect,
                8,
                8,
                &c,
            )
            .unwrap()
            .value;
            let v = cross_integral(&p, tau, 0.0, kind, 1e-12).unwrap();
            assert!((v - direct).norm() < 1e-8 * direct.norm(), "{kind:?}: {v} vs {direct}");
            // the finite-regulator path agrees with the zero-regulator reduction as eps -> 0
            let small = cross_integral(&p, tau, 1e-9, kind, 1e-10).unwrap();
            assert!((small - direct).norm() < 1e-6 * direct.norm(), "{kind:?}: {small} vs {direct}");
        }
    }

    #[test]
    fn fig_six_shifted_slope_matches_rate() {
        let p = fig6();
        let e = fig6_eps(&p);
        let xs: Vec<f64> = (0..7).map(|i| 50.0 + 25.0 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&t| tdpt_element(&p, Which::R1010, t, RegulatorScheme::shifted(e, e), 1e-12).unwrap().value.re)
            .collect();
        let slope = fitted_slope(&xs, &ys);
        let rate = tdpt_inf_rate(&p);
        assert!((slope / rate - 1.0).abs() < 0.05, "{slope} vs {rate}");
        for &t in &xs {
            let m = tdpt_element(&p, Which::R1010, t, RegulatorScheme::modified(e), 1e-12).unwrap().value.re;
            let s = tdpt_element(&p, Which::R1010, t, RegulatorScheme::shifted(e, e), 1e-12).unwrap().value.re;
            assert!((m - s).abs() < 0.02 * m.abs(), "{t}: {m} vs {s}");
        }
    }

    #[test]
    fn fig_six_original_initially_decreases() {
        let p = fig6();
        let e = fig6_eps(&p);
        let xs: Vec<f64> = (0..5).map(|i| 2.0 + 2.0 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&t| tdpt_element(&p, Which::R1010, t, RegulatorScheme::original(e), 1e-9).unwrap().value.re)
            .collect();
        assert!(fitted_slope(&xs, &ys) < 0.0, "{ys:?}");
    }

    #[test]
    fn r1100_three_stages() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -10.0);
        let s = RegulatorScheme::modified(1e-3);
        let mag = |t: f64| tdpt_element(&p, Which::R1100, t, s, 1e-11).unwrap().value.norm();
        let before = mag(0.0) - mag(-10.0);
        let during = mag(10.0) - mag(0.0);
        assert!(during >= 10.0 * before, "{before} {during}");
        // roughly linear in the middle stage
        let mid = mag(5.0) - mag(0.0);
        assert!((mid / during - 0.5).abs() < 0.1, "{mid} {during}");
        let late = mag(10.0 + 2.5);
        let later = mag(40.0);
        assert!((later - late).abs() < 0.05 * late, "{late} {later}");
    }

    #[test]
    fn r1111_factorization_and_ordering() {
        let p = ModelParams::new(1e-3, 1.3, 2.0, -60.0);
        let s = RegulatorScheme::modified(p.eps_phys());
        let tau = 20.0;
        let r1100 = tdpt_element(&p, Which::R1100, tau, s, 1e-11).unwrap().value;
        let r1010 = tdpt_element(&p, Which::R1010, tau, s, 1e-11).unwrap().value;
        let r1001 = tdpt_element(&p, Which::R1001, tau, s, 1e-11).unwrap().value;
        let r1111 = tdpt_r1111(&p, tau, s, 1e-11).unwrap();
        let expect = r1100.norm_sqr() + r1010 * r1010 + r1001 * r1001;
        assert!((r1111 - expect).norm() < 1e-12 * expect.norm());
        assert!(r1111.re >= 0.0);
        assert!(r1111.norm() < 0.1 * r1010.norm());
    }
}
