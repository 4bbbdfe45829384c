//! Cross correlators between the two detectors.
//!
//! The closed form is a sum of four `F_K` terms whose arguments are the
//! exponentials of `a(tau+tau')`, `a(tau+tau0)`, `a(tau'+tau0)` and `2 a tau0`.
//! Derivative correlators are the proper-time derivatives of that form; they
//! are evaluated exactly with hyper-dual arithmetic, and a Richardson finite
//! difference path is kept for cross-checking.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dual::HyperDual;
use crate::error::{Error, Result};
use crate::field::wightman_cross;
use crate::params::ModelParams;
use crate::quad::{integrate_2d, QuadConfig, Rect, Vals};
use crate::specfun::{f_k_jet, ComplexIndex, LogArgument};

/// Equal-time cross correlators `<Q_A,Q_B>`, `<Q_A,P_B>`, `<P_A,Q_B>`, `<P_A,P_B>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrossSet {
    pub qq: f64,
    pub qp: f64,
    pub pq: f64,
    pub pp: f64,
}

fn check_times(p: &ModelParams, tau: f64, tau_p: f64) -> Result<()> {
    p.validate()?;
    if !(tau >= p.tau0 && tau_p >= p.tau0) {
        return Err(Error::InvalidParameter(format!(
            "proper times ({tau}, {tau_p}) precede the switch-on time {}",
            p.tau0
        )));
    }
    Ok(())
}

/// The bracketed sum of the closed form, with `tau` in slot 1 and `tau'` in slot 2.
fn closed_form(p: &ModelParams, t: HyperDual, tp: HyperDual) -> Result<HyperDual> {
    let (g, w, a) = (p.gamma, p.omega, p.a);
    let k = ComplexIndex::from_params(g, w, a);
    let i = Complex64::i();
    let d_omega = Complex64::new(w, g) * Complex64::new(0.0, -1.0 / a);
    let tau0 = HyperDual::real(p.tau0);

    // F and (Omega + i gamma) dF/dOmega at a dual log-argument
    let fg = |arg: HyperDual| -> Result<(HyperDual, HyperDual)> {
        let j = f_k_jet(k, LogArgument(arg.v.re))?;
        let f = arg.lift(j.f, j.f_w, j.f_ww);
        let gk = arg.lift(j.f_k, j.f_wk, j.f_wwk).scale(d_omega);
        Ok((f, gk))
    };

    let eta = t - tau0;
    let etap = tp - tau0;
    let ig = Complex64::new(0.0, g / w);

    let (f1, g1) = fg((t + tp) * a)?;
    let (f2, g2) = fg((t + tau0) * a)?;
    let (f3, g3) = fg((tp + tau0) * a)?;
    let (f4, g4) = fg((tau0 + tau0) * a)?;

    let line1 = f1.scale(ig) - g1;

    let side = |e: HyperDual, f: HyperDual, gk: HyperDual| {
        let damp = (e * (-g)).exp();
        let bracket = (e * w).cos().scale(-ig) + (e * w).sin().scale(i);
        damp * bracket * f + damp * (e * w).scale(i).exp() * gk
    };
    let line2 = side(etap, f2, g2);
    let line3 = side(eta, f3, g3);

    let sum = eta + etap;
    let damp = (sum * (-g)).exp();
    let line4 = damp
        * (-((sum * w).scale(i).exp() * (f4 + g4)) + (eta - etap).scale(Complex64::new(w, 0.0)).cos() * f4.scale(ig + 1.0));

    Ok((line1 + line2 + line3 + line4).scale(Complex64::new(p.hbar * g / (PI * w * w), 0.0)))
}

/// `<Q_A(eta), Q_B(eta')>` from the closed form.
pub fn cross_qq_exact(p: &ModelParams, tau: f64, tau_p: f64) -> Result<f64> {
    check_times(p, tau, tau_p)?;
    Ok(closed_form(p, HyperDual::real(tau), HyperDual::real(tau_p))?.v.re)
}

/// Equal-time cross correlators with exact proper-time derivatives of the closed form.
pub fn cross_set_exact(p: &ModelParams, tau: f64) -> Result<CrossSet> {
    check_times(p, tau, tau)?;
    let r = closed_form(p, HyperDual::var1(tau), HyperDual::var2(tau))?;
    Ok(CrossSet { qq: r.v.re, pq: r.d1.re, qp: r.d2.re, pp: r.d12.re })
}

/// Equal-time cross correlators by Richardson-extrapolated central differences
/// of [`cross_qq_exact`] with initial step `1e-4/Omega`.
pub fn cross_set_fd(p: &ModelParams, tau: f64) -> Result<CrossSet> {
    check_times(p, tau, tau)?;
    let q = |t: f64, tp: f64| closed_form(p, HyperDual::real(t), HyperDual::real(tp)).map(|r| r.v.re);
    let h0 = 1e-4 / p.omega;
    let scale = p.hbar * p.gamma / (PI * p.omega * p.omega);

    // rounding in the closed form is relative to its natural scale, not to the result
    let noise = 256.0 * f64::EPSILON * scale;
    let pq = richardson(|h| Ok((q(tau + h, tau)? - q(tau - h, tau)?) / (2.0 * h)), h0, |h| noise / h)?;
    let qp = richardson(|h| Ok((q(tau, tau + h)? - q(tau, tau - h)?) / (2.0 * h)), h0, |h| noise / h)?;
    let pp = richardson(
        |h| Ok((q(tau + h, tau + h)? - q(tau + h, tau - h)? - q(tau - h, tau + h)? + q(tau - h, tau - h)?) / (4.0 * h * h)),
        h0,
        |h| noise / (h * h),
    )?;
    Ok(CrossSet { qq: q(tau, tau)?, qp, pq, pp })
}

fn richardson<F: Fn(f64) -> Result<f64>, N: Fn(f64) -> f64>(d: F, h0: f64, floor: N) -> Result<f64> {
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut h = h0;
    let mut last_change = f64::INFINITY;
    for level in 0..6 {
        let mut row = vec![d(h)?];
        for j in 1..=level {
            let f = 4f64.powi(j as i32);
            let prev = table[level - 1][j - 1];
            let cur = row[j - 1];
            row.push((f * cur - prev) / (f - 1.0));
        }
        if level > 0 {
            let best = row[level];
            let prev_best = table[level - 1][level - 1];
            last_change = (best - prev_best).abs();
            if last_change <= 1e-7 * best.abs() + floor(h) {
                return Ok(best);
            }
        }
        table.push(row);
        h *= 0.5;
    }
    Err(Error::StepUnderflow(last_change))
}

fn kernel_q(gamma: f64, omega: f64, u: f64) -> f64 {
    (-gamma * u).exp() * (omega * u).sin()
}

fn kernel_p(gamma: f64, omega: f64, u: f64) -> f64 {
    (-gamma * u).exp() * (omega * (omega * u).cos() - gamma * (omega * u).sin())
}

fn quad_config(p: &ModelParams, quad_tol: f64) -> QuadConfig {
    let scale = p.hbar * p.gamma / (p.omega * p.omega);
    QuadConfig::new(quad_tol * 1e-3 * scale, quad_tol).with_max_evals(50_000_000)
}

fn grid(len: f64, p: &ModelParams) -> usize {
    let cell = (4.0 * PI / p.omega).min(8.0 / p.a);
    (len / cell).ceil().clamp(1.0, 400.0) as usize
}

/// `<Q_A(eta), Q_B(eta')>` by direct 2D quadrature of the defining integral with the
/// `eps = 0` cross kernel.
pub fn cross_qq_quad(p: &ModelParams, tau: f64, tau_p: f64, quad_tol: f64) -> Result<f64> {
    check_times(p, tau, tau_p)?;
    let (g, w, a, hbar) = (p.gamma, p.omega, p.a, p.hbar);
    let pref = p.coupling_sq() / (w * w);
    let f = |s: f64, sp: f64| pref * kernel_q(g, w, tau - s) * kernel_q(g, w, tau_p - sp) * wightman_cross(s, sp, a, hbar, 0.0).re;
    let r = Rect { x0: p.tau0, x1: tau, y0: p.tau0, y1: tau_p };
    let res = integrate_2d(f, r, grid(tau - p.tau0, p), grid(tau_p - p.tau0, p), &quad_config(p, quad_tol))?;
    Ok(res.value)
}

/// All four equal-time cross correlators by 2D quadrature with derivative kernels.
pub fn cross_set_quad(p: &ModelParams, tau: f64, quad_tol: f64) -> Result<CrossSet> {
    check_times(p, tau, tau)?;
    let (g, w, a, hbar) = (p.gamma, p.omega, p.a, p.hbar);
    let pref = p.coupling_sq() / (w * w);
    let f = |s: f64, sp: f64| {
        let d = pref * wightman_cross(s, sp, a, hbar, 0.0).re;
        let (qa, pa) = (kernel_q(g, w, tau - s), kernel_p(g, w, tau - s));
        let (qb, pb) = (kernel_q(g, w, tau - sp), kernel_p(g, w, tau - sp));
        Vals([qa * qb * d, qa * pb * d, pa * qb * d, pa * pb * d])
    };
    let r = Rect { x0: p.tau0, x1: tau, y0: p.tau0, y1: tau };
    let n = grid(tau - p.tau0, p);
    let res = integrate_2d(f, r, n, n, &quad_config(p, quad_tol))?;
    let v = res.value.0;
    Ok(CrossSet { qq: v[0], qp: v[1], pq: v[2], pp: v[3] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64, rel: f64, abs: f64) -> bool {
        (x - y).abs() <= rel * x.abs().max(y.abs()) + abs
    }

    #[test]
    fn vanishes_at_switch_on() {
        for tau0 in [-60.0, -10.0, 0.0, 5.0] {
            let p = ModelParams::new(0.01, 1.3, 2.0, tau0);
            let v = cross_qq_exact(&p, tau0, tau0).unwrap();
            assert!(v.abs() < 1e-15, "{tau0}: {v}");
            assert_eq!(cross_qq_quad(&p, tau0, tau0, 1e-9).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_times_before_switch_on() {
        let p = ModelParams::new(0.01, 1.3, 2.0, 0.0);
        assert!(cross_qq_exact(&p, -1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (g, a, tau0, tau, taup) in [
            (0.01, 2.0, -10.0, 5.0, 5.0),
            (0.1, 1.0, -60.0, 20.0, 20.0),
            (0.01, 2.0, -10.0, 3.0, 7.5),
            (0.05, 0.5, 2.0, 9.0, 4.0),
        ] {
            let p = ModelParams::new(g, 1.3, a, tau0);
            let e = cross_qq_exact(&p, tau, taup).unwrap();
            let q = cross_qq_quad(&p, tau, taup, 1e-10).unwrap();
            assert!(close(e, q, 1e-6, 1e-12), "{g} {a} {tau0} {tau} {taup}: {e} vs {q}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences_and_quadrature() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -10.0);
        for tau in [-4.0, 2.0, 11.0] {
            let e = cross_set_exact(&p, tau).unwrap();
            let fd = cross_set_fd(&p, tau).unwrap();
            let q = cross_set_quad(&p, tau, 1e-10).unwrap();
            for (x, y, z) in [(e.qq, fd.qq, q.qq), (e.qp, fd.qp, q.qp), (e.pq, fd.pq, q.pq), (e.pp, fd.pp, q.pp)] {
                assert!(close(x, y, 1e-6, 1e-13), "tau={tau}: exact {x} fd {y}");
                assert!(close(x, z, 1e-6, 1e-12), "tau={tau}: exact {x} quad {z}");
            }
            assert!(close(e.qp, e.pq, 1e-10, 1e-16));
        }
    }
}
