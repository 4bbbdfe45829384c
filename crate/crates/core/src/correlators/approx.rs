//! Stage approximations of the cross correlator and its weak-coupling envelope.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::params::ModelParams;
use crate::specfun::{digamma_c, trigamma_c};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// `1 <~ a tau < -a tau0`: linearly growing oscillation.
    II,
    /// `tau > -tau0`: slowly decaying oscillation.
    III,
    /// `tau0 = 0`: no growth at all.
    ZeroTau0,
}

fn sinh_coth(p: &ModelParams) -> (f64, f64) {
    let x = PI * p.omega / p.a;
    (x.sinh(), 1.0 / x.tanh())
}

/// Approximate `<Q_A, Q_B>` at equal times in the given stage.
pub fn stage_approx(p: &ModelParams, tau: f64, stage: Stage) -> Result<f64> {
    let (g, w, a, hbar, tau0) = (p.gamma, p.omega, p.a, p.hbar, p.tau0);
    let (sh, coth) = sinh_coth(p);
    let damp = (-2.0 * g * tau).exp();
    let (s2, c2) = (2.0 * w * tau).sin_cos();
    Ok(match stage {
        Stage::II => hbar * g * damp / (w * sh) * (-2.0 * tau * c2 + PI / a * coth * s2),
        Stage::III => {
            hbar * g * damp / (w * w * sh)
                * (2.0 * w * tau0 * c2 - PI * w / a * coth * s2 + 2.0 * (w * (tau - tau0)).sin() * (w * (tau + tau0)).cos())
        }
        Stage::ZeroTau0 => {
            let i = Complex64::i();
            let z1 = Complex64::new(0.0, -w / (2.0 * a));
            let z2 = Complex64::new(0.5, -w / (2.0 * a));
            let tri = (i * trigamma_c(z1)? - i * trigamma_c(z2)?).re;
            let di = (digamma_c(z1)? - digamma_c(z2)?).re;
            hbar * g / (PI * w * w)
                * damp
                * (PI / (2.0 * sh) * (1.0 - PI * w / a * coth) * s2 + w / (4.0 * a) * tri * c2 + 0.5 * di * (1.0 - c2))
        }
    })
}

fn step_ramp(x: f64) -> f64 {
    // x theta(x) with theta(0) = 0
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Envelope `chi` of the oscillating cross correlators in the ultraweak limit.
pub fn chi_envelope(p: &ModelParams, tau: f64) -> f64 {
    let (sh, _) = sinh_coth(p);
    -2.0 * p.hbar * p.gamma * (-2.0 * p.gamma * tau).exp() / (p.omega * sh) * (step_ramp(tau) - step_ramp(tau + p.tau0))
}

/// Estimated maximum amplitude of `<Q_A, Q_B>` and the time it is reached.
pub fn max_cross_amplitude(p: &ModelParams) -> (f64, f64) {
    let (sh, _) = sinh_coth(p);
    let (g, w, hbar, tau0) = (p.gamma, p.omega, p.hbar, p.tau0);
    if -tau0 < 1.0 / (2.0 * g) {
        (-tau0, 2.0 * hbar * g * tau0.abs() * (2.0 * g * tau0).exp() / (w * sh))
    } else {
        (1.0 / (2.0 * g), hbar / (std::f64::consts::E * w * sh))
    }
}
