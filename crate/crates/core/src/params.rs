use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::EULER_GAMMA;

/// Physical parameters of one scenario.
///
/// `omega` is the oscillation frequency of the damped detector; the natural
/// (renormalized) frequency is `omega_r = sqrt(omega^2 + gamma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub omega: f64,
    pub a: f64,
    pub hbar: f64,
    pub tau0: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Switch-on cutoff constant.
    pub lambda0: f64,
    /// Time-resolution cutoff constant.
    pub lambda1: f64,
}

impl ModelParams {
    /// Detectors starting in their free ground states, `hbar = 1`, both cutoffs 20.
    pub fn new(gamma: f64, omega: f64, a: f64, tau0: f64) -> Self {
        let mut p = ModelParams {
            gamma,
            omega,
            a,
            hbar: 1.0,
            tau0,
            alpha: 1.0,
            beta: 1.0,
            lambda0: 20.0,
            lambda1: 20.0,
        };
        p.alpha = p.omega_r().sqrt();
        p.beta = p.alpha;
        p
    }

    pub fn with_cutoffs(mut self, lambda0: f64, lambda1: f64) -> Self {
        self.lambda0 = lambda0;
        self.lambda1 = lambda1;
        self
    }

    pub fn with_widths(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("Omega", self.omega),
            ("a", self.a),
            ("hbar", self.hbar),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("tau0", self.tau0), ("Lambda0", self.lambda0), ("Lambda1", self.lambda1)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn omega_r(&self) -> f64 {
        self.omega.hypot(self.gamma)
    }

    /// Coupling squared, `lambda_0^2 = 8 pi gamma`.
    pub fn coupling_sq(&self) -> f64 {
        8.0 * PI * self.gamma
    }

    pub fn eta(&self, tau: f64) -> f64 {
        tau - self.tau0
    }

    /// Physical time cutoff matching a cutoff constant: `e^{-Lambda - gamma_e} / Omega`.
    pub fn eps_for(&self, lambda: f64) -> f64 {
        (-lambda - EULER_GAMMA).exp() / self.omega
    }

    /// Inverse of [`ModelParams::eps_for`].
    pub fn lambda_for(&self, eps: f64) -> f64 {
        -(self.omega * eps).ln() - EULER_GAMMA
    }

    pub fn eps0(&self) -> f64 {
        self.eps_for(self.lambda0)
    }

    /// Cutoff used by the self-correlator quadrature.
    pub fn eps_phys(&self) -> f64 {
        self.eps_for(self.lambda1)
    }

    /// `gamma * max(Lambda0, Lambda1, 1) << min(a, Omega)`, with `<<` read as a factor 10.
    pub fn ultraweak(&self) -> bool {
        self.gamma * self.lambda0.max(self.lambda1).max(1.0) * 10.0 < self.a.min(self.omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_widths() {
        let p = ModelParams::new(0.1, 1.3, 1.0, -60.0);
        assert!((p.alpha * p.alpha - (1.3f64 * 1.3 + 0.01).sqrt()).abs() < 1e-15);
        assert_eq!(p.alpha, p.beta);
        p.validate().unwrap();
    }

    #[test]
    fn cutoff_mapping_roundtrip() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, 0.0);
        let eps = p.eps_for(14.0);
        assert!((eps - (-14.0 - EULER_GAMMA).exp() / 2.3).abs() < 1e-22);
        assert!((p.lambda_for(eps) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = ModelParams::new(0.01, 1.3, 2.0, -60.0);
        p.a = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::new(0.01, 1.3, 2.0, -60.0);
        p.tau0 = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn ultraweak_guard() {
        assert!(ModelParams::new(1e-5, 2.3, 1.0, 0.0).ultraweak());
        assert!(!ModelParams::new(0.1, 1.3, 1.0, 0.0).ultraweak());
    }
}
