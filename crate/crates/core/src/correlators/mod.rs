//! Two-point functions of the detector pair.

pub mod approx;
pub mod cross;
pub mod selfcorr;

pub use approx::{chi_envelope, max_cross_amplitude, stage_approx, Stage};
pub use cross::{cross_qq_exact, cross_qq_quad, cross_set_exact, cross_set_fd, cross_set_quad, CrossSet};
pub use selfcorr::{a_part, self_v_quad, self_v_with_eps, self_weak_closed, weak_q, SelfSet};

use crate::error::{Error, Result};
use crate::field::Detector;
use crate::params::ModelParams;

/// Default tolerance for the self-correlator quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// The ten symmetrized equal-time two-point functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrelatorSet {
    pub qq_aa: f64,
    pub pp_aa: f64,
    pub qp_aa: f64,
    pub qq_bb: f64,
    pub pp_bb: f64,
    pub qp_bb: f64,
    pub qq_ab: f64,
    pub qp_ab: f64,
    pub pq_ab: f64,
    pub pp_ab: f64,
    pub tau: f64,
}

impl CorrelatorSet {
    pub fn from_parts(tau: f64, a: SelfSet, b: SelfSet, x: CrossSet) -> Result<Self> {
        let c = CorrelatorSet {
            qq_aa: a.qq,
            pp_aa: a.pp,
            qp_aa: a.qp,
            qq_bb: b.qq,
            pp_bb: b.pp,
            qp_bb: b.qp,
            qq_ab: x.qq,
            qp_ab: x.qp,
            pq_ab: x.pq,
            pp_ab: x.pp,
            tau,
        };
        c.check()?;
        Ok(c)
    }

    fn entries(&self) -> [f64; 10] {
        [
            self.qq_aa, self.pp_aa, self.qp_aa, self.qq_bb, self.pp_bb, self.qp_bb, self.qq_ab, self.qp_ab, self.pq_ab,
            self.pp_ab,
        ]
    }

    fn check(&self) -> Result<()> {
        if self.entries().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonConvergence(format!("non-finite correlator at tau = {}", self.tau)));
        }
        for (name, v) in [("qq_aa", self.qq_aa), ("pp_aa", self.pp_aa), ("qq_bb", self.qq_bb), ("pp_bb", self.pp_bb)] {
            if v < 0.0 {
                return Err(Error::NonPhysicalState { block: name, value: v, bound: 0.0 });
            }
        }
        Ok(())
    }
}

/// Full correlators at proper time `tau`: closed-form cross terms, quadrature v-part
/// and homogeneous a-part for the self terms.
pub fn correlator_set(p: &ModelParams, tau: f64, quad_tol: f64) -> Result<CorrelatorSet> {
    let eta = p.eta(tau);
    let x = if eta == 0.0 { CrossSet::default() } else { cross_set_exact(p, tau)? };
    let v = self_v_quad(p, tau, quad_tol)?;
    let a = a_part(p, eta, Detector::A)? + v;
    let b = a_part(p, eta, Detector::B)? + v;
    CorrelatorSet::from_parts(tau, a, b, x)
}

/// Ultraweak-coupling correlators: closed self forms and the oscillating envelope `chi`.
pub fn correlator_set_weak(p: &ModelParams, tau: f64) -> Result<CorrelatorSet> {
    let s = self_weak_closed(p, p.eta(tau));
    let chi = chi_envelope(p, tau);
    let w = p.omega;
    let (sn, cs) = (2.0 * w * tau).sin_cos();
    let x = CrossSet { qq: chi * cs, qp: -w * chi * sn, pq: -w * chi * sn, pp: -w * w * chi * cs };
    CorrelatorSet::from_parts(tau, s, s, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_state_at_switch_on() {
        let p = ModelParams::new(0.1, 1.3, 1.0, -60.0).with_widths(0.9, 1.4);
        let c = correlator_set(&p, -60.0, DEFAULT_QUAD_TOL).unwrap();
        assert_eq!((c.qq_ab, c.qp_ab, c.pq_ab, c.pp_ab), (0.0, 0.0, 0.0, 0.0));
        assert!((c.qq_aa - 0.5 / 0.81).abs() < 1e-15 && (c.pp_aa - 0.5 * 0.81).abs() < 1e-15 && c.qp_aa == 0.0);
        assert!((c.qq_bb - 0.5 / 1.96).abs() < 1e-15 && (c.pp_bb - 0.5 * 1.96).abs() < 1e-15);
    }

    #[test]
    fn cauchy_schwarz_along_fig_two() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -60.0);
        for tau in [-50.0, 0.0, 20.0, 60.0, 120.0] {
            let c = correlator_set(&p, tau, DEFAULT_QUAD_TOL).unwrap();
            assert!(c.qq_ab.abs() <= (c.qq_aa * c.qq_bb).sqrt());
        }
    }

    #[test]
    fn weak_cross_terms_track_exact_at_late_times() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, -2e5);
        for tau in [1e3, 2e4] {
            let w = correlator_set_weak(&p, tau).unwrap();
            let x = cross_set_exact(&p, tau).unwrap();
            let scale = w.qq_ab.abs().max(1e-300) / (2.0 * p.omega * tau).cos().abs().max(1e-3);
            assert!((w.qq_ab - x.qq).abs() < 0.02 * scale, "{tau}: {} vs {}", w.qq_ab, x.qq);
            assert!((w.pp_ab - x.pp).abs() < 0.02 * scale * p.omega * p.omega, "{tau}: {} vs {}", w.pp_ab, x.pp);
        }
    }

    #[test]
    fn late_time_cross_decay() {
        let p = ModelParams::new(0.1, 1.3, 1.0, -10.0);
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let tau = 30.0 + 10.0 * k as f64;
            let amp = (0..50).map(|i| cross_qq_exact(&p, tau + i as f64 * 0.05, tau + i as f64 * 0.05).unwrap().abs()).fold(0.0, f64::max);
            assert!(amp < prev);
            prev = amp;
        }
    }
}
