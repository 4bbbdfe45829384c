//! Gaussian-state entanglement measures and the ultraweak-coupling creation window.

use std::f64::consts::PI;

use crate::correlators::{chi_envelope, weak_q, CorrelatorSet};
use crate::error::{Error, Result};
use crate::linalg::{det2, det4, Mat4};
use crate::params::ModelParams;
use crate::specfun::{lambert_w, LambertBranch};

/// Relative slack on the uncertainty bound of each detector block.
const HEISENBERG_SLACK: f64 = 1e-9;
/// Negative discriminants down to this fraction of `Z^2` are rounding noise.
const DISCRIMINANT_CLAMP: f64 = 1e-12;

/// Covariance matrix over `(Q_A, P_A, Q_B, P_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub v: Mat4,
}

impl CovarianceMatrix {
    /// Free ground states `(hbar/2) diag(1/Omega, Omega, 1/Omega, Omega)`.
    pub fn vacuum(omega: f64, hbar: f64) -> Self {
        let mut v = [[0.0; 4]; 4];
        v[0][0] = 0.5 * hbar / omega;
        v[1][1] = 0.5 * hbar * omega;
        v[2][2] = 0.5 * hbar / omega;
        v[3][3] = 0.5 * hbar * omega;
        CovarianceMatrix { v }
    }

    pub fn block(&self, r: usize, c: usize) -> [[f64; 2]; 2] {
        let (i, j) = (2 * r, 2 * c);
        [[self.v[i][j], self.v[i][j + 1]], [self.v[i + 1][j], self.v[i + 1][j + 1]]]
    }

    pub fn det(&self) -> f64 {
        det4(&self.v)
    }

    /// Same state with the two detectors relabelled.
    pub fn swapped(&self) -> Self {
        let perm = [2, 3, 0, 1];
        let mut v = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                v[i][j] = self.v[perm[i]][perm[j]];
            }
        }
        CovarianceMatrix { v }
    }
}

/// Place the correlators in `V`, checking the uncertainty bound of each detector.
pub fn covariance(c: &CorrelatorSet, hbar: f64) -> Result<CovarianceMatrix> {
    let v = [
        [c.qq_aa, c.qp_aa, c.qq_ab, c.qp_ab],
        [c.qp_aa, c.pp_aa, c.pq_ab, c.pp_ab],
        [c.qq_ab, c.pq_ab, c.qq_bb, c.qp_bb],
        [c.qp_ab, c.pp_ab, c.qp_bb, c.pp_bb],
    ];
    let cov = CovarianceMatrix { v };
    let bound = 0.25 * hbar * hbar;
    for (name, k) in [("AA", 0), ("BB", 1)] {
        let d = det2(cov.block(k, k));
        if d < bound * (1.0 - HEISENBERG_SLACK) {
            return Err(Error::NonPhysicalState { block: name, value: d, bound });
        }
    }
    Ok(cov)
}

/// `Z = det v_AA + det v_BB - 2 det v_AB`.
pub fn z_invariant(v: &CovarianceMatrix) -> f64 {
    det2(v.block(0, 0)) + det2(v.block(1, 1)) - 2.0 * det2(v.block(0, 1))
}

/// Symplectic eigenvalues `(c_-, c_+)` of the partially transposed state.
pub fn symplectic_c(v: &CovarianceMatrix) -> Result<(f64, f64)> {
    let z = z_invariant(v);
    let d = v.det();
    let mut disc = z * z - 4.0 * d;
    if disc < 0.0 {
        if disc >= -DISCRIMINANT_CLAMP * z * z {
            disc = 0.0;
        } else {
            return Err(Error::ComplexSpectrum(disc));
        }
    }
    let root = disc.sqrt();
    let plus = 0.5 * (z + root);
    // the smaller root from the product avoids cancellation
    let minus = if plus > 0.0 { d / plus } else { 0.5 * (z - root) };
    Ok((minus.max(0.0).sqrt(), plus.max(0.0).sqrt()))
}

/// `(Sigma, E_N)` from the symplectic eigenvalues.
pub fn measures(c_minus: f64, c_plus: f64, hbar: f64) -> (f64, f64) {
    let h2 = 0.25 * hbar * hbar;
    let sigma = (c_plus * c_plus - h2) * (c_minus * c_minus - h2);
    let en = (-(2.0 * c_minus / hbar).log2()).max(0.0);
    (sigma, en)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub c_minus: f64,
    pub c_plus: f64,
    pub sigma: f64,
    pub e_n: f64,
    pub entangled: bool,
}

pub fn report(v: &CovarianceMatrix, hbar: f64) -> Result<EntanglementReport> {
    let (c_minus, c_plus) = symplectic_c(v)?;
    let (sigma, e_n) = measures(c_minus, c_plus, hbar);
    Ok(EntanglementReport { c_minus, c_plus, sigma, e_n, entangled: c_minus < 0.5 * hbar })
}

/// Whether `c_- < hbar/2`, `Sigma < 0` and `E_N > 0` agree.
pub fn signs_agree(r: &EntanglementReport, hbar: f64) -> bool {
    let a = r.c_minus < 0.5 * hbar;
    a == (r.sigma < 0.0) && a == (r.e_n > 0.0)
}

/// Ultraweak `c_- ~ Omega (Q - |chi|) + (gamma hbar / pi Omega)(Lambda1 - ln(a/Omega))`.
/// Once `Q` has saturated this is the late-time form with `coth(pi Omega / a)`.
pub fn c_minus_weak(p: &ModelParams, tau: f64) -> f64 {
    let (g, w, a, hbar) = (p.gamma, p.omega, p.a, p.hbar);
    w * (weak_q(p, p.eta(tau)) - chi_envelope(p, tau).abs()) + g * hbar / (PI * w) * (p.lambda1 - (a / w).ln())
}

/// `zeta = e^{-pi Omega/a}/2 + (gamma/pi Omega)(Lambda1 - ln(a/Omega)) sinh(pi Omega/a)`.
pub fn zeta(p: &ModelParams) -> f64 {
    let x = PI * p.omega / p.a;
    0.5 * (-x).exp() + p.gamma / (PI * p.omega) * (p.lambda1 - (p.a / p.omega).ln()) * x.sinh()
}

/// `(tau_E, tau_dE)` from the two real Lambert-W branches, or `None` when `zeta >= 1/e`.
pub fn creation_window(p: &ModelParams) -> Option<(f64, f64)> {
    let z = zeta(p);
    let e_inv = (-1.0f64).exp();
    if !(z > 0.0) || z > e_inv * (1.0 + 1e-12) {
        return None;
    }
    let x = (-z).max(-e_inv);
    let w0 = lambert_w(LambertBranch::Principal, x).ok()?;
    let w1 = lambert_w(LambertBranch::Lower, x).ok()?;
    let two_g = 2.0 * p.gamma;
    Some((-w0 / two_g, -w1 / two_g))
}

/// Band of `a/Omega` allowing creation in the ultraweak limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreationBand {
    /// `pi / ln(2 gamma Omega / e gamma Lambda1)` evaluated as written.
    pub lower: f64,
    pub upper: f64,
    /// The lower-bound logarithm is positive, so the bound is meaningful.
    pub lower_defined: bool,
    /// `Lambda1 >> |ln(lower)|` holds (read as a factor 10).
    pub cutoff_condition: bool,
}

pub fn creation_band(p: &ModelParams) -> CreationBand {
    let upper = PI / (std::f64::consts::E / 2.0).ln();
    let arg = 2.0 * p.gamma * p.omega / (std::f64::consts::E * p.gamma * p.lambda1);
    let log = arg.ln();
    let lower = PI / log;
    let lower_defined = log > 0.0 && lower.is_finite();
    let cutoff_condition = lower_defined && p.lambda1 > 10.0 * lower.ln().abs();
    CreationBand { lower, upper, lower_defined, cutoff_condition }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::correlators::{correlator_set, correlator_set_weak, DEFAULT_QUAD_TOL};
    use proptest::prelude::*;

    /// Random physical two-mode state built from symplectic pieces and thermal noise.
    pub(crate) fn random_state(r1: f64, r2: f64, th: f64, ts: f64, n1: f64, n2: f64, hbar: f64) -> CovarianceMatrix {
        let mut s = [[0.0; 4]; 4];
        // two-mode squeezer followed by a beam splitter and local squeezers
        let (ch, sh) = (ts.cosh(), ts.sinh());
        let tms = [[ch, 0.0, sh, 0.0], [0.0, ch, 0.0, -sh], [sh, 0.0, ch, 0.0], [0.0, -sh, 0.0, ch]];
        let (c, sn) = (th.cos(), th.sin());
        let bs = [[c, 0.0, sn, 0.0], [0.0, c, 0.0, sn], [-sn, 0.0, c, 0.0], [0.0, -sn, 0.0, c]];
        let sq = [[r1, 0.0, 0.0, 0.0], [0.0, 1.0 / r1, 0.0, 0.0], [0.0, 0.0, r2, 0.0], [0.0, 0.0, 0.0, 1.0 / r2]];
        let mul = |a: &Mat4, b: &Mat4| {
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
                }
            }
            m
        };
        let t = mul(&sq, &mul(&bs, &tms));
        let d = [n1, n1, n2, n2];
        for i in 0..4 {
            for j in 0..4 {
                s[i][j] = 0.5 * hbar * (0..4).map(|k| t[i][k] * d[k] * t[j][k]).sum::<f64>();
            }
        }
        CovarianceMatrix { v: s }
    }

    #[test]
    fn vacuum_is_at_the_bound() {
        let v = CovarianceMatrix::vacuum(1.3, 1.0);
        let (m, p) = symplectic_c(&v).unwrap();
        assert!((m - 0.5).abs() < 1e-15 && (p - 0.5).abs() < 1e-15);
        let (s, e) = measures(m, p, 1.0);
        assert!(s.abs() < 1e-15 && e == 0.0);
    }

    #[test]
    fn measures_arithmetic() {
        let (s, e) = measures(0.25, 1.0, 1.0);
        assert!((e - 1.0).abs() < 1e-15);
        assert!((s - 0.75 * (-3.0 / 16.0)).abs() < 1e-15);
        assert_eq!(measures(0.7, 0.1, 1.0).1, 0.0);
    }

    #[test]
    fn rejects_sub_heisenberg_blocks() {
        let mut c = CorrelatorSet { qq_aa: 0.3, pp_aa: 0.5, qq_bb: 1.0, pp_bb: 1.0, ..Default::default() };
        assert!(matches!(covariance(&c, 1.0), Err(Error::NonPhysicalState { block: "AA", .. })));
        c.qq_aa = 0.5;
        assert!(covariance(&c, 1.0).is_ok());
    }

    #[test]
    fn two_mode_squeezed_vacuum_values() {
        // c_- = (hbar/2) e^{-2r}
        let r: f64 = 0.4;
        let v = random_state(1.0, 1.0, 0.0, r, 1.0, 1.0, 1.0);
        let (m, p) = symplectic_c(&v).unwrap();
        assert!((m - 0.5 * (-2.0 * r).exp()).abs() < 1e-14 && (p - 0.5 * (2.0 * r).exp()).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn sign_equivalence_and_exchange(r1 in 0.3f64..3.0, r2 in 0.3f64..3.0, th in 0.0f64..3.0, ts in 0.0f64..1.0,
                                         n1 in 1.0f64..3.0, n2 in 1.0f64..3.0) {
            let v = random_state(r1, r2, th, ts, n1, n2, 1.0);
            let r = report(&v, 1.0).unwrap();
            prop_assert!(signs_agree(&r, 1.0));
            prop_assert!(r.c_minus <= r.c_plus);
            let (m, p) = symplectic_c(&v.swapped()).unwrap();
            prop_assert!((m - r.c_minus).abs() <= 1e-12 * r.c_plus && (p - r.c_plus).abs() <= 1e-12 * r.c_plus);
        }
    }

    #[test]
    fn window_values() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, -1e12);
        let (te, tde) = creation_window(&p).unwrap();
        assert!((te - 1e3).abs() < 0.1e3, "{te}");
        assert!((tde - 2.8e5).abs() < 0.28e5, "{tde}");
        assert!(te > 0.0);
        // no window above the band
        let far = ModelParams::new(1e-5, 2.3, 11.0 * 2.3, -1e12);
        assert!(zeta(&far) > (-1.0f64).exp());
        assert!(creation_window(&far).is_none());
    }

    #[test]
    fn weak_c_minus_crosses_at_window_edges() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, -1e12);
        let (te, tde) = creation_window(&p).unwrap();
        for (t, inside) in [(te * 0.999, false), (te * 1.001, true), (tde * 0.999, true), (tde * 1.001, false)] {
            assert_eq!(c_minus_weak(&p, t) < 0.5, inside, "{t}");
        }
    }

    #[test]
    fn window_closes_at_branch_point() {
        // choose Lambda1 so that zeta = 1/e exactly
        let mut p = ModelParams::new(1e-5, 2.3, 1.0, -1e12);
        let x = PI * p.omega / p.a;
        p.lambda1 = ((-1.0f64).exp() - 0.5 * (-x).exp()) * PI * p.omega / (p.gamma * x.sinh()) + (p.a / p.omega).ln();
        let (te, tde) = creation_window(&p).unwrap();
        assert!((te - 0.5 / p.gamma).abs() < 1e-3 / p.gamma && (tde - 0.5 / p.gamma).abs() < 1e-3 / p.gamma);
    }

    #[test]
    fn band_bounds() {
        let b = creation_band(&ModelParams::new(1e-5, 2.3, 1.0, 0.0));
        assert!((b.upper - 10.238).abs() < 1e-3);
        assert!((b.upper - PI / (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!(!b.lower_defined && b.lower < 0.0);
        let tiny = creation_band(&ModelParams::new(1e-5, 2.3, 1.0, 0.0).with_cutoffs(20.0, 1e-6));
        assert!(tiny.lower_defined && tiny.lower > 0.0 && tiny.lower < 0.3);
    }

    #[test]
    fn late_weak_value_is_separable() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, 0.0);
        assert!(c_minus_weak(&p, 1e8) > 0.5);
    }

    #[test]
    fn fig_two_left_inside_and_outside() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -60.0);
        let at = |t: f64| report(&covariance(&correlator_set(&p, t, DEFAULT_QUAD_TOL).unwrap(), 1.0).unwrap(), 1.0).unwrap();
        assert!(at(50.0).entangled);
        assert!(!at(10.0).entangled);
        assert!(!at(100.0).entangled);
    }

    #[test]
    fn weak_matches_full_in_weak_regime() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, -2e5);
        for tau in [5e2, 1e4, 1e5] {
            let full = report(&covariance(&correlator_set(&p, tau, DEFAULT_QUAD_TOL).unwrap(), 1.0).unwrap(), 1.0).unwrap();
            let weak = report(&covariance(&correlator_set_weak(&p, tau).unwrap(), 1.0).unwrap(), 1.0).unwrap();
            assert!((full.c_minus - c_minus_weak(&p, tau)).abs() < 1e-3, "{tau}: {} vs {}", full.c_minus, c_minus_weak(&p, tau));
            assert!((weak.c_minus - c_minus_weak(&p, tau)).abs() < 1e-3);
        }
    }
}
