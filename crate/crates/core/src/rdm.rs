//! Reduced density matrix of the two detectors truncated at the first excited level.

use num_complex::Complex64;

use crate::entanglement::{z_invariant, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ccond4, cdet4, cinv4, inv4, CMat4};
use crate::params::ModelParams;

/// Smallest relative size of `det V` and `G` accepted.
const SINGULAR_FLOOR: f64 = 1e-14;
/// Denominator floor of the identity residual.
const RESIDUAL_FLOOR: f64 = 1e-30;

/// Gaussian-kernel matrix over `(A, A', B, B')` and the scalars it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTilde {
    pub a_a_plus: f64,
    pub a_a_minus: f64,
    pub a_b_plus: f64,
    pub a_b_minus: f64,
    pub a_x_plus: f64,
    pub a_x_minus: f64,
    pub b_a: f64,
    pub b_b: f64,
    pub b_x_plus: f64,
    pub b_x_minus: f64,
    /// `4 (<Q_A^2><Q_B^2> - <Q_A,Q_B>^2)`.
    pub cal_g: f64,
    /// `sqrt(Omega_r / hbar)`.
    pub k: f64,
    pub m: CMat4,
}

pub fn gtilde_assemble(v: &CovarianceMatrix, p: &ModelParams) -> Result<GTilde> {
    let hbar = p.hbar;
    let x = &v.v;
    let (qa, qb, qx) = (x[0][0], x[2][2], x[0][2]);
    let cal_g = 4.0 * (qa * qb - qx * qx);
    if !(cal_g > SINGULAR_FLOOR * 4.0 * qa * qb) {
        return Err(Error::SingularCovariance("G"));
    }
    let det = v.det();
    let scale: f64 = (0..4).map(|i| x[i][i]).product();
    if !(det > SINGULAR_FLOOR * scale) {
        return Err(Error::SingularCovariance("det V"));
    }
    let vi = inv4(x).ok_or(Error::SingularCovariance("V"))?;
    let h2 = 4.0 / (hbar * hbar) * det;
    let half = 0.5 / cal_g;
    let (pa_qa, pa_qb, pb_qb, pb_qa) = (x[1][0], x[1][2], x[3][2], x[3][0]);
    // the A factors carry the B-detector moments, as follows from the Wigner transform
    let a_a_plus = half * (qb + h2 * vi[3][3]);
    let a_a_minus = half * (qb - h2 * vi[3][3]);
    let a_b_plus = half * (qa + h2 * vi[1][1]);
    let a_b_minus = half * (qa - h2 * vi[1][1]);
    let a_x_plus = -half * (qx + h2 * vi[1][3]);
    let a_x_minus = -half * (qx - h2 * vi[1][3]);
    let b_a = 2.0 / (hbar * cal_g) * (pa_qb * qx - pa_qa * qb);
    let b_b = 2.0 / (hbar * cal_g) * (pb_qa * qx - pb_qb * qa);
    let u = pa_qa * qx - pa_qb * qa;
    let w = pb_qb * qx - pb_qa * qb;
    let b_x_plus = (u + w) / (hbar * cal_g);
    let b_x_minus = (u - w) / (hbar * cal_g);

    let k2 = p.omega_r() / hbar;
    let c = Complex64::new;
    let m = [
        [c(a_a_plus + 0.5 * k2, b_a), c(a_a_minus, 0.0), c(a_x_plus, b_x_plus), c(a_x_minus, b_x_minus)],
        [c(a_a_minus, 0.0), c(a_a_plus + 0.5 * k2, -b_a), c(a_x_minus, -b_x_minus), c(a_x_plus, -b_x_plus)],
        [c(a_x_plus, b_x_plus), c(a_x_minus, -b_x_minus), c(a_b_plus + 0.5 * k2, b_b), c(a_b_minus, 0.0)],
        [c(a_x_minus, b_x_minus), c(a_x_plus, -b_x_plus), c(a_b_minus, 0.0), c(a_b_plus + 0.5 * k2, -b_b)],
    ];
    Ok(GTilde {
        a_a_plus,
        a_a_minus,
        a_b_plus,
        a_b_minus,
        a_x_plus,
        a_x_minus,
        b_a,
        b_b,
        b_x_plus,
        b_x_minus,
        cal_g,
        k: k2.sqrt(),
        m,
    })
}

/// Index of `A, A', B, B'` in `GTilde::m` and its inverse.
pub const A: usize = 0;
pub const AP: usize = 1;
pub const B: usize = 2;
pub const BP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedRdm {
    /// Basis `(n_A, n_B) = 00, 01, 10, 11`.
    pub rho: CMat4,
    pub g: f64,
    /// `J = G~^{-1}`.
    pub j: CMat4,
    /// One-norm condition number of `G~`.
    pub cond: f64,
}

impl TruncatedRdm {
    pub fn r1100(&self) -> Complex64 {
        self.rho[3][0]
    }
    pub fn r1010(&self) -> Complex64 {
        self.rho[2][2]
    }
    pub fn r0101(&self) -> Complex64 {
        self.rho[1][1]
    }
    pub fn r0000(&self) -> Complex64 {
        self.rho[0][0]
    }
    pub fn r1111(&self) -> Complex64 {
        self.rho[3][3]
    }
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.rho[i][i].re).sum()
    }
}

pub fn truncated_rdm(gt: &GTilde, p: &ModelParams) -> Result<TruncatedRdm> {
    let j = cinv4(&gt.m).ok_or(Error::SingularGTilde)?;
    let det = cdet4(&gt.m);
    let d = gt.cal_g * det.re;
    if !(d > 0.0) {
        return Err(Error::SingularGTilde);
    }
    let g = p.omega / p.hbar / d.sqrt();
    let k2 = gt.k * gt.k;
    let e = |x: Complex64| x * (g * k2);
    let zero = Complex64::new(0.0, 0.0);
    let r1111 = (j[A][B] * j[AP][BP] + j[A][AP] * j[B][BP] + j[A][BP] * j[AP][B]) * (g * k2 * k2);
    // rows and columns (00, 01, 10, 11); rho_{11,00} carries J^{A'B'}
    let rho = [
        [Complex64::new(g, 0.0), zero, zero, e(j[A][B])],
        [zero, e(j[B][BP]), e(j[A][BP]), zero],
        [zero, e(j[AP][B]), e(j[A][AP]), zero],
        [e(j[AP][BP]), zero, zero, r1111],
    ];
    Ok(TruncatedRdm { rho, g, j, cond: ccond4(&gt.m, &j) })
}

/// Left-hand sides of the two partial-transpose inequalities and whether either fails.
pub fn separability_inequalities(r: &TruncatedRdm) -> (f64, f64, bool) {
    let rho = &r.rho;
    let i1 = (rho[2][2] * rho[1][1] - rho[3][0] * rho[0][3]).re;
    let i2 = (rho[0][0] * rho[3][3] - rho[2][1] * rho[1][2]).re;
    (i1, i2, i1 < 0.0 || i2 < 0.0)
}

/// `Sigma` as a polynomial in `V`: `det V - (hbar^2/4) Z + hbar^4/16`.
pub fn sigma_poly(v: &CovarianceMatrix, hbar: f64) -> f64 {
    let h2 = 0.25 * hbar * hbar;
    v.det() - h2 * z_invariant(v) + h2 * h2
}

fn plus_vacuum(v: &CovarianceMatrix, omega: f64, hbar: f64) -> CovarianceMatrix {
    let v0 = CovarianceMatrix::vacuum(omega, hbar);
    let mut s = *v;
    for i in 0..4 {
        for k in 0..4 {
            s.v[i][k] += v0.v[i][k];
        }
    }
    s
}

/// `J^{AA'}J^{BB'} - J^{AB}J^{A'B'}` with `J = G~^{-1}`.
pub fn j_minor(v: &CovarianceMatrix, p: &ModelParams) -> Result<Complex64> {
    let gt = gtilde_assemble(v, p)?;
    let j = cinv4(&gt.m).ok_or(Error::SingularGTilde)?;
    Ok(j[A][AP] * j[B][BP] - j[A][B] * j[AP][BP])
}

/// `hbar^2 Sigma / (Omega_r^2 det(V + V0))`, with `V0` the ground state at `Omega_r`.
/// This is the positive multiple of `Sigma` that equals [`j_minor`] exactly.
pub fn sigma_identity_rhs(v: &CovarianceMatrix, p: &ModelParams) -> f64 {
    let w = p.omega_r();
    p.hbar * p.hbar * sigma_poly(v, p.hbar) / (w * w * plus_vacuum(v, w, p.hbar).det())
}

/// `Sigma Omega^2 det(V+V0) / (16 hbar^10 [<Q_A^2><Q_B^2> - <Q_A,Q_B>^2]^2)` in its printed form.
pub fn sigma_identity_rhs_printed(v: &CovarianceMatrix, p: &ModelParams) -> f64 {
    let x = &v.v;
    let q = x[0][0] * x[2][2] - x[0][2] * x[0][2];
    let w = p.omega;
    sigma_poly(v, p.hbar) * w * w * plus_vacuum(v, w, p.hbar).det() / (16.0 * p.hbar.powi(10) * q * q)
}

/// Relative residual between [`j_minor`] and [`sigma_identity_rhs`].
///
/// Both sides are evaluated from the same `V` in double-double arithmetic. Near the
/// separability boundary `Sigma` is many orders below the moments it is built from,
/// so a double-precision check would only measure rounding.
pub fn sigma_equivalence_residual(v: &CovarianceMatrix, p: &ModelParams) -> Result<f64> {
    gtilde_assemble(v, p)?;
    let (lhs, rhs) = wide::identity_sides(v, p);
    let lhs = Complex64::new(lhs.re.into(), lhs.im.into());
    let rhs: f64 = rhs.into();
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.abs()).max(RESIDUAL_FLOOR))
}

mod wide {
    use num_complex::Complex;
    use num_traits::Float;
    use twofloat::TwoFloat;

    use super::{A, AP, B, BP};
    use crate::entanglement::CovarianceMatrix;
    use crate::params::ModelParams;

    type T = TwoFloat;
    type M = [[T; 4]; 4];

    fn t(x: f64) -> T {
        T::from(x)
    }

    fn det3<F: Float>(m: [[F; 3]; 3]) -> F {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn minor(m: &M, r: usize, c: usize) -> T {
        let mut s = [[t(0.0); 3]; 3];
        for (i2, i) in (0..4).filter(|&i| i != r).enumerate() {
            for (k2, k) in (0..4).filter(|&k| k != c).enumerate() {
                s[i2][k2] = m[i][k];
            }
        }
        det3(s)
    }

    fn cofactor(m: &M, r: usize, c: usize) -> T {
        let x = minor(m, r, c);
        if (r + c).is_multiple_of(2) {
            x
        } else {
            -x
        }
    }

    fn det(m: &M) -> T {
        (0..4).fold(t(0.0), |acc, c| acc + m[0][c] * cofactor(m, 0, c))
    }

    fn cdet(m: &[[Complex<T>; 4]; 4]) -> Complex<T> {
        let mut a = *m;
        let zero = Complex::new(t(0.0), t(0.0));
        let mut d = Complex::new(t(1.0), t(0.0));
        for c in 0..4 {
            let p = (c..4).max_by(|&i, &j| a[i][c].norm_sqr().partial_cmp(&a[j][c].norm_sqr()).unwrap()).unwrap();
            if a[p][c] == zero {
                return zero;
            }
            if p != c {
                a.swap(p, c);
                d = -d;
            }
            d *= a[c][c];
            for r in c + 1..4 {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        d
    }

    fn det2(m: &M, r: usize, c: usize) -> T {
        m[r][c] * m[r + 1][c + 1] - m[r][c + 1] * m[r + 1][c]
    }

    /// `(J^{AA'}J^{BB'} - J^{AB}J^{A'B'}, rhs)`.
    pub fn identity_sides(v: &CovarianceMatrix, p: &ModelParams) -> (Complex<T>, T) {
        let mut x = [[t(0.0); 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                x[i][k] = t(v.v[i][k]);
            }
        }
        let hbar = t(p.hbar);
        let dv = det(&x);
        let h2 = t(4.0) / (hbar * hbar) * dv;
        // symmetric V: (V^-1)_ik = C_ik / det V
        let vi = |i: usize, k: usize| cofactor(&x, i, k) / dv;
        let (qa, qb, qx) = (x[0][0], x[2][2], x[0][2]);
        let cal_g = t(4.0) * (qa * qb - qx * qx);
        let half = t(0.5) / cal_g;
        let (pa_qa, pa_qb, pb_qb, pb_qa) = (x[1][0], x[1][2], x[3][2], x[3][0]);
        let a_a_plus = half * (qb + h2 * vi(3, 3));
        let a_a_minus = half * (qb - h2 * vi(3, 3));
        let a_b_plus = half * (qa + h2 * vi(1, 1));
        let a_b_minus = half * (qa - h2 * vi(1, 1));
        let a_x_plus = -half * (qx + h2 * vi(1, 3));
        let a_x_minus = -half * (qx - h2 * vi(1, 3));
        let hg = hbar * cal_g;
        let b_a = t(2.0) / hg * (pa_qb * qx - pa_qa * qb);
        let b_b = t(2.0) / hg * (pb_qa * qx - pb_qb * qa);
        let u = pa_qa * qx - pa_qb * qa;
        let w = pb_qb * qx - pb_qa * qb;
        let b_x_plus = (u + w) / hg;
        let b_x_minus = (u - w) / hg;
        let (om, ga) = (t(p.omega), t(p.gamma));
        let wr2 = om * om + ga * ga;
        let hk = t(0.5) * wr2.sqrt() / hbar;
        let c = Complex::new;
        let g = [
            [c(a_a_plus + hk, b_a), c(a_a_minus, t(0.0)), c(a_x_plus, b_x_plus), c(a_x_minus, b_x_minus)],
            [c(a_a_minus, t(0.0)), c(a_a_plus + hk, -b_a), c(a_x_minus, -b_x_minus), c(a_x_plus, -b_x_plus)],
            [c(a_x_plus, b_x_plus), c(a_x_minus, -b_x_minus), c(a_b_plus + hk, b_b), c(a_b_minus, t(0.0))],
            [c(a_x_minus, b_x_minus), c(a_x_plus, -b_x_plus), c(a_b_minus, t(0.0)), c(a_b_plus + hk, -b_b)],
        ];
        // G~ is symmetric, so the product is the inverse minor on rows (A, B'), columns (A', B),
        // which equals the complementary minor of G~ over det G~
        let comp = g[A][AP] * g[BP][B] - g[A][B] * g[BP][AP];
        let lhs = comp / cdet(&g);

        let q = hbar * hbar * t(0.25);
        let z = det2(&x, 0, 0) + det2(&x, 2, 2) - t(2.0) * det2(&x, 0, 2);
        let sigma = dv - q * z + q * q;
        let wr = wr2.sqrt();
        let mut s = x;
        s[0][0] += t(0.5) * hbar / wr;
        s[1][1] += t(0.5) * hbar * wr;
        s[2][2] += t(0.5) * hbar / wr;
        s[3][3] += t(0.5) * hbar * wr;
        let rhs = hbar * hbar * sigma / (wr2 * det(&s));
        (lhs, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{correlator_set, correlator_set_weak, DEFAULT_QUAD_TOL};
    use crate::entanglement::{covariance, report, tests::random_state};
    use proptest::prelude::*;

    fn rdm_at(p: &ModelParams, v: &CovarianceMatrix) -> TruncatedRdm {
        truncated_rdm(&gtilde_assemble(v, p).unwrap(), p).unwrap()
    }

    #[test]
    fn vacuum_factors() {
        let p = ModelParams::new(0.01, 1.3, 2.0, 0.0);
        let v = CovarianceMatrix::vacuum(p.omega, 1.0);
        let g = gtilde_assemble(&v, &p).unwrap();
        assert!((g.a_a_plus - 0.65).abs() < 1e-14 && (g.a_b_plus - 0.65).abs() < 1e-14);
        for x in [g.a_a_minus, g.a_x_plus, g.a_x_minus, g.b_a, g.b_b, g.b_x_plus, g.b_x_minus] {
            assert!(x.abs() < 1e-14);
        }
        let r = rdm_at(&p, &v);
        assert!(r.r1100().norm() < 1e-14 && r.r1010().norm() < 1e-14);
        assert!((r.r0000().re - 1.0).abs() < 1e-4);
        let (i1, i2, ent) = separability_inequalities(&r);
        assert!(i1 >= 0.0 && i2 >= 0.0 && !ent);
    }

    #[test]
    fn gaussian_kernel_matches_wigner_transform() {
        // x_A^2 coefficient of -ln rho(x, x') from the conditional moments of P given Q
        let p = ModelParams::new(0.1, 1.3, 1.0, 0.0);
        let v = random_state(1.3, 0.8, 0.7, 0.3, 1.2, 1.5, 1.0);
        let g = gtilde_assemble(&v, &p).unwrap();
        let x = &v.v;
        let qq = [[x[0][0], x[0][2]], [x[0][2], x[2][2]]];
        let dq = qq[0][0] * qq[1][1] - qq[0][1] * qq[1][0];
        let qi = [[qq[1][1] / dq, -qq[0][1] / dq], [-qq[1][0] / dq, qq[0][0] / dq]];
        let pq = [[x[1][0], x[1][2]], [x[3][0], x[3][2]]];
        let pp = [[x[1][1], x[1][3]], [x[3][1], x[3][3]]];
        let mut s = pp;
        let mut n = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                n[i][j] = (0..2).map(|k| pq[i][k] * qi[k][j]).sum();
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] -= (0..2).map(|k| n[i][k] * pq[j][k]).sum::<f64>();
            }
        }
        let re = qi[0][0] / 8.0 + s[0][0] / 2.0;
        let im = -n[0][0] / 2.0;
        assert!((g.a_a_plus - re).abs() < 1e-13 && (g.b_a - im).abs() < 1e-13);
        let re_b = qi[1][1] / 8.0 + s[1][1] / 2.0;
        assert!((g.a_b_plus - re_b).abs() < 1e-13);
        let re_x = qi[0][1] / 8.0 + s[0][1] / 2.0;
        assert!((g.a_x_plus - re_x).abs() < 1e-13);
    }

    #[test]
    fn hermitian_with_printed_sparsity() {
        let p = ModelParams::new(0.1, 1.3, 1.0, 0.0);
        let r = rdm_at(&p, &random_state(1.3, 0.8, 0.7, 0.3, 1.2, 1.5, 1.0));
        for i in 0..4 {
            for j in 0..4 {
                assert!((r.rho[i][j] - r.rho[j][i].conj()).norm() < 1e-14 * r.g);
            }
            assert!(r.rho[i][i].im.abs() < 1e-14 * r.g && r.rho[i][i].re >= 0.0);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            assert_eq!(r.rho[i][j], Complex64::new(0.0, 0.0));
        }
    }

    proptest! {
        #[test]
        fn sigma_identity_holds(r1 in 0.4f64..2.5, r2 in 0.4f64..2.5, th in 0.0f64..3.0, ts in 0.0f64..0.8,
                                n1 in 1.0f64..2.0, n2 in 1.0f64..2.0, g in 0.001f64..0.3, hbar in 0.5f64..2.0) {
            let mut p = ModelParams::new(g, 1.3, 1.0, 0.0);
            p.hbar = hbar;
            let v = random_state(r1, r2, th, ts, n1, n2, hbar);
            prop_assert!(sigma_equivalence_residual(&v, &p).unwrap() < 1e-8);
            let (lhs, rhs) = (j_minor(&v, &p).unwrap(), sigma_identity_rhs(&v, &p));
            prop_assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(rhs.abs()) + 1e-12);
            let (i1, _, _) = separability_inequalities(&rdm_at(&p, &v));
            prop_assert_eq!(i1 < 0.0, sigma_poly(&v, hbar) < 0.0);
        }
    }

    #[test]
    fn printed_identity_is_not_proportional() {
        // the printed right-hand side keeps the sign of Sigma but not the magnitude
        let p = ModelParams::new(0.1, 1.3, 1.0, 0.0);
        let ratios: Vec<f64> = [(1.2, 0.3), (0.7, 0.1), (1.0, 0.5)]
            .iter()
            .map(|&(r1, ts)| {
                let v = random_state(r1, 1.1, 0.4, ts, 1.1, 1.2, 1.0);
                j_minor(&v, &p).unwrap().re / sigma_identity_rhs_printed(&v, &p)
            })
            .collect();
        assert!(ratios.iter().all(|&r| r > 0.0));
        assert!((ratios[0] - ratios[1]).abs() > 0.1 * ratios[0]);
    }

    #[test]
    fn pipeline_identity_and_window() {
        let p = ModelParams::new(0.01, 1.3, 2.0, -60.0);
        for tau in [10.0, 50.0, 100.0] {
            let v = covariance(&correlator_set(&p, tau, DEFAULT_QUAD_TOL).unwrap(), 1.0).unwrap();
            assert!(sigma_equivalence_residual(&v, &p).unwrap() < 1e-8);
            let r = rdm_at(&p, &v);
            let (i1, _, _) = separability_inequalities(&r);
            assert_eq!(i1 < 0.0, report(&v, 1.0).unwrap().entangled, "{tau}");
            assert_eq!(r.r1100().norm() > r.r1010().norm(), tau == 50.0, "{tau}");
        }
    }

    #[test]
    fn weak_coupling_coherence() {
        let p = ModelParams::new(1e-5, 2.3, 1.0, -2e4);
        for tau in [3e3, 1e4] {
            let v = covariance(&correlator_set_weak(&p, tau).unwrap(), 1.0).unwrap();
            let g = gtilde_assemble(&v, &p).unwrap();
            let r = truncated_rdm(&g, &p).unwrap();
            let k2 = g.k * g.k;
            let approx = -Complex64::new(g.a_x_plus, -g.b_x_plus) * (r.g * k2) / (0.5 * k2 + g.a_a_plus).powi(2);
            assert!((r.r1100() - approx).norm() < 0.02 * approx.norm(), "{tau}: {} vs {approx}", r.r1100());
            assert!(r.trace() < 1.0 + 1e-6);
        }
    }
}
