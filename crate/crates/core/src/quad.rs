//! Adaptive Gauss-Kronrod quadrature in one and two dimensions.
//!
//! Both integrators are globally adaptive: the interval (rectangle) with the
//! largest error estimate is split until the summed error meets the
//! tolerance. Final sums are taken in order of position, so results do not
//! depend on the order in which cells were refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: closed under addition and real scaling.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
    /// Real part of the first component, used only in error reports.
    fn report(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn report(&self) -> f64 {
        *self
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn report(&self) -> f64 {
        self.re
    }
}

/// Fixed-size vector of values integrated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vals<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Vals<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for i in 0..N {
            self.0[i] += o.0[i];
        }
        self
    }
}

impl<const N: usize> Sub for Vals<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for i in 0..N {
            self.0[i] -= o.0[i];
        }
        self
    }
}

impl<const N: usize> Mul<f64> for Vals<N> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for v in self.0.iter_mut() {
            *v *= s;
        }
        self
    }
}

impl<const N: usize> QuadValue for Vals<N> {
    fn zero() -> Self {
        Vals([0.0; N])
    }
    fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    fn report(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }
}

/// Tolerances and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadConfig { abs_tol, rel_tol, max_evals: 2_000_000 }
    }

    pub fn with_max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }

    fn target(&self, value: f64, magnitude: f64) -> f64 {
        // below ~100 ulps of the integrand mass the error estimate is noise
        self.abs_tol.max(self.rel_tol * value).max(100.0 * f64::EPSILON * magnitude)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

struct Seg<T> {
    a: f64,
    b: f64,
    val: T,
    mag: f64,
    err: f64,
}

impl<T> PartialEq for Seg<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T> Eq for Seg<T> {}
impl<T> PartialOrd for Seg<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Seg<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then_with(|| o.a.total_cmp(&self.a))
    }
}

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mag = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        let s = f1 + f2;
        kron = kron + s * WGK[j];
        mag += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let err = (kron - gauss * h).norm();
    (kron, err, mag * h.abs())
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<T>> {
    integrate_pts(f, &[a, b], cfg)
}

/// Adaptive integral over consecutive intervals `pts[0]..pts[1]..pts[n]`.
pub fn integrate_pts<T: QuadValue, F: Fn(f64) -> T>(f: F, pts: &[f64], cfg: &QuadConfig) -> Result<QuadResult<T>> {
    if pts.len() < 2 {
        return Ok(QuadResult { value: T::zero(), error: 0.0, evals: 0 });
    }
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in pts.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (val, err, mag) = gk15(&f, w[0], w[1]);
        evals += 15;
        heap.push(Seg { a: w[0], b: w[1], val, mag, err });
    }
    let (mut val, mut err, mut mag) = totals(heap.iter());
    let mut steps = 0usize;
    loop {
        if err <= cfg.target(val.norm(), mag) {
            // confirm with a fresh sum before stopping
            (val, err, mag) = totals(heap.iter());
            if err <= cfg.target(val.norm(), mag) {
                break;
            }
        }
        if evals >= cfg.max_evals {
            return Err(Error::QuadratureNonConvergence { value: val.report(), error: err, evals });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            return Err(Error::QuadratureNonConvergence { value: val.report(), error: err, evals });
        }
        let (v1, e1, m1) = gk15(&f, worst.a, m);
        let (v2, e2, m2) = gk15(&f, m, worst.b);
        evals += 30;
        val = val - worst.val + v1 + v2;
        err += e1 + e2 - worst.err;
        mag += m1 + m2 - worst.mag;
        heap.push(Seg { a: worst.a, b: m, val: v1, mag: m1, err: e1 });
        heap.push(Seg { a: m, b: worst.b, val: v2, mag: m2, err: e2 });
        steps += 1;
        if steps.is_multiple_of(512) {
            (val, err, mag) = totals(heap.iter());
        }
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, error, _) = totals(segs.iter());
    Ok(QuadResult { value, error, evals })
}

fn totals<'a, T: QuadValue + 'a>(it: impl Iterator<Item = &'a Seg<T>>) -> (T, f64, f64) {
    let mut v = T::zero();
    let mut e = 0.0;
    let mut m = 0.0;
    for s in it {
        v = v + s.val;
        e += s.err;
        m += s.mag;
    }
    (v, e, m)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

struct Cell<T> {
    r: Rect,
    val: T,
    mag: f64,
    err: f64,
    split_x: bool,
}

impl<T> PartialEq for Cell<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T> Eq for Cell<T> {}
impl<T> PartialOrd for Cell<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Cell<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err
            .total_cmp(&o.err)
            .then_with(|| o.r.x0.total_cmp(&self.r.x0))
            .then_with(|| o.r.y0.total_cmp(&self.r.y0))
    }
}

const NODES: [f64; 15] = [
    -XGK[0], -XGK[1], -XGK[2], -XGK[3], -XGK[4], -XGK[5], -XGK[6], 0.0, XGK[6], XGK[5], XGK[4], XGK[3], XGK[2], XGK[1], XGK[0],
];
const KW: [f64; 15] = [
    WGK[0], WGK[1], WGK[2], WGK[3], WGK[4], WGK[5], WGK[6], WGK[7], WGK[6], WGK[5], WGK[4], WGK[3], WGK[2], WGK[1], WGK[0],
];
const GW: [f64; 15] = [0.0, WG[0], 0.0, WG[1], 0.0, WG[2], 0.0, WG[3], 0.0, WG[2], 0.0, WG[1], 0.0, WG[0], 0.0];

fn cell<T: QuadValue, F: Fn(f64, f64) -> T>(f: &F, r: Rect) -> Cell<T> {
    let cx = 0.5 * (r.x0 + r.x1);
    let hx = 0.5 * (r.x1 - r.x0);
    let cy = 0.5 * (r.y0 + r.y1);
    let hy = 0.5 * (r.y1 - r.y0);
    let mut kk = T::zero();
    let mut gk = T::zero(); // Gauss in x, Kronrod in y
    let mut kg = T::zero();
    let mut gg = T::zero();
    let mut mag = 0.0;
    for i in 0..15 {
        let x = cx + hx * NODES[i];
        let mut row_k = T::zero();
        let mut row_g = T::zero();
        let mut row_mag = 0.0;
        for j in 0..15 {
            let v = f(x, cy + hy * NODES[j]);
            row_k = row_k + v * KW[j];
            row_mag += v.norm() * KW[j];
            if GW[j] != 0.0 {
                row_g = row_g + v * GW[j];
            }
        }
        kk = kk + row_k * KW[i];
        kg = kg + row_g * KW[i];
        mag += row_mag * KW[i];
        if GW[i] != 0.0 {
            gk = gk + row_k * GW[i];
            gg = gg + row_g * GW[i];
        }
    }
    let area = hx * hy;
    let err_x = (kk - gk).norm() * area.abs();
    let err_y = (kk - kg).norm() * area.abs();
    let err_xy = (kk - gg).norm() * area.abs();
    Cell { r, val: kk * area, mag: mag * area.abs(), err: err_xy.max(err_x + err_y), split_x: err_x >= err_y }
}

/// Adaptive 2D integral over a rectangle, starting from an `nx x ny` grid.
pub fn integrate_2d<T: QuadValue, F: Fn(f64, f64) -> T>(
    f: F,
    r: Rect,
    nx: usize,
    ny: usize,
    cfg: &QuadConfig,
) -> Result<QuadResult<T>> {
    if r.x0 == r.x1 || r.y0 == r.y1 {
        return Ok(QuadResult { value: T::zero(), error: 0.0, evals: 0 });
    }
    let nx = nx.max(1);
    let ny = ny.max(1);
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for i in 0..nx {
        let x0 = r.x0 + (r.x1 - r.x0) * i as f64 / nx as f64;
        let x1 = if i + 1 == nx { r.x1 } else { r.x0 + (r.x1 - r.x0) * (i + 1) as f64 / nx as f64 };
        for j in 0..ny {
            let y0 = r.y0 + (r.y1 - r.y0) * j as f64 / ny as f64;
            let y1 = if j + 1 == ny { r.y1 } else { r.y0 + (r.y1 - r.y0) * (j + 1) as f64 / ny as f64 };
            heap.push(cell(&f, Rect { x0, x1, y0, y1 }));
            evals += 225;
        }
    }
    let (mut val, mut err, mut mag) = cell_totals(heap.iter());
    let mut steps = 0usize;
    loop {
        if err <= cfg.target(val.norm(), mag) {
            (val, err, mag) = cell_totals(heap.iter());
            if err <= cfg.target(val.norm(), mag) {
                break;
            }
        }
        if evals >= cfg.max_evals {
            return Err(Error::QuadratureNonConvergence { value: val.report(), error: err, evals });
        }
        let worst = heap.pop().expect("nonempty");
        val = val - worst.val;
        err -= worst.err;
        mag -= worst.mag;
        let w = worst.r;
        let halves = if worst.split_x {
            let m = 0.5 * (w.x0 + w.x1);
            [Rect { x1: m, ..w }, Rect { x0: m, ..w }]
        } else {
            let m = 0.5 * (w.y0 + w.y1);
            [Rect { y1: m, ..w }, Rect { y0: m, ..w }]
        };
        for h in halves {
            let c = cell(&f, h);
            val = val + c.val;
            err += c.err;
            mag += c.mag;
            heap.push(c);
            evals += 225;
        }
        steps += 1;
        if steps.is_multiple_of(512) {
            (val, err, mag) = cell_totals(heap.iter());
        }
    }
    let mut cells = heap.into_vec();
    cells.sort_by(|a, b| a.r.x0.total_cmp(&b.r.x0).then_with(|| a.r.y0.total_cmp(&b.r.y0)));
    let (value, error, _) = cell_totals(cells.iter());
    Ok(QuadResult { value, error, evals })
}

fn cell_totals<'a, T: QuadValue + 'a>(it: impl Iterator<Item = &'a Cell<T>>) -> (T, f64, f64) {
    let mut v = T::zero();
    let mut e = 0.0;
    let mut m = 0.0;
    for c in it {
        v = v + c.val;
        e += c.err;
        m += c.mag;
    }
    (v, e, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::new(1e-14, 1e-12)
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &cfg()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert_relative_eq!(r.value, exact, max_relative = 1e-14);
        assert_eq!(r.evals, 15);
    }

    #[test]
    fn oscillatory_integral() {
        let r = integrate(|x: f64| (20.0 * x).sin() * (-x).exp(), 0.0, 10.0, &cfg()).unwrap();
        // int_0^L e^{-x} sin(kx) = k/(1+k^2) (1 - e^{-L}(cos kL + sin kL / k))
        let (k, l) = (20.0f64, 10.0f64);
        let exact = k / (1.0 + k * k) * (1.0 - (-l).exp() * ((k * l).cos() + (k * l).sin() / k));
        assert_relative_eq!(r.value, exact, max_relative = 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, &QuadConfig::new(1e-10, 1e-10)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn complex_values() {
        let r = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, &cfg()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn reports_nonconvergence() {
        let c = QuadConfig::new(1e-14, 1e-14).with_max_evals(100);
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &c).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn two_dimensional_separable() {
        let r = integrate_2d(
            |x: f64, y: f64| (x * 3.0).cos() * (-y * y).exp(),
            Rect { x0: 0.0, x1: 2.0, y0: -1.0, y1: 3.0 },
            1,
            1,
            &cfg(),
        )
        .unwrap();
        let ix = (6.0f64).sin() / 3.0;
        // int_{-1}^{3} e^{-y^2} by 1D quadrature
        let iy = integrate(|y: f64| (-y * y).exp(), -1.0, 3.0, &cfg()).unwrap().value;
        assert_relative_eq!(r.value, ix * iy, max_relative = 1e-11);
    }

    #[test]
    fn two_dimensional_ridge() {
        // sech^2 ridge along x + y = 0, integrated exactly over a symmetric square
        let r = integrate_2d(
            |x: f64, y: f64| 1.0 / (0.5 * (x + y)).cosh().powi(2),
            Rect { x0: -5.0, x1: 5.0, y0: -5.0, y1: 5.0 },
            2,
            2,
            &QuadConfig::new(1e-12, 1e-11),
        )
        .unwrap();
        // u = x + y, v = x - y: the v-extent at fixed u is 2(10 - |u|), Jacobian 1/2
        let exact = integrate(|u: f64| (10.0 - u.abs()) / (0.5 * u).cosh().powi(2), -10.0, 10.0, &cfg()).unwrap().value;
        assert_relative_eq!(r.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn vector_values() {
        let r = integrate(|x: f64| Vals([x, x * x]), 0.0, 3.0, &cfg()).unwrap();
        assert_relative_eq!(r.value.0[0], 4.5, max_relative = 1e-14);
        assert_relative_eq!(r.value.0[1], 9.0, max_relative = 1e-14);
    }
}
