//! Small dense 4x4 helpers.

use num_complex::Complex64;

pub type Mat4 = [[f64; 4]; 4];
pub type CMat4 = [[Complex64; 4]; 4];

pub fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Determinant by partially pivoted elimination.
pub fn det4(m: &Mat4) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

fn to_complex(m: &Mat4) -> CMat4 {
    let mut c = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = Complex64::new(m[i][j], 0.0);
        }
    }
    c
}

/// Inverse by Gauss-Jordan with partial pivoting; `None` if a pivot vanishes.
pub fn cinv4(m: &CMat4) -> Option<CMat4> {
    let mut a = *m;
    let mut inv = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 || !a[p][c].norm().is_finite() {
            return None;
        }
        a.swap(p, c);
        inv.swap(p, c);
        let piv = a[c][c].inv();
        for k in 0..4 {
            a[c][k] *= piv;
            inv[c][k] *= piv;
        }
        for r in 0..4 {
            if r != c {
                let f = a[r][c];
                for k in 0..4 {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    Some(inv)
}

pub fn inv4(m: &Mat4) -> Option<Mat4> {
    let c = cinv4(&to_complex(m))?;
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = c[i][j].re;
        }
    }
    Some(r)
}

/// Determinant of a complex 4x4 matrix.
pub fn cdet4(m: &CMat4) -> Complex64 {
    let mut a = *m;
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// One-norm condition number.
pub fn ccond4(m: &CMat4, inv: &CMat4) -> f64 {
    let norm1 = |x: &CMat4| (0..4).map(|j| (0..4).map(|i| x[i][j].norm()).sum::<f64>()).fold(0.0, f64::max);
    norm1(m) * norm1(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let m: Mat4 = [[2.0, 1.0, 0.5, 0.0], [1.0, 3.0, 0.0, 0.2], [0.5, 0.0, 4.0, 1.0], [0.0, 0.2, 1.0, 5.0]];
        let inv = inv4(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        // cofactor expansion along the first row
        let minor = |c: usize| {
            let mut s = [[0.0; 3]; 3];
            for i in 1..4 {
                let mut jj = 0;
                for j in 0..4 {
                    if j != c {
                        s[i - 1][jj] = m[i][j];
                        jj += 1;
                    }
                }
            }
            s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1]) - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
                + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0])
        };
        let d: f64 = (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * m[0][c] * minor(c)).sum();
        assert!((det4(&m) - d).abs() < 1e-12 * d.abs());
        assert!((cdet4(&to_complex(&m)).re - d).abs() < 1e-12 * d.abs());
    }

    #[test]
    fn singular_has_no_inverse() {
        let m: Mat4 = [[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert!(inv4(&m).is_none());
        assert_eq!(det4(&m), 0.0);
    }
}
