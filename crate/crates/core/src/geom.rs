//! Linear algebra on R^n and C^n = R^{2n}.
//!
//! The ambient space of every immersion here is C^n with the standard
//! complex structure J (multiplication by i), Euclidean metric, and
//! symplectic form omega(u, v) = Im <u, v> for the Hermitian product
//! that is conjugate-linear in the first slot. A `ComplexPoint` keeps
//! the real and imaginary parts as separate length-n vectors so that
//! sphere directions in R^n can be mixed in without copying.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// a + c*b, written into a fresh vector.
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn scaled(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// A point (or vector) of C^n = R^{2n}, stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    pub fn zero(n: usize) -> Self {
        Self { re: vec![0.0; n], im: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    /// rho * e^{i phi} * x for a real direction x.
    pub fn from_polar_direction(rho: f64, phi: f64, x: &[f64]) -> Self {
        let (s, c) = phi.sin_cos();
        Self { re: scaled(x, rho * c), im: scaled(x, rho * s) }
    }

    /// Multiplication by i: (re, im) -> (-im, re).
    pub fn j(&self) -> Self {
        Self { re: scaled(&self.im, -1.0), im: self.re.clone() }
    }

    /// e^{i phi} * self.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            re: self.re.iter().zip(&self.im).map(|(a, b)| c * a - s * b).collect(),
            im: self.re.iter().zip(&self.im).map(|(a, b)| s * a + c * b).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { re: axpy(&self.re, 1.0, &o.re), im: axpy(&self.im, 1.0, &o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { re: axpy(&self.re, -1.0, &o.re), im: axpy(&self.im, -1.0, &o.im) }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { re: scaled(&self.re, c), im: scaled(&self.im, c) }
    }

    pub fn add_scaled(&self, c: f64, o: &Self) -> Self {
        Self { re: axpy(&self.re, c, &o.re), im: axpy(&self.im, c, &o.im) }
    }

    /// Euclidean inner product of R^{2n}.
    pub fn dot_real(&self, o: &Self) -> f64 {
        dot(&self.re, &o.re) + dot(&self.im, &o.im)
    }

    /// Standard symplectic form, omega(u, v) = sum_k (u_re v_im - u_im v_re)_k.
    pub fn symplectic(&self, o: &Self) -> f64 {
        dot(&self.re, &o.im) - dot(&self.im, &o.re)
    }

    pub fn norm(&self) -> f64 {
        self.dot_real(self).sqrt()
    }

    pub fn column(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }
}

/// Unit vector in R^n marking a point of the round sphere S^{n-1}.
#[derive(Clone, Debug)]
pub struct SphereDirection {
    x: Vec<f64>,
}

/// Unit-length defect accepted by `SphereDirection::new`.
pub const UNIT_TOL: f64 = 1e-12;

impl SphereDirection {
    /// Wraps a vector that is already unit length within `UNIT_TOL`.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        let defect = norm(&x) - 1.0;
        if defect.abs() > UNIT_TOL {
            return Err(Error::NotUnit(defect));
        }
        Ok(Self { x })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(x: Vec<f64>) -> Result<Self> {
        let len = norm(&x);
        if len < 1e-300 {
            return Err(Error::ZeroVector(len));
        }
        Ok(Self { x: scaled(&x, 1.0 / len) })
    }

    pub fn axis(n: usize, i: usize) -> Self {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        Self { x }
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Orthonormal completion {x, v_2, ..., v_n} of a sphere direction,
/// positively oriented as a basis of R^n.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub x: Vec<f64>,
    /// Tangent vectors v_2..v_n of S^{n-1} at x, indexed from 0.
    pub v: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Completes x to a positively oriented orthonormal basis by reflecting
/// the standard basis across the bisector of x and a coordinate axis.
/// The reflection axis switches branch on the cap x_1 > 0.9 so the
/// construction never degenerates; it is continuous away from that cap.
pub fn tangent_frame(x: &SphereDirection) -> TangentFrame {
    let xs = x.coords();
    let n = xs.len();
    let toward_pole = xs[0] > 0.9;
    // u = x -+ e_1; the Householder map H v = v - 2 <v,u> u / |u|^2
    // sends e_1 to x (minus branch) or to -x (plus branch).
    let mut u = xs.to_vec();
    if toward_pole {
        u[0] += 1.0;
    } else {
        u[0] -= 1.0;
    }
    let uu = dot(&u, &u);
    let mut v = Vec::with_capacity(n - 1);
    for j in 1..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let coef = 2.0 * u[j] / uu;
        let col = axpy(&e, -coef, &u);
        v.push(col);
    }
    if !toward_pole {
        // det [x, He_2, .., He_n] = det H = -1 on this branch; flip the
        // last column so the full basis is positively oriented.
        for c in v.last_mut().unwrap() {
            *c = -*c;
        }
    }
    TangentFrame { x: xs.to_vec(), v }
}

/// Determinant of the n x n complex matrix whose columns are given,
/// by LU factorization with partial pivoting.
pub fn complex_det(cols: &[Vec<Complex64>]) -> Complex64 {
    let n = cols.len();
    let mut m: Vec<Vec<Complex64>> = cols.to_vec();
    debug_assert!(m.iter().all(|c| c.len() == n));
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let (piv, _) = (k..n)
            .map(|i| (i, m[k][i].norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m[k][piv].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for col in m.iter_mut() {
                col.swap(k, piv);
            }
            det = -det;
        }
        let pivot = m[k][k];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = m[k][i] / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                let mkj = m[j][k];
                m[j][i] -= factor * mkj;
            }
            m[k][i] = Complex64::new(0.0, 0.0);
        }
    }
    det
}

/// Solves the n x n system M y = rhs by Gaussian elimination with
/// partial pivoting. M is row-major. Intended for the small (n <= 8)
/// Gram matrices that appear in finite-difference oracles.
/// Inverse and determinant of a small full-rank matrix, Gauss-Jordan
/// with partial pivoting.
pub fn inverse_and_det(m: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    let mut det = 1.0f64;
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, a[i][k].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag < 1e-300 {
            return Err(Error::RootFinding("singular matrix".into()));
        }
        if piv != k {
            a.swap(k, piv);
            inv.swap(k, piv);
            det = -det;
        }
        let p = a[k][k];
        det *= p;
        let ip = 1.0 / p;
        for j in 0..n {
            a[k][j] *= ip;
            inv[k][j] *= ip;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i][k];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[i][j] -= f * a[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    Ok((inv, det))
}

pub fn solve_real(m: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut y = rhs.to_vec();
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, a[i][k].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag < 1e-300 {
            return Err(Error::RootFinding("singular linear system".into()));
        }
        a.swap(k, piv);
        y.swap(k, piv);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            y[i] -= f * y[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = y[k];
        for j in (k + 1)..n {
            acc -= a[k][j] * y[j];
        }
        y[k] = acc / a[k][k];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn frame_at_first_axis_is_standard() {
        let x = SphereDirection::axis(3, 0);
        let f = tangent_frame(&x);
        assert_eq!(f.v.len(), 2);
        assert_close(f.v[0][1], 1.0, 1e-15);
        assert_close(f.v[1][2], 1.0, 1e-15);
        assert_close(norm(&f.v[0]), 1.0, 1e-15);
    }

    #[test]
    fn frame_is_orthonormal_and_oriented() {
        // Orientation = sign of det [x | v_2 | ... | v_n], expanded by
        // the permanent-free cofactor route on small n.
        let dirs = [
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0],
            vec![0.6, 0.8, 0.0],
            vec![0.95, 0.31224989991991992, 0.0], // inside the pole cap
            vec![-1.0, 0.0, 0.0],
        ];
        for d in dirs {
            let x = SphereDirection::normalized(d).unwrap();
            let f = tangent_frame(&x);
            for (i, vi) in f.v.iter().enumerate() {
                assert_close(dot(vi, &f.x), 0.0, 1e-14);
                assert_close(norm(vi), 1.0, 1e-14);
                for vj in &f.v[i + 1..] {
                    assert_close(dot(vi, vj), 0.0, 1e-14);
                }
            }
            let m = [&f.x, &f.v[0], &f.v[1]];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[1][0] * (m[0][1] * m[2][2] - m[0][2] * m[2][1])
                + m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
            assert_close(det, 1.0, 1e-12);
        }
    }

    #[test]
    fn rejects_non_unit_vectors() {
        assert!(SphereDirection::new(vec![1.0, 1e-5, 0.0]).is_err());
        assert!(SphereDirection::new(vec![1.0, 1e-8, 0.0]).is_ok());
        assert!(SphereDirection::normalized(vec![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn symplectic_form_vanishes_on_complex_lines() {
        // omega(u, i u) = |u|^2 and omega(u, u) = 0.
        let u = ComplexPoint { re: vec![1.0, 2.0], im: vec![-0.5, 0.25] };
        assert_close(u.symplectic(&u), 0.0, 1e-15);
        assert_close(u.symplectic(&u.j()), u.dot_real(&u), 1e-15);
    }

    #[test]
    fn det_of_rotation_diagonal_is_phase_product() {
        let phi1 = 0.3;
        let phi2 = -1.1;
        let cols = vec![
            vec![Complex64::from_polar(1.0, phi1), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, phi2)],
        ];
        let d = complex_det(&cols);
        assert_close(d.re, (phi1 + phi2).cos(), 1e-15);
        assert_close(d.im, (phi1 + phi2).sin(), 1e-15);
    }

    #[test]
    fn det_detects_swapped_columns() {
        let a = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let b = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let d = complex_det(&[a, b]);
        assert_close(d.re, -1.0, 1e-15);
        assert_close(d.im, 0.0, 1e-15);
    }

    #[test]
    fn linear_solve_roundtrip() {
        let m = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -1.0],
            vec![0.5, -1.0, 5.0],
        ];
        let y = vec![0.3, -2.0, 1.7];
        let rhs: Vec<f64> = (0..3).map(|i| dot(&m[i], &y)).collect();
        let sol = solve_real(&m, &rhs).unwrap();
        for (a, b) in sol.iter().zip(&y) {
            assert_close(*a, *b, 1e-13);
        }
    }

    #[test]
    fn inverse_and_det_roundtrip() {
        let m = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, -1.0],
            vec![0.0, -1.0, 4.0],
        ];
        let (inv, det) = inverse_and_det(&m).unwrap();
        // det by cofactor expansion: 2(12-1) - 1(4-0) = 18.
        assert_close(det, 18.0, 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let prod: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert_close(prod, if i == j { 1.0 } else { 0.0 }, 1e-13);
            }
        }
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(inverse_and_det(&singular).is_err());
    }
}
