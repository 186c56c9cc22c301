//! Fixed-capacity dense linear algebra for the small matrices that appear
//! per point: shape operators, Gram matrices, Lorentz maps.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::num;

/// Largest supported matrix order. Vectors of `R^{d,1}` need `d + 1` slots,
/// so `d <= MAX_DIM - 1`.
pub const MAX_DIM: usize = 8;

/// Square matrix of order `n <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct SMat {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl core::fmt::Debug for SMat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("SMat")?;
        f.debug_list()
            .entries((0..self.n).map(|i| &self.a[i][..self.n]))
            .finish()
    }
}

impl SMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "matrix order {n} exceeds MAX_DIM");
        SMat {
            n,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.a[i][i] = x;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row slices; panics when the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            let r = rows[i].as_ref();
            assert_eq!(r.len(), n, "ragged matrix rows");
            r[j]
        })
    }

    /// `u vᵀ`
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j])
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i][..self.n]
    }

    pub fn col(&self, j: usize) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.n {
            c[i] = self.a[i][j];
        }
        c
    }

    pub fn to_rows(&self) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[j][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.n, |i, j| s * self.a[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max(num::abs(self.a[i][j] - self.a[j][i]));
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self.a[i][j] + self.a[j][i]))
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max(num::abs(self.a[i][j]));
            }
        }
        worst
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    worst = worst.max(num::abs(self.a[i][j]));
                }
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &[f64]) -> [f64; MAX_DIM] {
        assert_eq!(v.len(), self.n);
        let mut out = [0.0; MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.a[i][..self.n].iter().zip(v).map(|(x, y)| x * y).sum();
        }
        out
    }

    /// `vᵀ M w`
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        let mw = self.mul_vec(w);
        v.iter().zip(&mw[..self.n]).map(|(x, y)| x * y).sum()
    }

    /// Second elementary symmetric polynomial of the eigenvalues,
    /// `((tr M)² - tr M²) / 2`; valid for any square matrix.
    pub fn sigma2(&self) -> f64 {
        let t = self.trace();
        let mut t2 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                t2 += self.a[i][j] * self.a[j][i];
            }
        }
        0.5 * (t * t - t2)
    }

    /// Determinant by partial-pivoting LU.
    pub fn det(&self) -> f64 {
        let mut m = self.a;
        let n = self.n;
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| num::abs(m[i][k]).total_cmp(&num::abs(m[j][k])))
                .unwrap_or(k);
            if m[p][k] == 0.0 {
                return 0.0;
            }
            if p != k {
                m.swap(p, k);
                det = -det;
            }
            det *= m[k][k];
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular to working
    /// precision.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut m = self.a;
        let mut inv = Self::identity(n).a;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| num::abs(m[i][k]).total_cmp(&num::abs(m[j][k])))?;
            if num::abs(m[p][k]) <= 1e-14 * scale {
                return None;
            }
            m.swap(p, k);
            inv.swap(p, k);
            let piv = m[k][k];
            for j in 0..n {
                m[k][j] /= piv;
                inv[k][j] /= piv;
            }
            for i in 0..n {
                if i != k {
                    let f = m[i][k];
                    if f != 0.0 {
                        for j in 0..n {
                            m[i][j] -= f * m[k][j];
                            inv[i][j] -= f * inv[k][j];
                        }
                    }
                }
            }
        }
        Some(SMat { n, a: inv })
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut s = self.a[j][j];
            for k in 0..j {
                s -= l.a[j][k] * l.a[j][k];
            }
            if s.is_nan() || s <= 0.0 {
                return None;
            }
            let d = num::sqrt(s);
            l.a[j][j] = d;
            for i in j + 1..n {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s -= l.a[i][k] * l.a[j][k];
                }
                l.a[i][j] = s / d;
            }
        }
        Some(l)
    }

    /// Eigen-decomposition of the symmetric part by cyclic Jacobi rotations.
    /// Eigenvalues are sorted ascending; eigenvectors are the columns of
    /// `vectors`.
    pub fn sym_eigen(&self) -> SymEigen {
        let n = self.n;
        let mut a = self.symmetrized();
        let mut v = Self::identity(n);
        let scale = a.max_abs();
        if n > 1 && scale > 0.0 {
            for _sweep in 0..64 {
                let mut off = 0.0;
                for p in 0..n {
                    for q in p + 1..n {
                        off += a.a[p][q] * a.a[p][q];
                    }
                }
                if off <= (1e-17 * scale) * (1e-17 * scale) {
                    break;
                }
                for p in 0..n {
                    for q in p + 1..n {
                        let apq = a.a[p][q];
                        if apq == 0.0 {
                            continue;
                        }
                        let theta = (a.a[q][q] - a.a[p][p]) / (2.0 * apq);
                        let t = {
                            let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                            s / (num::abs(theta) + num::sqrt(theta * theta + 1.0))
                        };
                        let c = 1.0 / num::sqrt(t * t + 1.0);
                        let s = t * c;
                        for k in 0..n {
                            let akp = a.a[k][p];
                            let akq = a.a[k][q];
                            a.a[k][p] = c * akp - s * akq;
                            a.a[k][q] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a.a[p][k];
                            let aqk = a.a[q][k];
                            a.a[p][k] = c * apk - s * aqk;
                            a.a[q][k] = s * apk + c * aqk;
                        }
                        for k in 0..n {
                            let vkp = v.a[k][p];
                            let vkq = v.a[k][q];
                            v.a[k][p] = c * vkp - s * vkq;
                            v.a[k][q] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order = [0usize; MAX_DIM];
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        order[..n].sort_by(|&i, &j| a.a[i][i].total_cmp(&a.a[j][j]));
        let mut values = [0.0; MAX_DIM];
        let mut vectors = Self::zeros(n);
        for (new, &old) in order[..n].iter().enumerate() {
            values[new] = a.a[old][old];
            for k in 0..n {
                vectors.a[k][new] = v.a[k][old];
            }
        }
        SymEigen { n, values, vectors }
    }

    /// `Q f(Λ) Qᵀ` for the symmetric part of `self`.
    pub fn sym_apply(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.sym_eigen();
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n)
                .map(|k| e.vectors.a[i][k] * f(e.values[k]) * e.vectors.a[j][k])
                .sum()
        })
    }
}

impl Index<(usize, usize)> for SMat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.n && j < self.n);
        &self.a[i][j]
    }
}

impl IndexMut<(usize, usize)> for SMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.n && j < self.n);
        &mut self.a[i][j]
    }
}

impl Mul for SMat {
    type Output = SMat;
    fn mul(self, rhs: SMat) -> SMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = SMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i][j] += aik * rhs.a[k][j];
                }
            }
        }
        out
    }
}

impl Add for SMat {
    type Output = SMat;
    fn add(self, rhs: SMat) -> SMat {
        assert_eq!(self.n, rhs.n);
        SMat::from_fn(self.n, |i, j| self.a[i][j] + rhs.a[i][j])
    }
}

impl Sub for SMat {
    type Output = SMat;
    fn sub(self, rhs: SMat) -> SMat {
        assert_eq!(self.n, rhs.n);
        SMat::from_fn(self.n, |i, j| self.a[i][j] - rhs.a[i][j])
    }
}

impl Neg for SMat {
    type Output = SMat;
    fn neg(self) -> SMat {
        self.scale(-1.0)
    }
}

/// Output of [`SMat::sym_eigen`].
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    n: usize,
    values: [f64; MAX_DIM],
    /// Orthonormal eigenvectors as columns, matching `values()` order.
    pub vectors: SMat,
}

impl SymEigen {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.n]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.n - 1]
    }

    pub fn vector(&self, k: usize) -> [f64; MAX_DIM] {
        self.vectors.col(k)
    }
}

/// Determinant of a complex square matrix given row-major, by partial
/// pivoting LU. `m` is consumed as scratch space.
pub fn complex_det(n: usize, m: &mut [[Complex64; MAX_DIM]; MAX_DIM]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm_sqr().total_cmp(&m[j][k].norm_sqr()))
            .unwrap_or(k);
        if m[p][k].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let piv = m[k][k];
        det *= piv;
        for i in k + 1..n {
            let f = m[i][k] / piv;
            for j in k..n {
                let mkj = m[k][j];
                m[i][j] -= f * mkj;
            }
        }
    }
    det
}

/// `det(Id + i B)` for a real square matrix `B`.
pub fn det_id_plus_i(b: &SMat) -> Complex64 {
    det_shifted(b, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0))
}

/// `det(α Id + β B)` for a real matrix `B` and complex `α`, `β`.
pub fn det_shifted(b: &SMat, alpha: Complex64, beta: Complex64) -> Complex64 {
    let n = b.order();
    let mut m = [[Complex64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = beta * b[(i, j)];
        }
        m[i][i] += alpha;
    }
    complex_det(n, &mut m)
}

/// `e_k` in elementary symmetric polynomials of a list, `k <= len`.
pub fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = [0.0; MAX_DIM + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e[k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_eigen_reconstructs() {
        let m = SMat::from_rows(&[[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]]);
        let e = m.sym_eigen();
        let back = m.sym_apply(|x| x);
        assert!((back - m).max_abs() < 1e-13);
        assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
        let q = e.vectors;
        assert!((q.transpose() * q - SMat::identity(3)).max_abs() < 1e-14);
        assert!((e.values().iter().sum::<f64>() - m.trace()).abs() < 1e-13);
    }

    #[test]
    fn determinant_and_inverse() {
        let m = SMat::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]);
        assert!((m.det() - 18.0).abs() < 1e-13);
        let inv = m.inverse().unwrap();
        assert!((inv * m - SMat::identity(3)).max_abs() < 1e-14);
        let singular = SMat::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(singular.det(), 0.0);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn complex_det_matches_expansion() {
        // det(Id + iB) = 1 + i tr B - σ₂ - i det B for 3x3.
        let b = SMat::from_rows(&[[1.0, 0.2, 0.0], [0.2, 2.0, -0.3], [0.0, -0.3, 3.0]]);
        let z = det_id_plus_i(&b);
        let expect = Complex64::new(1.0 - b.sigma2(), b.trace() - b.det());
        assert!((z - expect).norm() < 1e-12);
    }

    #[test]
    fn sigma2_from_eigenvalues() {
        let d = [1.0, 2.0, 3.0];
        assert_eq!(elementary_symmetric(&d, 2), 11.0);
        assert_eq!(SMat::from_diag(&d).sigma2(), 11.0);
        assert_eq!(elementary_symmetric(&d, 3), 6.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(SMat::from_diag(&[1.0, -1.0]).cholesky().is_none());
        let m = SMat::from_rows(&[[4.0, 2.0], [2.0, 3.0]]);
        let l = m.cholesky().unwrap();
        assert!((l * l.transpose() - m).max_abs() < 1e-14);
    }
}
