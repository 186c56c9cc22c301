//! Compressed sparse rows, ILU(0) and BiCGSTAB — just enough for the
//! stencil systems of the solver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num;

/// Square CSR matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Row-by-row builder; entries of a row may be pushed in any order and
/// duplicates are summed.
#[derive(Debug)]
pub struct CsrBuilder {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    row: Vec<(usize, f64)>,
}

impl CsrBuilder {
    pub fn new(n: usize, nnz_hint: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        CsrBuilder {
            n,
            row_ptr,
            cols: Vec::with_capacity(nnz_hint),
            vals: Vec::with_capacity(nnz_hint),
            row: Vec::new(),
        }
    }

    pub fn push(&mut self, col: usize, val: f64) {
        debug_assert!(col < self.n);
        self.row.push((col, val));
    }

    pub fn finish_row(&mut self) {
        self.row.sort_unstable_by_key(|e| e.0);
        let mut last = usize::MAX;
        for &(c, v) in &self.row {
            if c == last {
                *self.vals.last_mut().expect("previous entry") += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = c;
            }
        }
        self.row.clear();
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(self) -> Csr {
        assert_eq!(self.row_ptr.len(), self.n + 1, "unfinished rows");
        Csr {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl Csr {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, a)| a * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.n + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let k = next[j];
                cols[k] = i;
                vals[k] = a;
                next[j] += 1;
            }
        }
        Csr {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Smallest `|a_ii| - Σ_{j≠i} |a_ij|` over rows.
    pub fn min_diagonal_margin(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                let mut diag = 0.0;
                let mut off = 0.0;
                for (&j, &a) in c.iter().zip(v) {
                    if j == i {
                        diag = num::abs(a);
                    } else {
                        off += num::abs(a);
                    }
                }
                diag - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Incomplete LU factorization with the sparsity pattern of `A`.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: Csr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            let (c, _) = lu.row(i);
            *d = lu.row_ptr[i]
                + c.binary_search(&i)
                    .map_err(|_| Error::Numerical(format!("ILU(0): missing diagonal in row {i}")))?;
        }
        // position lookup for the current row
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.cols[k]] = k;
            }
            for k in start..end {
                let j = lu.cols[k];
                if j >= i {
                    break;
                }
                let piv = lu.vals[diag[j]];
                if piv == 0.0 {
                    return Err(Error::Numerical(format!("ILU(0): zero pivot in row {j}")));
                }
                let f = lu.vals[k] / piv;
                lu.vals[k] = f;
                for m in diag[j] + 1..lu.row_ptr[j + 1] {
                    let p = pos[lu.cols[m]];
                    if p != usize::MAX {
                        lu.vals[p] -= f * lu.vals[m];
                    }
                }
            }
            for k in start..end {
                pos[lu.cols[k]] = usize::MAX;
            }
            if lu.vals[diag[i]] == 0.0 {
                return Err(Error::Numerical(format!("ILU(0): zero pivot in row {i}")));
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// `x = (LU)⁻¹ b`
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.lu.n;
        for i in 0..n {
            let mut s = b[i];
            for k in self.lu.row_ptr[i]..self.diag[i] {
                s -= self.lu.vals[k] * x[self.lu.cols[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..self.lu.row_ptr[i + 1] {
                s -= self.lu.vals[k] * x[self.lu.cols[k]];
            }
            x[i] = s / self.lu.vals[self.diag[i]];
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b - Ax‖ / ‖b‖` at exit.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    num::sqrt(dot(a, a))
}

/// Right-preconditioned BiCGSTAB. `x` holds the initial guess and receives
/// the solution. Fails when the relative residual does not reach `tol`
/// within `max_iter` iterations.
pub fn bicgstab(a: &Csr, pre: &Ilu0, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveStats> {
    let n = a.n();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = norm(&r) / bnorm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.solve_into(&p, &mut phat);
        a.mul_vec_into(&phat, &mut v);
        let r0v = dot(&r0, &v);
        if r0v == 0.0 {
            break;
        }
        alpha = rho / r0v;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            let mut res = a.mul_vec(x);
            for i in 0..n {
                res[i] = b[i] - res[i];
            }
            return Ok(SolveStats {
                iterations: it + 1,
                relative_residual: norm(&res) / bnorm,
            });
        }
        pre.solve_into(&s, &mut shat);
        a.mul_vec_into(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / bnorm;
        if omega == 0.0 {
            break;
        }
    }
    // recompute the true residual before judging
    let mut res = a.mul_vec(x);
    for i in 0..n {
        res[i] = b[i] - res[i];
    }
    let rel = norm(&res) / bnorm;
    if rel <= tol {
        return Ok(SolveStats {
            iterations: max_iter,
            relative_residual: rel,
        });
    }
    Err(Error::Numerical(format!(
        "BiCGSTAB stalled at relative residual {rel:.3e} (target {tol:.1e})"
    )))
}

/// Solves `A x = b` from a zero initial guess with an ILU(0) preconditioner.
pub fn solve(a: &Csr, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let pre = Ilu0::new(a)?;
    let mut x = vec![0.0; a.n()];
    let stats = bicgstab(a, &pre, b, &mut x, tol, 10 * a.n().max(100))?;
    Ok((x, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize, shift: f64) -> Csr {
        let mut b = CsrBuilder::new(n, 3 * n);
        for i in 0..n {
            if i > 0 {
                b.push(i - 1, -1.0);
            }
            b.push(i, 2.0 + shift);
            if i + 1 < n {
                b.push(i + 1, -1.3);
            }
            b.finish_row();
        }
        b.build()
    }

    #[test]
    fn builder_sums_duplicates() {
        let mut b = CsrBuilder::new(2, 4);
        b.push(1, 1.0);
        b.push(0, 2.0);
        b.push(1, 0.5);
        b.finish_row();
        b.push(1, 3.0);
        b.finish_row();
        let a = b.build();
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.transpose().get(1, 0), 1.5);
    }

    #[test]
    fn ilu_of_tridiagonal_is_exact() {
        let a = laplace_1d(50, 0.1);
        let pre = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 50];
        pre.solve_into(&b, &mut x);
        let r = a.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let a = laplace_1d(400, 0.5);
        let xs: Vec<f64> = (0..400).map(|i| (i as f64 * 0.1).cos()).collect();
        let b = a.mul_vec(&xs);
        let (x, stats) = solve(&a, &b, 1e-12).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}
