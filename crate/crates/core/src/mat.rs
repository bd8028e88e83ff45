//! Dense row-major matrices and the small set of factorizations the rest of
//! the crate needs: Cholesky, partial-pivot LU, and a one-sided Jacobi SVD.
//!
//! The Jacobi SVD is used wherever small singular values matter (numerical
//! rank, minimum-norm least squares); it computes them with far better
//! relative accuracy than the normal-equations route.

use alloc::{vec, vec::Vec};

use crate::error::Error;
use crate::Result;

/// Dense `f64` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch(
                "ragged rows in matrix literal".into(),
            ));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat { nrows, ncols, data })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    /// `self * x` for a vector `x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.ncols, x.len(), "matvec dimension mismatch");
        (0..self.nrows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.nrows, x.len(), "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &aij) in out.iter_mut().zip(self.row(i)) {
                *o += aij * xi;
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&other.data) {
            *o -= b;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetry check with a tolerance relative to the largest entry.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Solves `self * x = b` for square `self` by partial-pivot LU.
    /// Returns `None` when a pivot is (numerically) zero.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(self.nrows, self.ncols, "solve requires a square matrix");
        assert_eq!(self.nrows, b.len(), "solve rhs length mismatch");
        let n = self.nrows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let factor = a[i * n + k] / pivot;
                if factor == 0.0 {
                    continue;
                }
                a[i * n + k] = 0.0;
                for j in (k + 1)..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
                x[i] -= factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in (k + 1)..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Some(x)
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

// ---- vector helpers -------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(a.iter().map(|v| v * v).sum())
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

// ---- Cholesky -------------------------------------------------------------

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a`; `None` if a pivot drops below `eps`.
    pub(crate) fn factor(a: &Mat, eps: f64) -> Option<Cholesky> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let mut l = a.data.clone();
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                let v = l[j * n + k];
                d -= v * v;
            }
            if !(d > eps) {
                return None;
            }
            let dj = libm::sqrt(d);
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                l[i * n + j] = 0.0;
            }
        }
        Some(Cholesky { n, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }
}

// ---- one-sided Jacobi SVD -------------------------------------------------

/// Thin SVD `A = U diag(sigma) V^T` with `sigma` sorted descending.
pub struct Svd {
    /// `m x r` left singular vectors (columns), `r = min(m, n)`.
    pub u: Mat,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// `n x r` right singular vectors (columns).
    pub v: Mat,
}

/// One-sided (Hestenes) Jacobi SVD. Orthogonalizes the columns of the wider
/// factor by plane rotations; singular values are the resulting column norms.
pub fn jacobi_svd(a: &Mat) -> Svd {
    if a.nrows() >= a.ncols() {
        jacobi_svd_tall(a)
    } else {
        let s = jacobi_svd_tall(&a.transpose());
        Svd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        }
    }
}

fn jacobi_svd_tall(a: &Mat) -> Svd {
    let m = a.nrows();
    let n = a.ncols();
    // Work on columns: w[j] is the j-th column of the evolving matrix.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v = Mat::identity(n);
    let eps = f64::EPSILON;

    if n > 0 && m > 0 {
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                    for i in 0..m {
                        app += w[p][i] * w[p][i];
                        aqq += w[q][i] * w[q][i];
                        apq += w[p][i] * w[q][i];
                    }
                    if apq.abs() <= eps * libm::sqrt(app * aqq) || apq == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let zeta = (aqq - app) / (2.0 * apq);
                    let t = if zeta >= 0.0 {
                        1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                    } else {
                        -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                    };
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    for i in 0..m {
                        let wp = w[p][i];
                        let wq = w[q][i];
                        w[p][i] = c * wp - s * wq;
                        w[q][i] = s * wp + c * wq;
                    }
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = c * vp - s * vq;
                        v[(i, q)] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut sigma = Vec::with_capacity(n);
    let mut u = Mat::zeros(m, n);
    let mut vs = Mat::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[j][i] / s;
            }
        }
        for i in 0..n {
            vs[(i, k)] = v[(i, j)];
        }
    }
    Svd { u, sigma, v: vs }
}

/// Minimum-norm least-squares solution of `A x = b` via the Jacobi SVD.
pub struct Lstsq {
    pub solution: Vec<f64>,
    /// `||A x - b||_2` at the solution.
    pub residual: f64,
    /// Numerical rank at the given relative threshold.
    pub rank: usize,
}

pub fn lstsq(a: &Mat, b: &[f64], rel_tol: f64) -> Result<Lstsq> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(
            "least-squares rhs length mismatch".into(),
        ));
    }
    let svd = jacobi_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let thresh = smax * rel_tol;
    let mut x = vec![0.0; a.ncols()];
    let mut rank = 0;
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= thresh || s == 0.0 {
            continue;
        }
        rank += 1;
        let coeff = dot(&svd.u.col(k), b) / s;
        for i in 0..a.ncols() {
            x[i] += coeff * svd.v[(i, k)];
        }
    }
    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    Ok(Lstsq {
        solution: x,
        residual: norm2(&r),
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn matmul_and_transpose() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let b = mat(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.row(2), &[5.0, 12.0]);
        let t = a.transpose();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t[(1, 2)], 6.0);
    }

    #[test]
    fn lu_solve_roundtrip() {
        let a = mat(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, -1.0], &[0.0, -1.0, 2.0]]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let x = a.solve(&b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_singular_is_none() {
        let a = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = mat(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let f = Cholesky::factor(&a, 0.0).unwrap();
        let x = f.solve(&[8.0, 7.0]);
        let b = a.matvec(&x);
        assert!((b[0] - 8.0).abs() < 1e-12 && (b[1] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = mat(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(Cholesky::factor(&a, 0.0).is_none());
    }

    #[test]
    fn jacobi_svd_known_values() {
        // Singular values of [[3,0],[0,-2],[0,0]] are 3 and 2.
        let a = mat(&[&[3.0, 0.0], &[0.0, -2.0], &[0.0, 0.0]]);
        let s = jacobi_svd(&a);
        assert!((s.sigma[0] - 3.0).abs() < 1e-12);
        assert!((s.sigma[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let a = Mat::from_fn(6, 4, |i, j| libm::sin((1 + i * 7 + j * 3) as f64));
        let s = jacobi_svd(&a);
        let mut recon = Mat::zeros(6, 4);
        for k in 0..4 {
            for i in 0..6 {
                for j in 0..4 {
                    recon[(i, j)] += s.sigma[k] * s.u[(i, k)] * s.v[(j, k)];
                }
            }
        }
        assert!(recon.sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_svd_wide_matches_tall() {
        let a = Mat::from_fn(3, 5, |i, j| ((i * 5 + j) as f64 * 0.37).cos());
        let s1 = jacobi_svd(&a);
        let s2 = jacobi_svd(&a.transpose());
        for (x, y) in s1.sigma.iter().zip(&s2.sigma) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn lstsq_exact_and_minimum_norm() {
        // Overdetermined consistent system.
        let a = mat(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let b = [1.0, 2.0, 3.0];
        let r = lstsq(&a, &b, 1e-12).unwrap();
        assert!(r.residual < 1e-12);
        assert!((r.solution[0] - 1.0).abs() < 1e-12);
        // Rank-deficient: pick the minimum-norm solution.
        let a2 = mat(&[&[1.0, 1.0]]);
        let r2 = lstsq(&a2, &[2.0], 1e-12).unwrap();
        assert_eq!(r2.rank, 1);
        assert!((r2.solution[0] - 1.0).abs() < 1e-12);
        assert!((r2.solution[1] - 1.0).abs() < 1e-12);
    }
}
