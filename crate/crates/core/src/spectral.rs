//! Spectral decomposition of the shift and frequency-domain filter algebra.
//!
//! Conventions fixed here and relied on everywhere else:
//! - eigenvalues sorted ascending;
//! - eigenvector signs fixed so the largest-magnitude entry (first such
//!   entry on ties) is positive;
//! - `vec()` is column-major: `vec(X)[p*N + i] = X[i][p]`.

use alloc::format;
use alloc::{vec, vec::Vec};

use crate::error::Error;
use crate::graphs::ShiftOperator;
use crate::mat::{dot, lstsq, Mat};
use crate::Result;

/// Orthogonal eigendecomposition `S = V diag(lambda) V^T` of a symmetric
/// shift, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvectors: Mat,
    eigenvalues: Vec<f64>,
}

impl SpectralDecomposition {
    /// Wraps a caller-supplied basis, checking orthogonality to 1e-9.
    pub fn from_parts(eigenvectors: Mat, eigenvalues: Vec<f64>) -> Result<Self> {
        let n = eigenvectors.nrows();
        if eigenvectors.ncols() != n || eigenvalues.len() != n {
            return Err(Error::DimensionMismatch(
                "eigendecomposition shape mismatch".into(),
            ));
        }
        for i in 0..n {
            for j in i..n {
                let g = dot(&eigenvectors.col(i), &eigenvectors.col(j));
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "eigenvector columns {i},{j} not orthonormal (gram {g})"
                    )));
                }
            }
        }
        Ok(SpectralDecomposition {
            eigenvectors,
            eigenvalues,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector matrix `V`, columns are eigenvectors.
    pub fn v(&self) -> &Mat {
        &self.eigenvectors
    }

    pub fn lambda(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `V diag(d) V^T x` without forming the full operator.
    pub fn apply_diag(&self, d: &[f64], x: &[f64]) -> Vec<f64> {
        let mut xt = self.eigenvectors.tr_matvec(x);
        for (c, &di) in xt.iter_mut().zip(d) {
            *c *= di;
        }
        self.eigenvectors.matvec(&xt)
    }

    /// `V diag(d) V^T X` column by column.
    pub fn apply_diag_mat(&self, d: &[f64], x: &Mat) -> Mat {
        let n = self.n();
        let p = x.ncols();
        let mut out = Mat::zeros(n, p);
        for j in 0..p {
            let col = self.apply_diag(d, &x.col(j));
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Symmetric eigendecomposition of the shift. Deterministic: fixed ascending
/// sort and the sign convention above, so downstream outputs are reproducible.
pub fn eig_sym(shift: &ShiftOperator) -> Result<SpectralDecomposition> {
    let m = shift.matrix();
    if !m.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let n = m.nrows();
    let mut v = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    // Ascending sort (tql2 leaves them unordered in general).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let mut vecs = Mat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        vals.push(d[j]);
        for i in 0..n {
            vecs[(i, k)] = v[(i, j)];
        }
    }

    // Sign convention: first largest-magnitude entry of each column positive.
    for k in 0..n {
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..n {
            let a = vecs[(i, k)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if vecs[(best, k)] < 0.0 {
            for i in 0..n {
                vecs[(i, k)] = -vecs[(i, k)];
            }
        }
    }

    Ok(SpectralDecomposition {
        eigenvectors: vecs,
        eigenvalues: vals,
    })
}

/// Householder reduction to symmetric tridiagonal form, accumulating the
/// transformation in `v`. Classic tred2 (Bowdler-Martin-Reinsch-Wilkinson,
/// Handbook for Automatic Computation / EISPACK lineage).
fn tred2(n: usize, v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form, accumulating
/// eigenvectors into `v`. Classic tql2.
fn tql2(n: usize, v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(Error::InvalidParameter(
                        "eigensolver failed to converge".into(),
                    ));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        let h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `N x L` Vandermonde matrix of the eigenvalues: entry `(i, j)` is
/// `lambda_i^j` for `j = 0..L-1`.
pub fn vandermonde(lambda: &[f64], order: usize) -> Result<Mat> {
    let n = lambda.len();
    if order == 0 || order > n {
        return Err(Error::OrderOutOfRange { got: order, max: n });
    }
    let mut m = Mat::zeros(n, order);
    for (i, &li) in lambda.iter().enumerate() {
        let mut pow = 1.0;
        for j in 0..order {
            m[(i, j)] = pow;
            pow *= li;
        }
    }
    Ok(m)
}

/// Graph filter given by coefficients, a frequency response, or both.
/// When both are present they must be consistent: `h_tilde = Psi_L h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    coeffs: Option<Vec<f64>>,
    freq_response: Option<Vec<f64>>,
    order: usize,
}

impl FilterSpec {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<FilterSpec> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient vector".into()));
        }
        let order = coeffs.len();
        Ok(FilterSpec {
            coeffs: Some(coeffs),
            freq_response: None,
            order,
        })
    }

    pub fn from_response(freq_response: Vec<f64>) -> Result<FilterSpec> {
        if freq_response.is_empty() {
            return Err(Error::InvalidParameter("empty frequency response".into()));
        }
        let order = freq_response.len();
        Ok(FilterSpec {
            coeffs: None,
            freq_response: Some(freq_response),
            order,
        })
    }

    /// Attaches the response implied by the coefficients on `dec`, checking
    /// consistency (1e-9) if a response was already present.
    pub fn with_response(mut self, dec: &SpectralDecomposition) -> Result<FilterSpec> {
        let computed = self.response(dec)?;
        if let Some(existing) = &self.freq_response {
            for (a, b) in existing.iter().zip(&computed) {
                if (a - b).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(
                        "coefficients and response disagree".into(),
                    ));
                }
            }
        }
        self.freq_response = Some(computed);
        Ok(self)
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    pub fn stored_response(&self) -> Option<&[f64]> {
        self.freq_response.as_deref()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Frequency response on `dec`: the stored one, or `Psi_L h`.
    pub fn response(&self, dec: &SpectralDecomposition) -> Result<Vec<f64>> {
        if let Some(r) = &self.freq_response {
            if r.len() != dec.n() {
                return Err(Error::DimensionMismatch(format!(
                    "response length {} vs {} eigenvalues",
                    r.len(),
                    dec.n()
                )));
            }
            return Ok(r.clone());
        }
        freq_response(self.coeffs.as_ref().unwrap(), dec)
    }
}

/// Frequency response `h_tilde_i = sum_l h_l lambda_i^l` (Horner).
pub fn freq_response(coeffs: &[f64], dec: &SpectralDecomposition) -> Result<Vec<f64>> {
    let n = dec.n();
    if coeffs.is_empty() || coeffs.len() > n {
        return Err(Error::OrderOutOfRange {
            got: coeffs.len(),
            max: n,
        });
    }
    Ok(dec
        .lambda()
        .iter()
        .map(|&li| {
            let mut acc = 0.0;
            for &c in coeffs.iter().rev() {
                acc = acc * li + c;
            }
            acc
        })
        .collect())
}

/// Applies the filter in the spectral domain: `V diag(h_tilde) V^T X`.
pub fn apply_filter(f: &FilterSpec, dec: &SpectralDecomposition, x: &Mat) -> Result<Mat> {
    if x.nrows() != dec.n() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} rows, graph has {} nodes",
            x.nrows(),
            dec.n()
        )));
    }
    let h = f.response(dec)?;
    Ok(dec.apply_diag_mat(&h, x))
}

/// Applies the filter as a polynomial in the shift (Horner in `S`), without
/// any eigendecomposition. Agrees with [`apply_filter`] to rounding.
pub fn apply_filter_polynomial(coeffs: &[f64], shift: &ShiftOperator, x: &Mat) -> Result<Mat> {
    if x.nrows() != shift.n() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} rows, graph has {} nodes",
            x.nrows(),
            shift.n()
        )));
    }
    if coeffs.is_empty() {
        return Err(Error::InvalidParameter("empty coefficient vector".into()));
    }
    let mut acc = x.scale(*coeffs.last().unwrap());
    for &c in coeffs.iter().rev().skip(1) {
        acc = shift.matrix().matmul(&acc);
        for i in 0..acc.nrows() {
            for j in 0..acc.ncols() {
                acc[(i, j)] += c * x[(i, j)];
            }
        }
    }
    Ok(acc)
}

/// Default invertibility threshold: `1e-8 * max_i |h_tilde_i|`.
pub const INVERTIBILITY_REL_TOL: f64 = 1e-8;

/// A graph filter is invertible iff its response does not vanish at any
/// graph frequency: `min_i |h_tilde_i| > tol`.
pub fn is_invertible(f: &FilterSpec, dec: &SpectralDecomposition, tol: Option<f64>) -> Result<bool> {
    let h = f.response(dec)?;
    let max = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tol.unwrap_or(INVERTIBILITY_REL_TOL * max);
    let min = h.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(min > tol)
}

/// Inverse filter's frequency response `g_tilde = 1 ./ h_tilde`, so that
/// `g_tilde o h_tilde = 1`. Errors when the filter is not invertible.
pub fn inverse_response(f: &FilterSpec, dec: &SpectralDecomposition) -> Result<Vec<f64>> {
    let h = f.response(dec)?;
    let max = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = INVERTIBILITY_REL_TOL * max;
    for &hi in &h {
        if hi.abs() <= threshold {
            return Err(Error::SingularFilter {
                min_abs: hi.abs(),
                threshold,
            });
        }
    }
    Ok(h.iter().map(|&hi| 1.0 / hi).collect())
}

/// Khatri-Rao design matrix `Z = Y^T V (col-wise kron) V`, shape `NP x N`:
/// column `i` is `kron(Y^T v_i, v_i)`. For any `g_tilde`,
/// `Z g_tilde = vec(V diag(g_tilde) V^T Y)` under column-major `vec`.
pub fn khatri_rao_z(y: &Mat, dec: &SpectralDecomposition) -> Result<Mat> {
    let n = dec.n();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "observations have {} rows, graph has {} nodes",
            y.nrows(),
            n
        )));
    }
    let p = y.ncols();
    let w = y.transpose().matmul(dec.v()); // P x N, w[p][i] = y_p . v_i
    let mut z = Mat::zeros(n * p, n);
    for ip in 0..p {
        for i in 0..n {
            let row = ip * n + i;
            let vi = dec.v().row(i); // row i of V: entries V[i][col]
            let zr = z.row_mut(row);
            let wr = w.row(ip);
            for c in 0..n {
                zr[c] = wr[c] * vi[c];
            }
        }
    }
    Ok(z)
}

/// Least-squares filter coefficients from a frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFit {
    pub coeffs: Vec<f64>,
    /// `||Psi_L h - h_tilde||_2` at the fit.
    pub residual: f64,
    /// Set when repeated eigenvalues make the Vandermonde rank-deficient;
    /// the returned coefficients are then the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Relative gap below which two eigenvalues count as repeated. Used only for
/// conditioning warnings, never to alter results.
pub const REPEATED_EIGENVALUE_REL_TOL: f64 = 1e-9;

/// Fits coefficients `h` with `Psi_L h ~ h_tilde` in the least-squares
/// sense, reporting the residual and a rank-deficiency warning.
pub fn coeffs_from_response(
    h_tilde: &[f64],
    dec: &SpectralDecomposition,
    order: usize,
) -> Result<CoeffFit> {
    let n = dec.n();
    if h_tilde.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response length {} vs {} eigenvalues",
            h_tilde.len(),
            n
        )));
    }
    let psi = vandermonde(dec.lambda(), order)?;
    let fit = lstsq(&psi, h_tilde, 1e-12)?;
    Ok(CoeffFit {
        rank_deficient: fit.rank < order,
        coeffs: fit.solution,
        residual: fit.residual,
    })
}

/// Number of distinct eigenvalues at the repeated-eigenvalue tolerance.
pub fn distinct_eigenvalue_count(lambda: &[f64]) -> usize {
    let scale = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut count = 0;
    for (i, &li) in lambda.iter().enumerate() {
        if i == 0 || (li - lambda[i - 1]).abs() > REPEATED_EIGENVALUE_REL_TOL * scale {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{erdos_renyi, Graph};

    fn swap_shift() -> ShiftOperator {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        ShiftOperator::adjacency(&g)
    }

    #[test]
    fn eig_two_node_swap() {
        let dec = eig_sym(&swap_shift()).unwrap();
        assert!((dec.lambda()[0] + 1.0).abs() < 1e-14);
        assert!((dec.lambda()[1] - 1.0).abs() < 1e-14);
        let r = 1.0 / libm::sqrt(2.0);
        // Sign convention: first largest-magnitude entry positive.
        assert!((dec.v()[(0, 0)] - r).abs() < 1e-12);
        assert!((dec.v()[(1, 0)] + r).abs() < 1e-12);
        assert!((dec.v()[(0, 1)] - r).abs() < 1e-12);
        assert!((dec.v()[(1, 1)] - r).abs() < 1e-12);
    }

    #[test]
    fn eig_identity() {
        let s = ShiftOperator::custom(Mat::identity(3)).unwrap();
        let dec = eig_sym(&s).unwrap();
        for &l in dec.lambda() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        reconstruction_check(&s, &dec, 1e-12);
    }

    fn reconstruction_check(s: &ShiftOperator, dec: &SpectralDecomposition, tol: f64) {
        let n = dec.n();
        let mut recon = Mat::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    recon[(i, j)] += dec.lambda()[k] * dec.v()[(i, k)] * dec.v()[(j, k)];
                }
            }
        }
        let err = recon.sub(s.matrix()).frobenius_norm() / s.matrix().frobenius_norm().max(1.0);
        assert!(err < tol, "reconstruction error {err}");
    }

    #[test]
    fn eig_random_reconstructs_and_is_orthogonal() {
        let m = Mat::from_fn(8, 8, |i, j| {
            let v = libm::sin((1 + i * 8 + j) as f64) + libm::sin((1 + j * 8 + i) as f64);
            v * 0.5
        });
        let s = ShiftOperator::custom(m).unwrap();
        let dec = eig_sym(&s).unwrap();
        reconstruction_check(&s, &dec, 1e-9);
        let vt_v = dec.v().transpose().matmul(dec.v());
        assert!(vt_v.sub(&Mat::identity(8)).max_abs() < 1e-9);
        // Deterministic output for identical input.
        let dec2 = eig_sym(&s).unwrap();
        assert_eq!(dec, dec2);
    }

    #[test]
    fn eig_rejects_nonsymmetric() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let mut m = g.adjacency_matrix();
        m[(0, 1)] = 2.0;
        assert!(matches!(
            ShiftOperator::custom(m),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn vandermonde_values() {
        let m = vandermonde(&[1.0, -1.0], 2).unwrap();
        assert_eq!(m.row(0), &[1.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, -1.0]);

        let ones = vandermonde(&[0.3, -0.7, 0.1], 1).unwrap();
        for i in 0..3 {
            assert_eq!(ones[(i, 0)], 1.0);
        }

        let m = vandermonde(&[0.5, -0.25, 1.0], 3).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.5, 0.25]);
        assert_eq!(m.row(1), &[1.0, -0.25, 0.0625]);
        assert_eq!(m.row(2), &[1.0, 1.0, 1.0]);

        assert!(vandermonde(&[1.0, 2.0], 3).is_err());
        assert!(vandermonde(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn freq_response_cases() {
        let dec = eig_sym(&swap_shift()).unwrap();
        // h = [1]: identity filter.
        let r = freq_response(&[1.0], &dec).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);
        // h = [1, 0.5] on lambda = (-1, 1).
        let r = freq_response(&[1.0, 0.5], &dec).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 1.5).abs() < 1e-15);
        // h = [0, 1]: the response of S itself is lambda.
        let r = freq_response(&[0.0, 1.0], &dec).unwrap();
        assert_eq!(r, dec.lambda().to_vec());
    }

    #[test]
    fn apply_filter_identity_and_shift() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = ShiftOperator::adjacency(&g);
        let dec = eig_sym(&s).unwrap();
        let x = Mat::from_fn(3, 2, |i, j| (i * 2 + j) as f64 - 2.0);

        let f = FilterSpec::from_coeffs(vec![1.0]).unwrap();
        let y = apply_filter(&f, &dec, &x).unwrap();
        assert!(y.sub(&x).max_abs() < 1e-12);

        let f = FilterSpec::from_coeffs(vec![0.0, 1.0]).unwrap();
        let y = apply_filter(&f, &dec, &x).unwrap();
        let sx = s.matrix().matmul(&x);
        assert!(y.sub(&sx).max_abs() < 1e-12);
    }

    #[test]
    fn apply_filter_matches_polynomial_evaluation() {
        let g = erdos_renyi(10, 0.5, 42).unwrap();
        let s = ShiftOperator::normalized_adjacency(&g).unwrap();
        let dec = eig_sym(&s).unwrap();
        let h = [0.9, -0.3, 0.2, 0.05, -0.08];
        let x = Mat::from_fn(10, 3, |i, j| libm::cos((i * 3 + j) as f64));
        let f = FilterSpec::from_coeffs(h.to_vec()).unwrap();
        let spectral = apply_filter(&f, &dec, &x).unwrap();
        let horner = apply_filter_polynomial(&h, &s, &x).unwrap();
        assert!(spectral.sub(&horner).max_abs() < 1e-8);
    }

    #[test]
    fn invertibility_cases() {
        let g = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let star = ShiftOperator::adjacency(&g);
        let dec = eig_sym(&star).unwrap();

        let ident = FilterSpec::from_coeffs(vec![1.0]).unwrap();
        assert!(is_invertible(&ident, &dec, None).unwrap());

        // The star adjacency has 0 among its eigenvalues, so S itself is
        // singular as a filter.
        let shift_only = FilterSpec::from_coeffs(vec![0.0, 1.0]).unwrap();
        assert!(!is_invertible(&shift_only, &dec, None).unwrap());
        assert!(matches!(
            inverse_response(&shift_only, &dec),
            Err(Error::SingularFilter { .. })
        ));

        // |1 + 0.1 lambda| >= 0.9 on a normalized adjacency.
        let tri = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let s = ShiftOperator::normalized_adjacency(&tri).unwrap();
        let dec = eig_sym(&s).unwrap();
        let f = FilterSpec::from_coeffs(vec![1.0, 0.1]).unwrap();
        assert!(is_invertible(&f, &dec, None).unwrap());
    }

    #[test]
    fn inverse_response_values() {
        let dec = eig_sym(&swap_shift()).unwrap();
        let f = FilterSpec::from_response(vec![2.0, 0.5]).unwrap();
        let g = inverse_response(&f, &dec).unwrap();
        assert_eq!(g, vec![0.5, 2.0]);

        let ones = FilterSpec::from_response(vec![1.0, 1.0]).unwrap();
        assert_eq!(inverse_response(&ones, &dec).unwrap(), vec![1.0, 1.0]);

        let f = FilterSpec::from_response(vec![0.7, -1.3]).unwrap();
        let g = inverse_response(&f, &dec).unwrap();
        for (gi, hi) in g.iter().zip([0.7, -1.3]) {
            assert!((gi * hi - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn khatri_rao_worked_example() {
        let r = 1.0 / libm::sqrt(2.0);
        let v = Mat::from_rows(&[vec![r, r], vec![r, -r]]).unwrap();
        let dec = SpectralDecomposition::from_parts(v, vec![-1.0, 1.0]).unwrap();
        let y = Mat::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let z = khatri_rao_z(&y, &dec).unwrap();
        assert!((z[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((z[(0, 1)] - 0.5).abs() < 1e-15);
        assert!((z[(1, 0)] - 0.5).abs() < 1e-15);
        assert!((z[(1, 1)] + 0.5).abs() < 1e-15);

        let zero = Mat::zeros(2, 3);
        let z = khatri_rao_z(&zero, &dec).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn coeffs_from_response_roundtrip() {
        let g = erdos_renyi(12, 0.4, 7).unwrap();
        let s = ShiftOperator::normalized_adjacency(&g).unwrap();
        let dec = eig_sym(&s).unwrap();
        let h = vec![0.8, 0.15, -0.25, 0.1];
        let ht = freq_response(&h, &dec).unwrap();
        let fit = coeffs_from_response(&ht, &dec, 4).unwrap();
        assert!(!fit.rank_deficient);
        assert!(fit.residual < 1e-9);
        for (a, b) in fit.coeffs.iter().zip(&h) {
            assert!((a - b).abs() < 1e-6);
        }

        // h_tilde = 1, L = 1 recovers h = [1] with zero residual.
        let fit = coeffs_from_response(&vec![1.0; 12], &dec, 1).unwrap();
        assert!((fit.coeffs[0] - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn coeffs_from_response_repeated_eigenvalues_warn() {
        // Identity shift: all eigenvalues equal, Psi_2 is rank 1. An
        // inconsistent response on the duplicated rows leaves a residual.
        let s = ShiftOperator::custom(Mat::identity(3)).unwrap();
        let dec = eig_sym(&s).unwrap();
        assert_eq!(distinct_eigenvalue_count(dec.lambda()), 1);
        let fit = coeffs_from_response(&[1.0, 1.0, 2.0], &dec, 2).unwrap();
        assert!(fit.rank_deficient);
        assert!(fit.residual > 0.1);
    }
}
