//! Infeasible-start Mehrotra predictor-corrector interior-point method for
//! dense linear programs in the form
//!
//! ```text
//! minimize    c^T x
//! subject to  G x + s = h,   s >= 0
//!             A x = b
//! ```
//!
//! The Newton systems reduce to
//!
//! ```text
//! [ G^T D G   A^T ] [dx]   [rx]          D = diag(z / s)
//! [   A        0  ] [dy] = [ry]
//! ```
//!
//! and problem-specific structure lives behind [`KktSystem`]: callers supply
//! the constraint products and a factor/solve pair for the reduced system,
//! so the weighted l1 solver can exploit its two-block structure while the
//! certificate LPs use a generic dense path.

use alloc::{vec, vec::Vec};

use crate::mat::{dot, norm_inf, Cholesky, Mat};

/// Constraint-matrix products and the reduced KKT solve for one LP.
pub(crate) trait KktSystem {
    fn nx(&self) -> usize;
    fn n_ineq(&self) -> usize;
    fn n_eq(&self) -> usize;
    /// `out = G x`
    fn g_mul(&self, x: &[f64], out: &mut [f64]);
    /// `out = G^T z`
    fn gt_mul(&self, z: &[f64], out: &mut [f64]);
    /// `out = A x`
    fn a_mul(&self, x: &[f64], out: &mut [f64]);
    /// `out = A^T y`
    fn at_mul(&self, y: &[f64], out: &mut [f64]);
    /// Prepares the reduced system for `D = diag(d)`; `reg` is an extra
    /// diagonal regularization. Returns false when the factorization fails.
    fn factor(&mut self, d: &[f64], reg: f64) -> bool;
    /// Solves the factored reduced system.
    fn solve(&self, rx: &[f64], ry: &[f64], dx: &mut [f64], dy: &mut [f64]);
}

/// Solution summary of one IPM run.
#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub y: Vec<f64>,
    #[allow(dead_code)]
    pub primal_obj: f64,
    /// Relative duality gap certified at the returned iterate.
    pub rel_gap: f64,
    /// Max of the scaled primal/dual residual norms.
    #[allow(dead_code)]
    pub feas: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct IpmOptions {
    pub tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl IpmOptions {
    pub fn with_tol(tol: f64) -> Self {
        IpmOptions {
            tol,
            feas_tol: tol.max(1e-11),
            max_iter: 100,
        }
    }
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (&vi, &dvi) in v.iter().zip(dv) {
        if dvi < 0.0 {
            alpha = alpha.min(-vi / dvi);
        }
    }
    alpha
}

/// Runs the predictor-corrector loop from a caller-supplied interior start.
///
/// `x0` need not satisfy the constraints, but `s0` and `z0` must be strictly
/// positive; a dual-feasible `z0` (when the problem structure offers one)
/// shortens the path considerably. Deterministic for identical inputs.
pub(crate) fn mehrotra(
    kkt: &mut dyn KktSystem,
    c: &[f64],
    h: &[f64],
    b: &[f64],
    x0: Vec<f64>,
    s0: Vec<f64>,
    z0: Vec<f64>,
    opts: &IpmOptions,
) -> LpSolution {
    let nx = kkt.nx();
    let mi = kkt.n_ineq();
    let me = kkt.n_eq();
    debug_assert!(mi > 0, "interior-point solve needs inequality rows");

    let mut x = x0;
    let mut s = s0;
    let mut y = vec![0.0; me];
    let mut z = z0;

    let norm_c = norm_inf(c).max(1.0);
    let norm_h = norm_inf(h).max(1.0);
    let norm_b = norm_inf(b).max(1.0);

    let mut gx = vec![0.0; mi];
    let mut ax = vec![0.0; me];
    let mut gtz = vec![0.0; nx];
    let mut aty = vec![0.0; nx];
    let mut rd = vec![0.0; nx];
    let mut rp = vec![0.0; me];
    let mut rg = vec![0.0; mi];
    let mut d = vec![0.0; mi];
    let mut rhs_x = vec![0.0; nx];
    let mut rhs_y = vec![0.0; me];
    let mut dx = vec![0.0; nx];
    let mut dy = vec![0.0; me];
    let mut dz = vec![0.0; mi];
    let mut ds = vec![0.0; mi];
    let mut dx_c = vec![0.0; nx];
    let mut dy_c = vec![0.0; me];
    let mut work_mi = vec![0.0; mi];
    let mut gdx = vec![0.0; mi];

    let mut best: Option<(f64, LpSolution)> = None;
    let mut stalls = 0usize;

    for iter in 0..opts.max_iter {
        kkt.g_mul(&x, &mut gx);
        kkt.a_mul(&x, &mut ax);
        kkt.gt_mul(&z, &mut gtz);
        kkt.at_mul(&y, &mut aty);
        for i in 0..nx {
            rd[i] = c[i] + gtz[i] + aty[i];
        }
        for i in 0..me {
            rp[i] = ax[i] - b[i];
        }
        for i in 0..mi {
            rg[i] = gx[i] + s[i] - h[i];
        }
        let mu = dot(&z, &s) / mi as f64;
        let pobj = dot(c, &x);
        let dobj = -dot(b, &y) - dot(h, &z);
        let gap = pobj - dobj;
        let rel_gap = gap.abs() / (1.0 + pobj.abs().max(dobj.abs()));
        let feas = (norm_inf(&rp) / norm_b)
            .max(norm_inf(&rg) / norm_h)
            .max(norm_inf(&rd) / norm_c);

        if !mu.is_finite() || !feas.is_finite() {
            break;
        }

        let make_solution = |converged: bool, iterations: usize| LpSolution {
            x: x.clone(),
            y: y.clone(),
            primal_obj: pobj,
            rel_gap,
            feas,
            iterations,
            converged,
        };

        if feas <= opts.feas_tol && (rel_gap <= opts.tol || mu <= opts.tol * 1e-2) {
            return make_solution(true, iter);
        }

        let score = rel_gap.max(feas);
        match &best {
            Some((s_best, _)) if *s_best <= score => {
                stalls += 1;
            }
            _ => {
                stalls = 0;
                best = Some((score, make_solution(false, iter)));
            }
        }
        if stalls >= 10 {
            break;
        }

        for i in 0..mi {
            d[i] = z[i] / s[i];
        }
        let mut reg = 0.0;
        let mut factored = kkt.factor(&d, reg);
        while !factored && reg < 1e-4 {
            reg = if reg == 0.0 { 1e-12 } else { reg * 100.0 };
            factored = kkt.factor(&d, reg);
        }
        if !factored {
            break;
        }

        // One Newton solve for a given complementarity target rc.
        // Writes dx, dy, dz, ds.
        let mut direction = |rc: &[f64],
                             dx: &mut Vec<f64>,
                             dy: &mut Vec<f64>,
                             dz: &mut Vec<f64>,
                             ds: &mut Vec<f64>,
                             work_mi: &mut Vec<f64>,
                             gdx: &mut Vec<f64>| {
            for i in 0..mi {
                work_mi[i] = (rc[i] + z[i] * rg[i]) / s[i];
            }
            kkt.gt_mul(work_mi, &mut rhs_x);
            for i in 0..nx {
                rhs_x[i] = -rd[i] - rhs_x[i];
            }
            for i in 0..me {
                rhs_y[i] = -rp[i];
            }
            kkt.solve(&rhs_x, &rhs_y, dx, dy);

            // One pass of iterative refinement on the reduced system.
            kkt.g_mul(dx, gdx);
            for i in 0..mi {
                gdx[i] *= d[i];
            }
            let mut res_x = vec![0.0; nx];
            kkt.gt_mul(gdx, &mut res_x);
            let mut at_dy = vec![0.0; nx];
            kkt.at_mul(dy, &mut at_dy);
            for i in 0..nx {
                res_x[i] = rhs_x[i] - res_x[i] - at_dy[i];
            }
            let mut res_y = vec![0.0; me];
            kkt.a_mul(dx, &mut res_y);
            for i in 0..me {
                res_y[i] = rhs_y[i] - res_y[i];
            }
            let mut cx = vec![0.0; nx];
            let mut cy = vec![0.0; me];
            kkt.solve(&res_x, &res_y, &mut cx, &mut cy);
            for i in 0..nx {
                dx[i] += cx[i];
            }
            for i in 0..me {
                dy[i] += cy[i];
            }

            kkt.g_mul(dx, gdx);
            for i in 0..mi {
                ds[i] = -rg[i] - gdx[i];
                dz[i] = (rc[i] + z[i] * rg[i]) / s[i] + d[i] * gdx[i];
            }
        };

        // Predictor (affine scaling) direction.
        let rc_aff: Vec<f64> = (0..mi).map(|i| -z[i] * s[i]).collect();
        direction(
            &rc_aff, &mut dx, &mut dy, &mut dz, &mut ds, &mut work_mi, &mut gdx,
        );
        let alpha_p_aff = max_step(&s, &ds).min(1.0);
        let alpha_d_aff = max_step(&z, &dz).min(1.0);
        let mut mu_aff = 0.0;
        for i in 0..mi {
            mu_aff += (s[i] + alpha_p_aff * ds[i]) * (z[i] + alpha_d_aff * dz[i]);
        }
        mu_aff /= mi as f64;
        let sigma = {
            let ratio = (mu_aff / mu).clamp(0.0, 1.0);
            (ratio * ratio * ratio).clamp(1e-8, 1.0)
        };

        // Corrector direction with Mehrotra's second-order term.
        let rc_cor: Vec<f64> = (0..mi)
            .map(|i| -z[i] * s[i] + sigma * mu - ds[i] * dz[i])
            .collect();
        direction(
            &rc_cor, &mut dx_c, &mut dy_c, &mut dz, &mut ds, &mut work_mi, &mut gdx,
        );

        let tau = 0.995;
        let alpha_p = (tau * max_step(&s, &ds)).min(1.0);
        let alpha_d = (tau * max_step(&z, &dz)).min(1.0);
        if !alpha_p.is_finite() || !alpha_d.is_finite() {
            break;
        }

        let mut finite = true;
        for i in 0..nx {
            x[i] += alpha_p * dx_c[i];
            finite &= x[i].is_finite();
        }
        for i in 0..mi {
            s[i] = (s[i] + alpha_p * ds[i]).max(1e-300);
            finite &= s[i].is_finite();
        }
        for i in 0..me {
            y[i] += alpha_d * dy_c[i];
            finite &= y[i].is_finite();
        }
        for i in 0..mi {
            z[i] = (z[i] + alpha_d * dz[i]).max(1e-300);
            finite &= z[i].is_finite();
        }
        if !finite {
            break;
        }
    }

    // Not converged: return the best iterate seen.
    match best {
        Some((_, sol)) => sol,
        None => LpSolution {
            x,
            y,
            primal_obj: f64::NAN,
            rel_gap: f64::INFINITY,
            feas: f64::INFINITY,
            iterations: opts.max_iter,
            converged: false,
        },
    }
}

/// Generic dense LP: explicit `G` and `A`, normal-equations reduction with a
/// Schur complement on the equality block.
pub(crate) struct DenseLp {
    g: Mat,
    a: Mat,
    chol_h: Option<Cholesky>,
    /// `H^{-1} A^T`, shape nx x me.
    w: Mat,
    chol_schur: Option<Cholesky>,
}

impl DenseLp {
    pub(crate) fn new(g: Mat, a: Mat) -> DenseLp {
        let nx = g.ncols();
        let me = a.nrows();
        assert_eq!(a.ncols(), nx);
        DenseLp {
            g,
            a,
            chol_h: None,
            w: Mat::zeros(nx, me),
            chol_schur: None,
        }
    }
}

impl KktSystem for DenseLp {
    fn nx(&self) -> usize {
        self.g.ncols()
    }
    fn n_ineq(&self) -> usize {
        self.g.nrows()
    }
    fn n_eq(&self) -> usize {
        self.a.nrows()
    }
    fn g_mul(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.g.matvec(x));
    }
    fn gt_mul(&self, z: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.g.tr_matvec(z));
    }
    fn a_mul(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.matvec(x));
    }
    fn at_mul(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.tr_matvec(y));
    }

    fn factor(&mut self, d: &[f64], reg: f64) -> bool {
        let nx = self.nx();
        let me = self.n_eq();
        let mut hmat = Mat::zeros(nx, nx);
        // H = G^T D G, accumulated row by row; skips zero entries, which
        // makes the certificate LPs (two nonzeros per row) cheap.
        for (k, &dk) in d.iter().enumerate() {
            let row = self.g.row(k);
            for (i, &gki) in row.iter().enumerate() {
                if gki == 0.0 {
                    continue;
                }
                let scaled = dk * gki;
                for (j, &gkj) in row.iter().enumerate().skip(i) {
                    if gkj != 0.0 {
                        hmat[(i, j)] += scaled * gkj;
                    }
                }
            }
        }
        for i in 0..nx {
            for j in (i + 1)..nx {
                hmat[(j, i)] = hmat[(i, j)];
            }
        }
        let base = 1e-13 * (1.0 + hmat.max_abs());
        for i in 0..nx {
            hmat[(i, i)] += base + reg;
        }
        let chol = match Cholesky::factor(&hmat, 0.0) {
            Some(c) => c,
            None => return false,
        };
        // W = H^{-1} A^T and the Schur complement A W.
        let mut w = Mat::zeros(nx, me);
        for j in 0..me {
            let col = chol.solve(&self.a.row(j).to_vec());
            for i in 0..nx {
                w[(i, j)] = col[i];
            }
        }
        let mut schur = Mat::zeros(me, me);
        for i in 0..me {
            for j in 0..me {
                schur[(i, j)] = dot(self.a.row(i), &w.col(j));
            }
        }
        let sreg = 1e-13 * (1.0 + schur.max_abs()) + reg;
        for i in 0..me {
            schur[(i, i)] += sreg;
        }
        let chol_schur = match Cholesky::factor(&schur, 0.0) {
            Some(c) => c,
            None => return false,
        };
        self.chol_h = Some(chol);
        self.w = w;
        self.chol_schur = Some(chol_schur);
        true
    }

    fn solve(&self, rx: &[f64], ry: &[f64], dx: &mut [f64], dy: &mut [f64]) {
        let chol = self.chol_h.as_ref().expect("factor before solve");
        let schur = self.chol_schur.as_ref().expect("factor before solve");
        let u = chol.solve(rx);
        let me = self.n_eq();
        let mut rhs = vec![0.0; me];
        for i in 0..me {
            rhs[i] = dot(self.a.row(i), &u) - ry[i];
        }
        let yv = schur.solve(&rhs);
        for i in 0..self.nx() {
            let mut corr = 0.0;
            for j in 0..me {
                corr += self.w[(i, j)] * yv[j];
            }
            dx[i] = u[i] - corr;
        }
        dy.copy_from_slice(&yv);
    }
}
