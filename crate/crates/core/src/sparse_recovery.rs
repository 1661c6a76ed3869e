//! Orthogonal matching pursuit over the implicit operator A = F_u^T ⊗ W.
//!
//! vec(·) stacks columns, so for H of size B × N_CP the unknown index is
//! i = t·B + b and for Y of size N_P × N_used the measurement index is
//! n·N_P + p. A is never formed: A vec(H) = vec(W H F_u) and
//! A^H vec(R) = vec(W^H R F_u^H).

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{check_shape, domain, Result};
use crate::linalg::HouseholderQr;

/// The operator F_u^T ⊗ W, held as its two factors.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerOperator {
    /// W, N_P × B.
    pub w: Array2<Complex64>,
    /// F_u, N_CP × N_used.
    pub f_u: Array2<Complex64>,
}

impl KroneckerOperator {
    pub fn new(w: Array2<Complex64>, f_u: Array2<Complex64>) -> Result<Self> {
        if w.is_empty() || f_u.is_empty() {
            return domain("Kronecker factors must be non-empty");
        }
        Ok(Self { w, f_u })
    }

    /// (N_P·N_used, B·N_CP).
    pub fn shape(&self) -> (usize, usize) {
        (self.w.nrows() * self.f_u.ncols(), self.w.ncols() * self.f_u.nrows())
    }

    /// (B, N_CP) of the unknown matrix.
    pub fn unknown_shape(&self) -> (usize, usize) {
        (self.w.ncols(), self.f_u.nrows())
    }

    /// (N_P, N_used) of the measurement matrix.
    pub fn measurement_shape(&self) -> (usize, usize) {
        (self.w.nrows(), self.f_u.ncols())
    }

    /// vec(W H F_u).
    pub fn apply(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        let (b, t) = self.unknown_shape();
        check_shape("unknown vector length", b * t, h.len())?;
        let hm = unvec(h, b, t);
        Ok(vec_of(&self.w.dot(&hm).dot(&self.f_u)))
    }

    /// vec(W^H R F_u^H).
    pub fn adjoint(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        let (p, n) = self.measurement_shape();
        check_shape("measurement vector length", p * n, r.len())?;
        let rm = unvec(r, p, n);
        let wh = self.w.t().mapv(|v| v.conj());
        let fh = self.f_u.t().mapv(|v| v.conj());
        Ok(vec_of(&wh.dot(&rm).dot(&fh)))
    }

    /// Column `i` of A: entries W[p, b]·F_u[t, n] at n·N_P + p.
    pub fn column(&self, i: usize) -> Vec<Complex64> {
        let bb = self.w.ncols();
        let (b, t) = (i % bb, i / bb);
        let (np, nu) = self.measurement_shape();
        let mut out = Vec::with_capacity(np * nu);
        for n in 0..nu {
            let f = self.f_u[[t, n]];
            for p in 0..np {
                out.push(self.w[[p, b]] * f);
            }
        }
        out
    }

    /// The dense matrix, for testing.
    pub fn materialize(&self) -> Array2<Complex64> {
        let (m, n) = self.shape();
        let mut a = Array2::zeros((m, n));
        for j in 0..n {
            for (i, v) in self.column(j).into_iter().enumerate() {
                a[[i, j]] = v;
            }
        }
        a
    }

    /// Complex multiplications of one adjoint application.
    pub fn adjoint_mults(&self) -> u64 {
        let (np, nu) = self.measurement_shape();
        let (b, t) = self.unknown_shape();
        (b * nu * (np + t)) as u64
    }
}

/// Column-major vec.
pub fn vec_of(m: &Array2<Complex64>) -> Vec<Complex64> {
    m.t().iter().cloned().collect()
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &[Complex64], rows: usize, cols: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |(r, c)| v[c * rows + r])
}

fn argmax_magnitude(corr: &[Complex64], skip: &[bool]) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, c) in corr.iter().enumerate() {
        if skip.get(i).copied().unwrap_or(false) {
            continue;
        }
        let v = c.norm_sqr();
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// argmax_i |[A^H r]_i|, ties to the lowest index.
pub fn matched_filter(op: &KroneckerOperator, residual: &[Complex64]) -> Result<usize> {
    Ok(argmax_magnitude(&op.adjoint(residual)?, &[]))
}

fn gather_columns(op: &KroneckerOperator, support: &[usize]) -> Array2<Complex64> {
    let m = op.shape().0;
    let mut a = Array2::zeros((m, support.len()));
    for (j, &i) in support.iter().enumerate() {
        for (r, v) in op.column(i).into_iter().enumerate() {
            a[[r, j]] = v;
        }
    }
    a
}

/// Least-squares coefficients of `y` on the columns `support` of A.
pub fn support_ls(op: &KroneckerOperator, y: &[Complex64], support: &[usize]) -> Result<Vec<Complex64>> {
    Ok(support_ls_counted(op, y, support)?.0)
}

fn support_ls_counted(op: &KroneckerOperator, y: &[Complex64], support: &[usize]) -> Result<(Vec<Complex64>, u64)> {
    let (m, n) = op.shape();
    check_shape("measurement vector length", m, y.len())?;
    if let Some(&bad) = support.iter().find(|&&i| i >= n) {
        return domain(format!("support index {bad} out of range 0..{n}"));
    }
    let a = gather_columns(op, support);
    let qr = HouseholderQr::new(a.view())?;
    let b = Array2::from_shape_vec((m, 1), y.to_vec()).expect("length checked");
    let (x, mults) = qr.solve(b.view(), "support least squares")?;
    Ok((x.column(0).to_vec(), qr.mults + mults))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpConfig {
    /// N_max ≥ 1.
    pub max_iters: usize,
    /// Stop once ‖r‖ ≤ residual_tol; 0 disables the check.
    pub residual_tol: f64,
}

impl OmpConfig {
    pub fn new(max_iters: usize) -> Self {
        Self { max_iters, residual_tol: 0.0 }
    }
}

/// One OMP iteration as recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpStep {
    pub index: usize,
    pub residual_norm: f64,
}

/// Complex-multiplication counts accumulated by [`omp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Telemetry {
    pub iterations: usize,
    pub matched_filter_mults: u64,
    pub least_squares_mults: u64,
    pub residual_mults: u64,
}

impl Telemetry {
    pub fn total(&self) -> u64 {
        self.matched_filter_mults + self.least_squares_mults + self.residual_mults
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    /// Selected indices into vec(H), in selection order.
    pub support: Vec<usize>,
    pub values: Vec<Complex64>,
    /// Ĥ (B × N_CP), zero off the support.
    pub h_hat: Array2<Complex64>,
    pub initial_residual: f64,
    pub trace: Vec<OmpStep>,
    pub telemetry: Telemetry,
}

/// Greedy recovery of H from Y ≈ W H F_u.
///
/// Each iteration picks the unselected column most correlated with the
/// residual, re-solves least squares on the support and updates the
/// residual. The loop ends after `max_iters` iterations, when the residual
/// is exactly zero, or when it falls to `residual_tol`. Least-squares
/// failures are returned as errors.
pub fn omp(op: &KroneckerOperator, y: ArrayView2<'_, Complex64>, cfg: &OmpConfig) -> Result<SparseEstimate> {
    if cfg.max_iters == 0 {
        return domain("OMP needs at least one iteration");
    }
    let (np, nu) = op.measurement_shape();
    check_shape("measurement rows", np, y.nrows())?;
    check_shape("measurement columns", nu, y.ncols())?;
    let (bb, ncp) = op.unknown_shape();
    let yv = vec_of(&y.to_owned());
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut r = yv.clone();
    let initial_residual = norm(&r);
    let mut support = Vec::new();
    let mut selected = vec![false; bb * ncp];
    let mut values = Vec::new();
    let mut trace = Vec::new();
    let mut tel = Telemetry::default();
    let mut rn = initial_residual;
    while tel.iterations < cfg.max_iters && support.len() < bb * ncp {
        if rn == 0.0 || (cfg.residual_tol > 0.0 && rn <= cfg.residual_tol) {
            break;
        }
        let corr = op.adjoint(&r)?;
        tel.matched_filter_mults += op.adjoint_mults();
        let i = argmax_magnitude(&corr, &selected);
        selected[i] = true;
        support.push(i);
        let (x, ls) = support_ls_counted(op, &yv, &support)?;
        tel.least_squares_mults += ls;
        values = x;
        let a = gather_columns(op, &support);
        let fit = a.dot(&Array1::from(values.clone()));
        tel.residual_mults += (a.nrows() * a.ncols()) as u64;
        for (ri, (yi, fi)) in r.iter_mut().zip(yv.iter().zip(fit.iter())) {
            *ri = yi - fi;
        }
        rn = norm(&r);
        tel.iterations += 1;
        trace.push(OmpStep { index: i, residual_norm: rn });
    }
    let mut h = vec![Complex64::new(0.0, 0.0); bb * ncp];
    for (&i, &v) in support.iter().zip(&values) {
        h[i] = v;
    }
    Ok(SparseEstimate {
        support,
        values,
        h_hat: unvec(&h, bb, ncp),
        initial_residual,
        trace,
        telemetry: tel,
    })
}
