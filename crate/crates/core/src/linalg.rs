//! Dense complex least squares by Householder QR.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{HolorisError, Result};

/// Diagonal entries of R below this fraction of the largest are treated as
/// zero when deciding rank.
pub const RANK_TOL: f64 = 1e-12;

/// Householder QR of an m × n matrix with m ≥ n. Reflector k is
/// I − 2 v_k v_k^H with ‖v_k‖ = 1 acting on rows k..m.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Upper triangle holds R; the strict lower part is unused.
    r: Array2<Complex64>,
    reflectors: Vec<Array1<Complex64>>,
    /// Complex multiplications spent on the factorization.
    pub mults: u64,
}

impl HouseholderQr {
    pub fn new(a: ArrayView2<'_, Complex64>) -> Result<Self> {
        let (m, n) = a.dim();
        if m < n {
            return Err(HolorisError::Underdetermined { rows: m, cols: n });
        }
        let mut r = a.to_owned();
        let mut reflectors = Vec::with_capacity(n);
        let mut mults = 0u64;
        for k in 0..n {
            let x = r.slice(s![k.., k]).to_owned();
            let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            mults += (m - k) as u64;
            let mut v = x;
            if norm == 0.0 {
                v.fill(Complex64::new(0.0, 0.0));
                reflectors.push(v);
                continue;
            }
            let phase = if v[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
            let alpha = -phase * norm;
            v[0] -= alpha;
            let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.mapv_inplace(|c| c / vn);
            let mut block = r.slice_mut(s![k.., k..]);
            apply_reflector(&v, &mut block);
            mults += 2 * ((m - k) * (n - k)) as u64;
            // Clean the column below the diagonal.
            r[[k, k]] = alpha;
            for i in k + 1..m {
                r[[i, k]] = Complex64::new(0.0, 0.0);
            }
            reflectors.push(v);
        }
        Ok(Self { r, reflectors, mults })
    }

    pub fn cols(&self) -> usize {
        self.r.ncols()
    }

    /// |r_kk| for k = 0..n.
    pub fn diagonal_magnitudes(&self) -> Vec<f64> {
        (0..self.cols()).map(|k| self.r[[k, k]].norm()).collect()
    }

    /// Fails with [`HolorisError::Singular`] if min|r_kk| / max|r_kk| < [`RANK_TOL`].
    pub fn check_rank(&self, context: &'static str) -> Result<()> {
        let d = self.diagonal_magnitudes();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if d.is_empty() || ratio >= RANK_TOL {
            return Ok(());
        }
        let rank = d.iter().filter(|&&v| max > 0.0 && v >= RANK_TOL * max).count();
        Err(HolorisError::Singular { context, ratio, rank, cols: d.len() })
    }

    /// Least-squares solution X of A X ≈ B, plus the multiplication count of
    /// the solve.
    pub fn solve(&self, b: ArrayView2<'_, Complex64>, context: &'static str) -> Result<(Array2<Complex64>, u64)> {
        self.check_rank(context)?;
        let (m, n) = self.r.dim();
        if b.nrows() != m {
            return Err(HolorisError::Shape { what: "right-hand side rows", expected: m, got: b.nrows() });
        }
        let mut qb = b.to_owned();
        let mut mults = 0u64;
        for (k, v) in self.reflectors.iter().enumerate() {
            let mut block = qb.slice_mut(s![k.., ..]);
            apply_reflector(v, &mut block);
            mults += 2 * ((m - k) * b.ncols()) as u64;
        }
        let mut x = Array2::zeros((n, b.ncols()));
        for c in 0..b.ncols() {
            for k in (0..n).rev() {
                let mut acc = qb[[k, c]];
                for j in k + 1..n {
                    acc -= self.r[[k, j]] * x[[j, c]];
                }
                x[[k, c]] = acc / self.r[[k, k]];
                mults += (n - k) as u64;
            }
        }
        Ok((x, mults))
    }
}

/// block ← (I − 2 v v^H) block.
fn apply_reflector(v: &Array1<Complex64>, block: &mut ndarray::ArrayViewMut2<'_, Complex64>) {
    for mut col in block.axis_iter_mut(Axis(1)) {
        let dot: Complex64 = v.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
        let f = dot * 2.0;
        for (c, a) in col.iter_mut().zip(v.iter()) {
            *c -= a * f;
        }
    }
}

/// Least-squares solution of A x ≈ b for a single right-hand side.
pub fn lstsq_vec(a: ArrayView2<'_, Complex64>, b: ArrayView1<'_, Complex64>, context: &'static str) -> Result<Array1<Complex64>> {
    let qr = HouseholderQr::new(a)?;
    let (x, _) = qr.solve(b.insert_axis(Axis(1)), context)?;
    Ok(x.column(0).to_owned())
}
