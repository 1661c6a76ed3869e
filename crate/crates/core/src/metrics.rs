//! Figures of merit: NMSE, ASE, grouping-failure probability, pilot overhead
//! and complexity counts, plus the CSV layout shared by every sweep.

use std::io::{self, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{check_shape, domain, Result};
use crate::io::{fmt_f64, write_comments};
use crate::sparse_recovery::Telemetry;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// ‖Ĥ − H‖²_F / ‖H‖²_F for one trial.
pub fn nmse(h_hat: &Array2<Complex64>, h: &Array2<Complex64>) -> Result<f64> {
    check_shape("NMSE rows", h.nrows(), h_hat.nrows())?;
    check_shape("NMSE columns", h.ncols(), h_hat.ncols())?;
    let den: f64 = h.iter().map(|v| v.norm_sqr()).sum();
    if den <= 0.0 {
        return domain("NMSE against an all-zero channel");
    }
    let num: f64 = h_hat.iter().zip(h.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadReport {
    pub t_dl: f64,
    pub t_ul: f64,
    pub t_total: f64,
    /// Candidates compared in the downlink argmax, G_xG_yM_x^UM_y^U.
    pub downlink_search_ops: u64,
    /// Complex multiplications spent by uplink recovery (0 until filled in).
    pub uplink_mult_count: u64,
}

/// Airtime of the downlink sweep and the uplink pilots; each pilot slot is
/// one UW pair of 2N_CP samples.
pub fn pilot_overhead(g: (usize, usize), m_u: (usize, usize), n_p: usize, n_cp: usize, t_s: f64) -> OverheadReport {
    let slot = 2.0 * n_cp as f64 * t_s;
    let ops = (g.0 * g.1 * m_u.0 * m_u.1) as u64;
    let t_dl = slot * ops as f64;
    let t_ul = slot * n_p as f64;
    OverheadReport { t_dl, t_ul, t_total: t_dl + t_ul, downlink_search_ops: ops, uplink_mult_count: 0 }
}

impl OverheadReport {
    pub fn with_uplink_mults(mut self, mults: u64) -> Self {
        self.uplink_mult_count = mults;
        self
    }

    /// 1 − T_total/T_coh, the share of the coherence time left for data.
    pub fn airtime_fraction(&self, t_coh: f64) -> Result<f64> {
        if !(t_coh > 0.0) {
            return domain("T_coh must be positive");
        }
        if self.t_total >= t_coh {
            return domain(format!("pilot overhead {:.3e} s exceeds T_coh = {t_coh:.3e} s", self.t_total));
        }
        Ok(1.0 - self.t_total / t_coh)
    }
}

/// Complex multiplications of one OMP run.
pub fn uplink_multiplications(t: &Telemetry) -> u64 {
    t.total()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AseInput {
    pub t_coh: f64,
    /// Effective channel of each of the K subcarriers.
    pub h_fd: Vec<Complex64>,
    pub p_tx: f64,
    pub sigma_n2: f64,
}

/// (1 − T_total/T_coh)·(1/K)Σ_k log2(1 + P|h_k|²/(Kσ_n²)).
pub fn ase(inp: &AseInput, overhead: &OverheadReport) -> Result<f64> {
    if inp.h_fd.is_empty() {
        return domain("ASE needs at least one subcarrier");
    }
    if !(inp.sigma_n2 > 0.0) || inp.p_tx < 0.0 {
        return domain("ASE needs σ_n² > 0 and P ≥ 0");
    }
    let pre = overhead.airtime_fraction(inp.t_coh)?;
    let k = inp.h_fd.len() as f64;
    let rate: f64 = inp.h_fd.iter().map(|h| (1.0 + inp.p_tx * h.norm_sqr() / (k * inp.sigma_n2)).log2()).sum::<f64>() / k;
    Ok(pre * rate)
}

/// Fraction of failed trials.
pub fn grouping_failure_prob(failures: &[bool]) -> Result<f64> {
    if failures.is_empty() {
        return domain("no trials");
    }
    Ok(failures.iter().filter(|f| **f).count() as f64 / failures.len() as f64)
}

/// Sample mean and 95% half-width 1.96·s/√n (zero for n < 2).
pub fn mean_ci(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return domain("no samples");
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Z95 * (var / n).sqrt()))
}

/// Normal-approximation half-width of a proportion.
pub fn binomial_ci(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

pub const SWEEP_CSV_HEADER: &str = "series,x_value,metric,ci_halfwidth,trials";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub series: String,
    pub x: f64,
    pub metric: f64,
    pub ci: f64,
    pub trials: usize,
}

/// Comment lines, then the sweep header and one row per point.
pub fn write_sweep_csv<W: Write>(w: &mut W, comments: &[String], points: &[SweepPoint]) -> io::Result<()> {
    write_comments(w, comments)?;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.series, fmt_f64(p.x), fmt_f64(p.metric), fmt_f64(p.ci), p.trials)?;
    }
    Ok(())
}
