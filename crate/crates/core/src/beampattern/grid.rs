//! Pattern grids over normalized spatial frequency and their CSV export.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::geometry::AngularPair;
use crate::io::fmt_f64;

/// Default grid side used for exported figures.
pub const DEFAULT_GRID_POINTS: usize = 256;

/// CSV header of a pattern-grid export.
pub const PATTERN_CSV_HEADER: &str = "psi_azi_norm,psi_ele_norm,magnitude,phase";

/// `n` equally spaced points covering [−1, 1] inclusive.
pub fn normalized_axis(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Pattern samples on an `n × n` grid over (λ/2π)ψ_out ∈ [−1, 1]², azimuth
/// index slowest.
#[derive(Debug, Clone)]
pub struct PatternGrid {
    pub axis: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl PatternGrid {
    pub fn evaluate<F>(n: usize, lambda: f64, pattern: F) -> Self
    where
        F: Fn(AngularPair) -> Complex64 + Sync,
    {
        let axis = normalized_axis(n);
        let values = (0..n * n)
            .into_par_iter()
            .map(|i| {
                let (a, e) = (axis[i / n], axis[i % n]);
                pattern(AngularPair::from_normalized(lambda, a, e))
            })
            .collect();
        Self { axis, values }
    }

    pub fn side(&self) -> usize {
        self.axis.len()
    }

    /// Normalized coordinates of flat index `i`.
    pub fn coords(&self, i: usize) -> (f64, f64) {
        let n = self.side();
        (self.axis[i / n], self.axis[i % n])
    }

    /// Flat index of the largest magnitude (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > self.values[best].norm() {
                best = i;
            }
        }
        best
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Copy scaled so that the peak magnitude is 1.
    pub fn peak_normalized(&self) -> Self {
        let p = self.peak();
        let s = if p > 0.0 { 1.0 / p } else { 1.0 };
        Self { axis: self.axis.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    /// Writes `psi_azi_norm,psi_ele_norm,magnitude,phase` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{PATTERN_CSV_HEADER}")?;
        for (i, v) in self.values.iter().enumerate() {
            let (a, e) = self.coords(i);
            writeln!(w, "{},{},{},{}", fmt_f64(a), fmt_f64(e), fmt_f64(v.norm()), fmt_f64(v.arg()))?;
        }
        Ok(())
    }
}
