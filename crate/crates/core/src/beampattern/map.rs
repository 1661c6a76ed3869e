//! Reflection-coefficient maps and phase quantization.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_shape, domain, HolorisError, Result};

/// Slack allowed above unit modulus when validating passivity.
const PASSIVE_SLACK: f64 = 1e-9;

/// Grid of reflection coefficients Φ(m, n), stored row-major with the
/// azimuth index `m` slowest: `coeffs[m * ny + n]`, both 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionMap {
    nx: usize,
    ny: usize,
    coeffs: Vec<Complex64>,
}

impl ReflectionMap {
    /// Wraps coefficients after checking the passive constraint |Φ| ≤ 1.
    ///
    /// Maps built by the synthesis routines additionally have max |Φ| = 1;
    /// this constructor also admits attenuated maps (e.g. the all-zero map).
    pub fn from_coeffs(nx: usize, ny: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_shape("reflection map size", nx * ny, coeffs.len())?;
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(HolorisError::NonFinite("reflection map"));
        }
        if let Some(c) = coeffs.iter().find(|c| c.norm() > 1.0 + PASSIVE_SLACK) {
            return domain(format!("coefficient modulus {} exceeds 1 (passive element)", c.norm()));
        }
        Ok(Self { nx, ny, coeffs })
    }

    /// Scales arbitrary coefficients so that max |Φ| = 1.
    pub fn normalized(nx: usize, ny: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        check_shape("reflection map size", nx * ny, coeffs.len())?;
        let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !peak.is_finite() {
            return Err(HolorisError::NonFinite("reflection map"));
        }
        if peak == 0.0 {
            return Err(HolorisError::DegenerateBand("all coefficients are zero".into()));
        }
        let s = 1.0 / peak;
        coeffs.iter_mut().for_each(|c| *c *= s);
        Ok(Self { nx, ny, coeffs })
    }

    /// Map with every coefficient equal to `value` (|value| ≤ 1).
    pub fn constant(nx: usize, ny: usize, value: Complex64) -> Result<Self> {
        Self::from_coeffs(nx, ny, vec![value; nx * ny])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    /// Φ(m, n) with 0-based indices.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.coeffs[m * self.ny + n]
    }
    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Phase quantizer with B bits, or no quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerConfig {
    Bits(u32),
    Unquantized,
}

impl QuantizerConfig {
    pub fn bits(b: u32) -> Result<Self> {
        if (1..=24).contains(&b) {
            Ok(Self::Bits(b))
        } else {
            domain(format!("quantizer bits {b} outside 1..=24"))
        }
    }

    /// The phase set 𝓑 = {2π(i − 2^{B−1})/2^B : i = 1..2^B} in ascending
    /// order; empty for the unquantized sentinel.
    pub fn phase_set(&self) -> Vec<f64> {
        match *self {
            Self::Unquantized => Vec::new(),
            Self::Bits(b) => {
                let levels = 1u64 << b;
                let half = 1i64 << (b - 1);
                (1..=levels as i64)
                    .map(|i| 2.0 * PI * (i - half) as f64 / levels as f64)
                    .collect()
            }
        }
    }

    /// Nearest element of 𝓑 to `phase` on the circle; ties go to the smaller
    /// element of 𝓑.
    pub fn quantize_phase(&self, phase: f64) -> f64 {
        let b = match *self {
            Self::Unquantized => return phase,
            Self::Bits(b) => b,
        };
        let levels = (1u64 << b) as f64;
        let step = 2.0 * PI / levels;
        // Level i (1..=2^B) sits at −π + i·step; position of `phase` in steps
        // from −π, reduced to [0, 2^B).
        let t = ((phase + PI) / step).rem_euclid(levels);
        let lo = t.floor();
        let hi = lo + 1.0;
        let level_value = |j: f64| {
            // j in 0..=2^B; j = 0 and j = 2^B are both the level at +π.
            let i = if j == 0.0 { levels } else { j };
            -PI + i * step
        };
        let (dlo, dhi) = (t - lo, hi - t);
        if dlo < dhi {
            level_value(lo)
        } else if dhi < dlo {
            level_value(hi.rem_euclid(levels))
        } else {
            level_value(lo).min(level_value(hi.rem_euclid(levels)))
        }
    }
}

/// Φ^Q(m,n) = |Φ(m,n)| e^{jφ_{m,n}} with φ the nearest quantization level.
pub fn quantize_phases(phi: &ReflectionMap, q: QuantizerConfig) -> ReflectionMap {
    if q == QuantizerConfig::Unquantized {
        return phi.clone();
    }
    let coeffs = phi
        .coeffs
        .iter()
        .map(|c| {
            let r = c.norm();
            if r == 0.0 {
                *c
            } else {
                Complex64::from_polar(r, q.quantize_phase(c.arg()))
            }
        })
        .collect();
    ReflectionMap { nx: phi.nx, ny: phi.ny, coeffs }
}
