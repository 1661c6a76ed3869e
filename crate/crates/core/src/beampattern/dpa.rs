//! Discrete planar arrays: element-sum beam pattern, NBS and SBF designs.
//!
//! Element (m, n) (0-based here) sits at x_m = m·d, y_n = n·d. The pattern is
//! g(ψ_out, ψ_in) = Σ Φ(m,n) e^{−j(x_m Δx + y_n Δy)} with Δ = ψ_out − ψ_in.
//! Coefficient formulas use the 1-based element counter, i.e. Φ for NBS is
//! e^{jd((m+1)k_opt + (n+1)l_opt)} in 0-based terms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::geometry::{AngularPair, SurfaceGeometry};
use super::kernels::{band_integral, dirichlet};
use super::map::ReflectionMap;
use crate::error::{check_shape, domain, HolorisError, Result};

/// Per-axis phasors e^{−j·i·d·Δ} for i = 0..n.
fn axis_phasors(n: usize, d: f64, delta: f64) -> Vec<Complex64> {
    (0..n).map(|i| Complex64::from_polar(1.0, -(i as f64) * d * delta)).collect()
}

/// Element-sum beam pattern of a DPA.
pub fn beam_pattern_dpa(
    phi: &ReflectionMap,
    geom: &SurfaceGeometry,
    psi_out: AngularPair,
    psi_in: AngularPair,
) -> Result<Complex64> {
    geom.require_dpa()?;
    check_shape("map rows vs N_x", geom.nx(), phi.nx())?;
    check_shape("map columns vs N_y", geom.ny(), phi.ny())?;
    let delta = psi_out - psi_in;
    let d = geom.spacing();
    let ex = axis_phasors(geom.nx(), d, delta.azi);
    let ey = axis_phasors(geom.ny(), d, delta.ele);
    let ny = geom.ny();
    let coeffs = phi.coeffs();
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, exm) in ex.iter().enumerate() {
        let row = &coeffs[m * ny..(m + 1) * ny];
        let inner: Complex64 = row.iter().zip(&ey).map(|(c, e)| c * e).sum();
        acc += exm * inner;
    }
    Ok(acc)
}

/// NBS coefficients Φ(m,n) = e^{j(d m k_opt + d n l_opt)} (1-based m, n).
pub fn nbs_coefficients(
    geom: &SurfaceGeometry,
    psi_opt: AngularPair,
    psi_in: AngularPair,
) -> Result<ReflectionMap> {
    nbs_separable(geom, psi_opt, psi_in)?.to_map()
}

/// The NBS map as an outer product of per-axis phase ramps.
pub fn nbs_separable(
    geom: &SurfaceGeometry,
    psi_opt: AngularPair,
    psi_in: AngularPair,
) -> Result<SeparableMap> {
    geom.require_dpa()?;
    let k = psi_opt - psi_in;
    let d = geom.spacing();
    let ramp = |n: usize, kk: f64| -> Vec<Complex64> {
        (1..=n).map(|i| Complex64::from_polar(1.0, d * i as f64 * kk)).collect()
    };
    Ok(SeparableMap { x: ramp(geom.nx(), k.azi), y: ramp(geom.ny(), k.ele) })
}

/// Dirichlet closed form of the NBS pattern,
/// N_xN_y · e^{j(d−A_x)Δx/2} e^{j(d−A_y)Δy/2} Ξ_{N_x}[d(k_opt−Δx)] Ξ_{N_y}[d(l_opt−Δy)].
///
/// The N_xN_y factor matches the element-sum peak. The value differs from
/// the element sum over [`nbs_coefficients`] only by the constant unit phasor
/// e^{jd((N_x+1)k_opt + (N_y+1)l_opt)/2}; see [`nbs_pattern`].
pub fn nbs_pattern_closed_form(
    geom: &SurfaceGeometry,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_opt: AngularPair,
) -> Result<Complex64> {
    geom.require_dpa()?;
    let delta = psi_out - psi_in;
    let k = psi_opt - psi_in;
    let d = geom.spacing();
    let (nx, ny) = (geom.nx(), geom.ny());
    let mag = (nx * ny) as f64
        * dirichlet(nx, d * (k.azi - delta.azi))
        * dirichlet(ny, d * (k.ele - delta.ele));
    let phase = (d - geom.ax()) * delta.azi / 2.0 + (d - geom.ay()) * delta.ele / 2.0;
    Ok(Complex64::from_polar(mag, phase))
}

/// Element-sum NBS pattern computed in O(1) through the closed form
/// (including the constant phasor), equal to
/// `beam_pattern_dpa(nbs_coefficients(..))`.
pub fn nbs_pattern(
    geom: &SurfaceGeometry,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_opt: AngularPair,
) -> Result<Complex64> {
    let k = psi_opt - psi_in;
    let d = geom.spacing();
    let c = d * ((geom.nx() as f64 + 1.0) * k.azi + (geom.ny() as f64 + 1.0) * k.ele) / 2.0;
    Ok(nbs_pattern_closed_form(geom, psi_out, psi_in, psi_opt)? * Complex64::from_polar(1.0, c))
}

/// Angular-domain weighting behind a DPA design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularWeighting {
    /// Dirac combs at (k_opt, l_opt) + 2π/d·ℤ.
    NbsCombs { k_opt: f64, l_opt: f64 },
    /// Periodic indicator of [k_min, k_max] × [l_min, l_max] with period
    /// anchors a, b (one period is [a, a + 2π/d)).
    SbfIndicator { k_min: f64, k_max: f64, l_min: f64, l_max: f64, a: f64, b: f64, period: f64 },
}

impl AngularWeighting {
    pub fn nbs(psi_opt: AngularPair, psi_in: AngularPair) -> Self {
        let k = psi_opt - psi_in;
        Self::NbsCombs { k_opt: k.azi, l_opt: k.ele }
    }

    /// SBF indicator; the band is centered in its period:
    /// a = k_min − (2π/d − (k_max − k_min))/2, likewise b.
    pub fn sbf(
        geom: &SurfaceGeometry,
        psi_min: AngularPair,
        psi_max: AngularPair,
        psi_in: AngularPair,
    ) -> Result<Self> {
        geom.require_dpa()?;
        if psi_min.azi > psi_max.azi || psi_min.ele > psi_max.ele {
            return domain("cut-off psi_min exceeds psi_max");
        }
        let period = 2.0 * PI / geom.spacing();
        let (k_min, k_max) = (psi_min.azi - psi_in.azi, psi_max.azi - psi_in.azi);
        let (l_min, l_max) = (psi_min.ele - psi_in.ele, psi_max.ele - psi_in.ele);
        if k_max - k_min >= period || l_max - l_min >= period {
            return domain("band is wider than one spatial period 2π/d");
        }
        let a = k_min - (period - (k_max - k_min)) / 2.0;
        let b = l_min - (period - (l_max - l_min)) / 2.0;
        Ok(Self::SbfIndicator { k_min, k_max, l_min, l_max, a, b, period })
    }

    /// ω(k, l) for the indicator variant (1 inside the band modulo the
    /// period, 0 outside); combs have no pointwise value and return 0.
    pub fn weight(&self, k: f64, l: f64) -> f64 {
        match *self {
            Self::NbsCombs { .. } => 0.0,
            Self::SbfIndicator { k_min, k_max, l_min, l_max, a, b, period } => {
                let kr = a + (k - a).rem_euclid(period);
                let lr = b + (l - b).rem_euclid(period);
                if (k_min..=k_max).contains(&kr) && (l_min..=l_max).contains(&lr) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// A map of the form Φ(m, n) = x[m]·y[n].
///
/// Both synthesis designs (NBS, SBF) produce such maps, and their patterns
/// factor into two 1-D sums, which is what makes full-scale surfaces cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableMap {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl SeparableMap {
    pub fn to_map(&self) -> Result<ReflectionMap> {
        let coeffs = self.x.iter().flat_map(|a| self.y.iter().map(move |b| a * b)).collect();
        ReflectionMap::from_coeffs(self.x.len(), self.y.len(), coeffs)
    }

    /// Per-axis factors of the element-sum pattern.
    pub fn pattern_factors(
        &self,
        geom: &SurfaceGeometry,
        psi_out: AngularPair,
        psi_in: AngularPair,
    ) -> (Complex64, Complex64) {
        let delta = psi_out - psi_in;
        let d = geom.spacing();
        let sum = |v: &[Complex64], dl: f64| -> Complex64 {
            v.iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::from_polar(1.0, -(i as f64) * d * dl))
                .sum()
        };
        (sum(&self.x, delta.azi), sum(&self.y, delta.ele))
    }

    /// Element-sum pattern evaluated as a product of 1-D sums.
    pub fn pattern(&self, geom: &SurfaceGeometry, psi_out: AngularPair, psi_in: AngularPair) -> Result<Complex64> {
        geom.require_dpa()?;
        check_shape("map rows vs N_x", geom.nx(), self.x.len())?;
        check_shape("map columns vs N_y", geom.ny(), self.y.len())?;
        let (a, b) = self.pattern_factors(geom, psi_out, psi_in);
        Ok(a * b)
    }
}

/// SBF coefficients as a normalized separable map:
/// x[m] ∝ ∫_{k_min}^{k_max} e^{j d m̄ k} dk with m̄ = m − (N_x+1)/2 (1-based m),
/// y[n] likewise, and max |x[m]y[n]| = 1.
pub fn sbf_separable(
    geom: &SurfaceGeometry,
    psi_min: AngularPair,
    psi_max: AngularPair,
    psi_in: AngularPair,
) -> Result<SeparableMap> {
    let w = AngularWeighting::sbf(geom, psi_min, psi_max, psi_in)?;
    let AngularWeighting::SbfIndicator { k_min, k_max, l_min, l_max, .. } = w else {
        unreachable!("sbf constructor returns the indicator variant")
    };
    if k_max == k_min || l_max == l_min {
        return Err(HolorisError::DegenerateBand(
            "zero-width SBF band gives an all-zero map".into(),
        ));
    }
    let d = geom.spacing();
    let axis = |n: usize, lo: f64, hi: f64| -> Vec<Complex64> {
        let center = (n as f64 + 1.0) / 2.0;
        let v: Vec<Complex64> =
            (1..=n).map(|i| band_integral(d * (i as f64 - center), lo, hi)).collect();
        let peak = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        v.into_iter().map(|c| c / peak).collect()
    };
    Ok(SeparableMap { x: axis(geom.nx(), k_min, k_max), y: axis(geom.ny(), l_min, l_max) })
}

/// SBF reflection coefficients, normalized to max |Φ| = 1.
pub fn sbf_coefficients(
    geom: &SurfaceGeometry,
    psi_min: AngularPair,
    psi_max: AngularPair,
    psi_in: AngularPair,
) -> Result<ReflectionMap> {
    sbf_separable(geom, psi_min, psi_max, psi_in)?.to_map()
}

/// SBF beam pattern by element summation over [`sbf_coefficients`].
///
/// Up to a constant this equals the Dirichlet-kernel integral
/// ∫∫_band Ξ_{N_x}[d(k−Δx)] Ξ_{N_y}[d(l−Δy)] dk dl times a linear phase.
pub fn sbf_pattern(
    geom: &SurfaceGeometry,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_min: AngularPair,
    psi_max: AngularPair,
) -> Result<Complex64> {
    let phi = sbf_coefficients(geom, psi_min, psi_max, psi_in)?;
    beam_pattern_dpa(&phi, geom, psi_out, psi_in)
}
