//! Continuous metasurface (CMS): the d → 0 limit of a DPA with fixed aperture.
//!
//! Patterns here use the same reference as the DPA patterns divided by
//! N_xN_y: a unit-modulus NBS map peaks at 1, and SBF maps are normalized to
//! max |Φ̃| = 1 before integration. With that reference
//! `|beam_pattern_dpa(..)| / (N_xN_y)` converges to the CMS value as d shrinks.

use num_complex::Complex64;

use super::dpa::{nbs_pattern, sbf_separable};
use super::grid::normalized_axis;
use super::geometry::{AngularPair, SurfaceGeometry};
use super::kernels::{band_integral, sinc};
use crate::error::{domain, HolorisError, Result};
use crate::quadrature::CompositeRule;

/// Minimum quadrature nodes per axis for [`cms_sbf_pattern`].
pub const MIN_QUAD_POINTS: usize = 64;

/// NBS pattern of a CMS:
/// e^{−jA_xΔx/2} e^{−jA_yΔy/2} sinc[(A_x/2)(k_opt−Δx)] sinc[(A_y/2)(l_opt−Δy)].
pub fn cms_nbs_pattern(
    ax: f64,
    ay: f64,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_opt: AngularPair,
) -> Result<Complex64> {
    check_aperture(ax, ay)?;
    let delta = psi_out - psi_in;
    let k = psi_opt - psi_in;
    let mag = sinc(ax / 2.0 * (k.azi - delta.azi)) * sinc(ay / 2.0 * (k.ele - delta.ele));
    Ok(Complex64::from_polar(mag, -(ax * delta.azi + ay * delta.ele) / 2.0))
}

/// Largest |  |g_DPA|/(N_xN_y) − |g_CMS|  | of NBS patterns toward `psi_opt`
/// over an `n × n` grid of normalized directions, for a square aperture of
/// side `aperture` sampled at spacing `d` (normal incidence).
pub fn nbs_cms_deviation(aperture: f64, d: f64, lambda: f64, psi_opt: AngularPair, n: usize) -> Result<f64> {
    let g = SurfaceGeometry::dpa_from_aperture(aperture, aperture, d, lambda)?;
    let peak = g.elements() as f64;
    let axis = normalized_axis(n);
    let mut worst = 0.0f64;
    for &a in &axis {
        for &e in &axis {
            let psi = AngularPair::from_normalized(lambda, a, e);
            let dpa = nbs_pattern(&g, psi, AngularPair::ZERO, psi_opt)?.norm() / peak;
            let cms = cms_nbs_pattern(aperture, aperture, psi, AngularPair::ZERO, psi_opt)?.norm();
            worst = worst.max((dpa - cms).abs());
        }
    }
    Ok(worst)
}

/// SBF coefficient of a CMS at surface point (x, y), unnormalized:
/// ∫_{k_min}^{k_max} e^{j x̄ k} dk · ∫_{l_min}^{l_max} e^{j ȳ l} dl,
/// x̄ = x − A_x/2, ȳ = y − A_y/2, k = ψ^azi − ψ_in^azi, l = ψ^ele − ψ_in^ele.
///
/// The centre value is (ψ_max^azi − ψ_min^azi)(ψ_max^ele − ψ_min^ele).
#[allow(clippy::too_many_arguments)]
pub fn cms_sbf_coefficients(
    ax: f64,
    ay: f64,
    x: f64,
    y: f64,
    psi_min: AngularPair,
    psi_max: AngularPair,
    psi_in: AngularPair,
) -> Result<Complex64> {
    check_aperture(ax, ay)?;
    if !(0.0..=ax).contains(&x) || !(0.0..=ay).contains(&y) {
        return domain(format!("point ({x}, {y}) outside the aperture"));
    }
    check_band(psi_min, psi_max)?;
    let (k_min, k_max) = (psi_min.azi - psi_in.azi, psi_max.azi - psi_in.azi);
    let (l_min, l_max) = (psi_min.ele - psi_in.ele, psi_max.ele - psi_in.ele);
    Ok(band_integral(x - ax / 2.0, k_min, k_max) * band_integral(y - ay / 2.0, l_min, l_max))
}

/// SBF pattern of a CMS by quadrature of the sinc-kernel integral,
///
/// e^{−jA_xΔx/2} e^{−jA_yΔy/2} (1/(w_x w_y)) ∫∫_band sinc[(A_x/2)(k−Δx)] sinc[(A_y/2)(l−Δy)] dk dl,
///
/// where w_x, w_y are the band widths. The kernel is separable, so the 2-D
/// tensor-product Gauss-Legendre rule is evaluated as a product of two 1-D
/// rules. Each axis uses `quad_points` nodes, split into enough panels that
/// no panel spans more than π of kernel argument.
#[allow(clippy::too_many_arguments)]
pub fn cms_sbf_pattern(
    ax: f64,
    ay: f64,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_min: AngularPair,
    psi_max: AngularPair,
    quad_points: usize,
) -> Result<Complex64> {
    let (fx, fy) = cms_sbf_pattern_factors(ax, ay, psi_out, psi_in, psi_min, psi_max, quad_points)?;
    Ok(fx * fy)
}

/// Azimuth and elevation factors of [`cms_sbf_pattern`].
#[allow(clippy::too_many_arguments)]
pub fn cms_sbf_pattern_factors(
    ax: f64,
    ay: f64,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_min: AngularPair,
    psi_max: AngularPair,
    quad_points: usize,
) -> Result<(Complex64, Complex64)> {
    check_aperture(ax, ay)?;
    check_band(psi_min, psi_max)?;
    if quad_points < MIN_QUAD_POINTS {
        return domain(format!("quad_points {quad_points} below {MIN_QUAD_POINTS}"));
    }
    let delta = psi_out - psi_in;
    let fx = sinc_band_average(ax, psi_min.azi - psi_in.azi, psi_max.azi - psi_in.azi, delta.azi, quad_points)?;
    let fy = sinc_band_average(ay, psi_min.ele - psi_in.ele, psi_max.ele - psi_in.ele, delta.ele, quad_points)?;
    Ok((
        Complex64::from_polar(fx, -ax * delta.azi / 2.0),
        Complex64::from_polar(fy, -ay * delta.ele / 2.0),
    ))
}

/// (1/w) ∫_{lo}^{hi} sinc((a/2)(k − δ)) dk with w = hi − lo.
fn sinc_band_average(a: f64, lo: f64, hi: f64, delta: f64, points: usize) -> Result<f64> {
    let w = hi - lo;
    if w <= 0.0 {
        return Err(HolorisError::DegenerateBand("zero-width CMS SBF band".into()));
    }
    let span = a * w / 2.0;
    let min_panels = (span / std::f64::consts::PI).ceil() as usize;
    let rule = CompositeRule::with_points(lo, hi, points, min_panels);
    Ok(rule.integrate(|k| sinc(a / 2.0 * (k - delta))) / w)
}

/// The documented alternative to [`cms_sbf_pattern`]: the SBF element sum of
/// a fine DPA surrogate (spacing λ/32 by default) over the same aperture,
/// divided by N_xN_y. The aperture must be a multiple of the spacing.
#[allow(clippy::too_many_arguments)]
pub fn cms_sbf_pattern_surrogate(
    ax: f64,
    ay: f64,
    lambda: f64,
    spacing: f64,
    psi_out: AngularPair,
    psi_in: AngularPair,
    psi_min: AngularPair,
    psi_max: AngularPair,
) -> Result<Complex64> {
    let geom = SurfaceGeometry::dpa_from_aperture(ax, ay, spacing, lambda)?;
    let map = sbf_separable(&geom, psi_min, psi_max, psi_in)?;
    Ok(map.pattern(&geom, psi_out, psi_in)? / geom.elements() as f64)
}

fn check_aperture(ax: f64, ay: f64) -> Result<()> {
    if ax > 0.0 && ay > 0.0 && ax.is_finite() && ay.is_finite() {
        Ok(())
    } else {
        domain("aperture must be positive")
    }
}

fn check_band(psi_min: AngularPair, psi_max: AngularPair) -> Result<()> {
    if psi_min.azi > psi_max.azi || psi_min.ele > psi_max.ele {
        domain("cut-off psi_min exceeds psi_max")
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beampattern::dpa::sbf_separable;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.002;

    fn psi(a: f64, e: f64) -> AngularPair {
        AngularPair::from_normalized(LAMBDA, a, e)
    }

    fn nbs_deviation(aperture: f64, d: f64, opt: AngularPair, n: usize) -> f64 {
        nbs_cms_deviation(aperture, d, LAMBDA, opt, n).unwrap()
    }

    #[test]
    fn nbs_peak_and_first_null() {
        let opt = psi(0.3, -0.4);
        let a = 16.0 * LAMBDA;
        let v = cms_nbs_pattern(a, a, opt, AngularPair::ZERO, opt).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        let null = opt - AngularPair::new(2.0 * PI / a, 0.0);
        assert!(cms_nbs_pattern(a, a, null, AngularPair::ZERO, opt).unwrap().norm() < 1e-12);
    }

    #[test]
    fn fine_dpa_matches_cms_nbs_within_one_percent() {
        let dev = nbs_deviation(16.0 * LAMBDA, LAMBDA / 16.0, psi(0.6, -0.2), 101);
        assert!(dev < 0.01, "{dev}");
    }

    #[test]
    fn dpa_to_cms_deviation_decreases_with_spacing() {
        let dev: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|f| nbs_deviation(16.0 * LAMBDA, LAMBDA / f, psi(0.6, -0.2), 101))
            .collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
        assert!(dev[2] <= 0.05);
    }

    #[test]
    fn sbf_coefficient_centre_and_degenerate_band() {
        let a = 8.0 * LAMBDA;
        let (lo, hi) = (psi(-0.2, 0.2), psi(0.2, 0.6));
        let c = cms_sbf_coefficients(a, a, a / 2.0, a / 2.0, lo, hi, AngularPair::ZERO).unwrap();
        let want = (hi.azi - lo.azi) * (hi.ele - lo.ele);
        assert!((c.norm() - want).abs() < 1e-9 * want);
        let z = cms_sbf_coefficients(a, a, 0.3 * a, 0.9 * a, lo, AngularPair::new(lo.azi, hi.ele), AngularPair::ZERO)
            .unwrap();
        assert_eq!(z.norm(), 0.0);
        assert!(cms_sbf_coefficients(a, a, 1.01 * a, 0.0, lo, hi, AngularPair::ZERO).is_err());
    }

    #[test]
    fn sbf_coefficients_are_the_limit_of_the_dpa_design() {
        // Element m represents the CMS point at the centre of its cell,
        // x = (m − 1/2)d, i.e. x̄ = d·m̄.
        let a = 8.0 * LAMBDA;
        let (lo, hi, inc) = (psi(-0.35, 0.1), psi(0.05, 0.45), psi(0.1, -0.05));
        let d = LAMBDA / 64.0;
        let g = SurfaceGeometry::dpa_from_aperture(a, a, d, LAMBDA).unwrap();
        let sep = sbf_separable(&g, lo, hi, inc).unwrap();
        // Undo the DPA normalization with the centre-cell CMS value.
        let cms_peak = (0..g.nx())
            .map(|m| cms_sbf_coefficients(a, a, (m as f64 + 0.5) * d, a / 2.0, lo, hi, inc).unwrap().norm())
            .fold(0.0, f64::max)
            * (0..g.ny())
                .map(|n| cms_sbf_coefficients(a, a, a / 2.0, (n as f64 + 0.5) * d, lo, hi, inc).unwrap().norm())
                .fold(0.0, f64::max)
            / ((hi.azi - lo.azi) * (hi.ele - lo.ele));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (m, n) = (rng.random_range(0..g.nx()), rng.random_range(0..g.ny()));
            let (x, y) = ((m as f64 + 0.5) * d, (n as f64 + 0.5) * d);
            let cms = cms_sbf_coefficients(a, a, x, y, lo, hi, inc).unwrap() / cms_peak;
            let dpa = sep.x[m] * sep.y[n];
            assert!((cms - dpa).norm() < 1e-3 * cms.norm().max(1e-3), "m={m} n={n}");
        }
    }

    #[test]
    fn sampling_at_dm_converges_to_cms_coefficients() {
        // Sampling the DPA design at x = d·m (1-based m) leaves a half-cell
        // offset, so agreement improves linearly as d shrinks.
        let a = 8.0 * LAMBDA;
        let (lo, hi) = (psi(-0.2, 0.2), psi(0.2, 0.6));
        let points = [(0.21, 0.37), (0.5, 0.5), (0.83, 0.12), (0.05, 0.95)];
        let err = |f: f64| -> f64 {
            let d = LAMBDA / f;
            let g = SurfaceGeometry::dpa_from_aperture(a, a, d, LAMBDA).unwrap();
            let sep = sbf_separable(&g, lo, hi, AngularPair::ZERO).unwrap();
            let scale = (hi.azi - lo.azi) * (hi.ele - lo.ele);
            points
                .iter()
                .map(|&(fx, fy)| {
                    let m = ((fx * a) / d).round().max(1.0) as usize;
                    let n = ((fy * a) / d).round().max(1.0) as usize;
                    let cms = cms_sbf_coefficients(a, a, m as f64 * d, n as f64 * d, lo, hi, AngularPair::ZERO)
                        .unwrap()
                        .norm()
                        / scale;
                    let dpa = (sep.x[m - 1] * sep.y[n - 1]).norm();
                    (cms - dpa).abs()
                })
                .fold(0.0, f64::max)
        };
        let e: Vec<f64> = [8.0, 16.0, 32.0, 64.0].iter().map(|&f| err(f)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        assert!(e[3] < 1e-2, "{e:?}");
    }

    #[test]
    fn quadrature_pattern_matches_fine_dpa_surrogate() {
        let a = 32.0 * LAMBDA;
        let (lo, hi) = (psi(-0.2, 0.2), psi(0.2, 0.6));
        let axis = normalized_axis(61);
        let mut worst = 0.0f64;
        for &x in &axis {
            for &y in &axis {
                let q = cms_sbf_pattern(a, a, psi(x, y), AngularPair::ZERO, lo, hi, 64).unwrap();
                let s = cms_sbf_pattern_surrogate(a, a, LAMBDA, LAMBDA / 32.0, psi(x, y), AngularPair::ZERO, lo, hi)
                    .unwrap();
                worst = worst.max((q.norm() - s.norm()).abs());
            }
        }
        let pass = cms_sbf_pattern(a, a, psi(0.0, 0.4), AngularPair::ZERO, lo, hi, 64).unwrap().norm();
        assert!(worst < 0.02 * pass, "worst {worst} pass {pass}");
    }

    #[test]
    fn symmetric_band_gives_symmetric_pattern() {
        let a = 16.0 * LAMBDA;
        let (lo, hi) = (psi(-0.3, -0.1), psi(0.3, 0.1));
        for x in [0.05, 0.2, 0.31, 0.77] {
            let p = cms_sbf_pattern(a, a, psi(x, 0.03), AngularPair::ZERO, lo, hi, 64).unwrap().norm();
            let m = cms_sbf_pattern(a, a, psi(-x, 0.03), AngularPair::ZERO, lo, hi, 64).unwrap().norm();
            assert!((p - m).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_is_converged_at_64_points() {
        let a = 100.0 * LAMBDA;
        let (lo, hi) = (psi(-1.0, -1.0), psi(-0.81, -0.81));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let o = psi(rng.random_range(-1.0..-0.6), rng.random_range(-1.0..-0.6));
            let p64 = cms_sbf_pattern(a, a, o, AngularPair::ZERO, lo, hi, 64).unwrap();
            let p128 = cms_sbf_pattern(a, a, o, AngularPair::ZERO, lo, hi, 128).unwrap();
            assert!((p64 - p128).norm() <= 1e-3 * p128.norm().max(1e-12));
        }
        assert!(cms_sbf_pattern(a, a, lo, AngularPair::ZERO, lo, hi, 32).is_err());
    }

    #[test]
    fn quadrature_matches_sine_integral_form() {
        // (1/w)∫ sinc(a(k−δ)/2) dk = (2/(a w)) [Si(a(hi−δ)/2) − Si(a(lo−δ)/2)],
        // with Si evaluated by its power series.
        fn si(x: f64) -> f64 {
            let mut term = x;
            let mut sum = x;
            let mut n = 0;
            while term.abs() > 1e-17 * sum.abs().max(1e-300) && n < 200 {
                let k = 2 * n + 1;
                term *= -x * x * k as f64 / ((k + 1) as f64 * (k + 2) as f64 * (k + 2) as f64);
                sum += term;
                n += 1;
            }
            sum
        }
        let a = 4.0 * LAMBDA;
        let (lo, hi) = (psi(-0.2, 0.2), psi(0.2, 0.6));
        let o = psi(0.13, 0.31);
        let (fx, _) = cms_sbf_pattern_factors(a, a, o, AngularPair::ZERO, lo, hi, 64).unwrap();
        let w = hi.azi - lo.azi;
        let want = 2.0 / (a * w) * (si(a * (hi.azi - o.azi) / 2.0) - si(a * (lo.azi - o.azi) / 2.0));
        assert!((fx.norm() - want.abs()).abs() < 1e-10, "{} vs {want}", fx.norm());
    }
}
