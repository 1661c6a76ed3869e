//! Array gain and effective reflection area.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::geometry::{physical_to_spatial, AngularPair, PhysicalAngle, SurfaceGeometry, SurfaceKind};
use crate::error::{domain, HolorisError, Result};
use crate::quadrature::CompositeRule;

/// G = 4π / ∬ |g(ψ_out)|² sinθ^ele dθ^ele dθ^azi over the outgoing hemisphere.
///
/// `pattern` must already be peak-normalized (|g| = 1 at its maximum). The
/// elevation integral uses a composite Gauss-Legendre rule with
/// `quad_points` nodes; the azimuth integral is periodic and uses the
/// trapezoid rule with `quad_points` nodes.
pub fn array_gain<F>(pattern: F, lambda: f64, quad_points: usize) -> Result<f64>
where
    F: Fn(AngularPair) -> Complex64,
{
    if quad_points < 8 {
        return domain("array gain needs at least 8 quadrature points");
    }
    let ele = CompositeRule::with_points(0.0, PI / 2.0, quad_points, 1);
    let n_azi = quad_points;
    let h_azi = 2.0 * PI / n_azi as f64;
    let mut total = 0.0;
    for (&te, &we) in ele.nodes.iter().zip(&ele.weights) {
        let mut ring = 0.0;
        for i in 0..n_azi {
            let ta = i as f64 * h_azi;
            let psi = physical_to_spatial(PhysicalAngle::new(ta, te)?, lambda);
            let g = pattern(psi);
            let p = g.norm_sqr();
            if !p.is_finite() {
                return Err(HolorisError::NonFinite("array gain pattern"));
            }
            ring += p;
        }
        total += we * te.sin() * ring * h_azi;
    }
    if total <= 0.0 {
        return domain("pattern vanishes over the hemisphere");
    }
    Ok(4.0 * PI / total)
}

/// Effective reflection area: A_xA_y for a CMS, (A_xA_y/d²)·S_ele for a DPA.
pub fn effective_reflection_area(geom: &SurfaceGeometry, s_ele: f64) -> Result<f64> {
    let aperture = geom.ax() * geom.ay();
    match geom.kind() {
        SurfaceKind::Cms => Ok(aperture),
        SurfaceKind::Dpa => {
            let d2 = geom.spacing() * geom.spacing();
            if !(s_ele > 0.0) {
                return domain("element area must be positive");
            }
            if s_ele > d2 * (1.0 + 1e-12) {
                return domain(format!("element area {s_ele} exceeds the unit cell d² = {d2}"));
            }
            Ok(aperture / d2 * s_ele)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beampattern::dpa::nbs_pattern;

    #[test]
    fn isotropic_hemisphere_has_gain_two() {
        let g = array_gain(|_| Complex64::new(1.0, 0.0), 0.002, 64).unwrap();
        assert!((g - 2.0).abs() < 1e-10);
    }

    #[test]
    fn cosine_pattern_gain() {
        // |g|² = cos θ: ∬ cosθ sinθ = π, G = 4.
        let lambda = 0.002;
        let k = 2.0 * PI / lambda;
        let g = array_gain(
            |psi| {
                let s2 = (psi.azi * psi.azi + psi.ele * psi.ele) / (k * k);
                Complex64::new((1.0 - s2).max(0.0).sqrt().sqrt(), 0.0)
            },
            lambda,
            128,
        )
        .unwrap();
        assert!((g - 4.0).abs() < 1e-6, "{g}");
    }

    fn broadside_gain(n: usize, q: usize) -> f64 {
        let lambda = 0.002;
        let geom = SurfaceGeometry::half_wavelength_upa(n, n, lambda).unwrap();
        let peak = (n * n) as f64;
        array_gain(
            |psi| nbs_pattern(&geom, psi, AngularPair::ZERO, AngularPair::ZERO).unwrap() / peak,
            lambda,
            q,
        )
        .unwrap()
    }

    #[test]
    fn gain_grows_with_array_size_and_converges() {
        let g: Vec<f64> = [8, 16, 32].iter().map(|&n| broadside_gain(n, 512)).collect();
        assert!(g[0] < g[1] && g[1] < g[2], "{g:?}");
        // Aperture directivity estimate 4πA²/λ² = πN² for half-wavelength spacing.
        for (&n, &gi) in [8usize, 16, 32].iter().zip(&g) {
            let est = PI * (n * n) as f64;
            assert!((gi / est - 1.0).abs() < 0.25, "n={n} G={gi} est={est}");
        }
        let g2 = broadside_gain(32, 1024);
        assert!((g2 / g[2] - 1.0).abs() < 0.005);
    }

    #[test]
    fn effective_area_examples() {
        let cms = SurfaceGeometry::cms(0.2, 0.2, 0.002).unwrap();
        assert!((effective_reflection_area(&cms, 1.0).unwrap() - 0.04).abs() < 1e-15);
        let dpa = SurfaceGeometry::dpa(200, 200, 0.001, 0.002).unwrap();
        let s = effective_reflection_area(&dpa, 200e-6 * 200e-6).unwrap();
        assert!((s - 1.6e-3).abs() < 1e-15);
        let full = effective_reflection_area(&dpa, 1e-6).unwrap();
        assert!((full - 0.04).abs() < 1e-14);
        assert!(effective_reflection_area(&dpa, 1.1e-6).is_err());
    }
}
