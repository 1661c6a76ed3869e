use holoris_core::beampattern::{
    beam_pattern_dpa, nbs_pattern, quantize_phases, sbf_coefficients, sbf_separable, AngularPair, QuantizerConfig,
    SurfaceGeometry,
};
use num_complex::Complex64;
use proptest::prelude::*;

const LAMBDA: f64 = 2e-3;

fn dir(a: f64, e: f64) -> AngularPair {
    AngularPair::from_normalized(LAMBDA, a, e)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nbs_peak_equals_element_count_and_bounds_the_pattern(
        nx in 2usize..20, ny in 2usize..20, spacing in 0.1f64..=0.5,
        oa in -0.8f64..0.8, oe in -0.8f64..0.8, a in -1.0f64..1.0, e in -1.0f64..1.0,
    ) {
        let g = SurfaceGeometry::dpa(nx, ny, spacing * LAMBDA, LAMBDA).unwrap();
        let opt = dir(oa, oe);
        let peak = nbs_pattern(&g, opt, AngularPair::ZERO, opt).unwrap().norm();
        let n = (nx * ny) as f64;
        prop_assert!((peak - n).abs() < 1e-9 * n);
        prop_assert!(nbs_pattern(&g, dir(a, e), AngularPair::ZERO, opt).unwrap().norm() <= n * (1.0 + 1e-12));
    }

    #[test]
    fn separable_sbf_matches_the_full_element_sum(
        nx in 2usize..16, ny in 2usize..16, lo in -0.6f64..0.0, w in 0.1f64..0.6,
        a in -1.0f64..1.0, e in -1.0f64..1.0,
    ) {
        let g = SurfaceGeometry::dpa(nx, ny, 0.5 * LAMBDA, LAMBDA).unwrap();
        let (min, max) = (dir(lo, lo), dir(lo + w, lo + w));
        let sep = sbf_separable(&g, min, max, AngularPair::ZERO).unwrap();
        let full = sbf_coefficients(&g, min, max, AngularPair::ZERO).unwrap();
        let out = dir(a, e);
        let x = sep.pattern(&g, out, AngularPair::ZERO).unwrap();
        let y = beam_pattern_dpa(&full, &g, out, AngularPair::ZERO).unwrap();
        prop_assert!((x - y).norm() < 1e-9 * (nx * ny) as f64);
    }

    #[test]
    fn quantization_keeps_modulus_and_snaps_phase(bits in 1u32..6, nx in 2usize..10, oa in -0.8f64..0.8) {
        let g = SurfaceGeometry::dpa(nx, nx, 0.25 * LAMBDA, LAMBDA).unwrap();
        let map = sbf_coefficients(&g, dir(oa - 0.1, -0.1), dir(oa + 0.1, 0.1), AngularPair::ZERO).unwrap();
        let qc = QuantizerConfig::bits(bits).unwrap();
        let levels = qc.phase_set();
        let q = quantize_phases(&map, qc);
        prop_assert!(q.max_modulus() <= 1.0 + 1e-12);
        for (a, b) in map.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-12);
            if b.norm() > 1e-9 {
                let on_level = levels.iter().any(|l| (Complex64::from_polar(1.0, *l) - b / b.norm()).norm() < 1e-9);
                prop_assert!(on_level);
            }
        }
    }
}
