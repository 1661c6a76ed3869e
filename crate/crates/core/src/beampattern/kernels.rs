//! Dirichlet kernel, sinc and the band integral shared by the SBF designs.
//! Removable singularities are evaluated through their limits.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Ξ_N(x) = sin(Nx/2) / (N sin(x/2)), with Ξ_N(2kπ) = (−1)^{k(N−1)}.
pub fn dirichlet(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "Dirichlet kernel order must be positive");
    if n == 1 {
        return 1.0;
    }
    // Reduce to x = 2πk + r with |r| ≤ π; the kernel picks up (−1)^{k(N−1)}.
    let k = (x / (2.0 * PI)).round();
    let r = x - 2.0 * PI * k;
    let odd_k = (k.abs() % 2.0) == 1.0;
    let sign = if odd_k && (n - 1) % 2 == 1 { -1.0 } else { 1.0 };
    let nf = n as f64;
    let core = if nf * r.abs() < 1e-4 {
        // Taylor expansion about r = 0.
        1.0 - (nf * nf - 1.0) * r * r / 24.0
    } else {
        (nf * r / 2.0).sin() / (nf * (r / 2.0).sin())
    };
    sign * core
}

/// sinc(x) = sin(x)/x with sinc(0) = 1 (unnormalized convention).
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// ∫_{lo}^{hi} e^{j t k} dk = e^{j t (lo+hi)/2} · (hi − lo) · sinc(t (hi − lo)/2).
///
/// This is the per-axis factor of the SBF coefficients in both the discrete
/// (t = d·m̄) and the continuous (t = x̄) designs; the midpoint form has no
/// singularity at t = 0.
pub fn band_integral(t: f64, lo: f64, hi: f64) -> Complex64 {
    let w = hi - lo;
    Complex64::from_polar(w * sinc(t * w / 2.0), t * (lo + hi) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_anchor_values() {
        for n in 1..10 {
            assert_eq!(dirichlet(n, 0.0), 1.0);
        }
        assert!((dirichlet(4, 2.0 * PI) + 1.0).abs() < 1e-15);
        assert!((dirichlet(3, PI) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_is_continuous_at_multiples_of_two_pi() {
        for n in [2usize, 3, 4, 7, 64] {
            for k in -3i32..=3 {
                let x0 = 2.0 * PI * k as f64;
                let want = if (k * (n as i32 - 1)).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                for eps in [1e-8, -1e-8] {
                    let naive = {
                        let x = x0 + eps;
                        (n as f64 * x / 2.0).sin() / (n as f64 * (x / 2.0).sin())
                    };
                    assert!((dirichlet(n, x0 + eps) - want).abs() < 1e-6);
                    assert!((naive - want).abs() < 1e-6, "oracle sanity n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn dirichlet_matches_definition_away_from_singularities() {
        for n in [2usize, 5, 16] {
            for i in 1..200 {
                let x = -9.0 + i as f64 * 0.0913;
                let direct = (n as f64 * x / 2.0).sin() / (n as f64 * (x / 2.0).sin());
                assert!((dirichlet(n, x) - direct).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn dirichlet_is_the_normalized_geometric_sum() {
        // (1/N) Σ_{m=0}^{N-1} e^{jmx} = e^{j(N-1)x/2} Ξ_N(x)
        for n in [3usize, 8] {
            for x in [0.3, 1.7, -2.2, 2.0 * PI, 4.0 * PI + 1e-9] {
                let s: Complex64 =
                    (0..n).map(|m| Complex64::from_polar(1.0, m as f64 * x)).sum::<Complex64>() / n as f64;
                let f = Complex64::from_polar(dirichlet(n, x), (n as f64 - 1.0) * x / 2.0);
                assert!((s - f).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sinc_anchor_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(PI / 2.0) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(1e-6) - (1e-6f64).sin() / 1e-6).abs() < 1e-16);
    }

    #[test]
    fn band_integral_matches_antiderivative() {
        for (t, lo, hi) in [(0.7, -1.0, 2.5), (-3.1, 0.2, 0.9), (12.0, -0.4, 0.4)] {
            let j = Complex64::i();
            let want = ((j * t * hi).exp() - (j * t * lo).exp()) / (j * t);
            assert!((band_integral(t, lo, hi) - want).norm() < 1e-13);
        }
        assert_eq!(band_integral(0.0, -1.0, 2.0), Complex64::new(3.0, 0.0));
    }
}
