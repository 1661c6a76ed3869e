//! Delay-to-frequency transforms with the unitary DFT convention
//! h_k = (1/√N) Σ_d h_d e^{−j2πdk/N}, bins indexed k = 0..N.

use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::effective::EffectiveDelayChannel;
use crate::error::{domain, Result};
use crate::io::fmt_f64;

/// Unitary DFT of `x` at all bins.
pub fn unitary_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Unitary DFT of `x` at bin `k` by direct summation.
pub fn dft_bin(x: &[Complex64], k: usize) -> Complex64 {
    let n = x.len();
    let w = -2.0 * std::f64::consts::PI / n as f64;
    let s: Complex64 = x
        .iter()
        .enumerate()
        .map(|(d, v)| v * Complex64::from_polar(1.0, w * ((d * k) % n) as f64))
        .sum();
    s / (n as f64).sqrt()
}

/// Frequency-domain channel on subcarrier `k` (0-based, k < N_CP).
pub fn frequency_domain_channel(ch: &EffectiveDelayChannel, k: usize) -> Result<Complex64> {
    if k >= ch.taps.len() {
        return domain(format!("subcarrier {k} out of range 0..{}", ch.taps.len()));
    }
    Ok(dft_bin(&ch.taps, k))
}

/// All N_CP subcarriers of the effective channel.
pub fn frequency_response(ch: &EffectiveDelayChannel) -> Vec<Complex64> {
    unitary_dft(&ch.taps)
}

/// Zero-pads N_CP delay taps to `k_total` and applies the unitary
/// `k_total`-point DFT.
pub fn interpolate_to_k(taps: &[Complex64], k_total: usize) -> Result<Vec<Complex64>> {
    if k_total < taps.len() || k_total == 0 {
        return domain(format!("K = {k_total} is smaller than the {} taps", taps.len()));
    }
    let mut x = taps.to_vec();
    x.resize(k_total, Complex64::new(0.0, 0.0));
    Ok(unitary_dft(&x))
}

/// Channel-realization dump: `tap_index,re,im`.
pub fn write_taps_csv<W: Write>(w: &mut W, taps: &[Complex64]) -> io::Result<()> {
    writeln!(w, "tap_index,re,im")?;
    for (d, t) in taps.iter().enumerate() {
        writeln!(w, "{d},{},{}", fmt_f64(t.re), fmt_f64(t.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut r = substream(seed, &[]);
        (0..n).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect()
    }

    fn naive(x: &[Complex64], n_out: usize) -> Vec<Complex64> {
        (0..n_out)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(d, v)| {
                        let ang = -2.0 * std::f64::consts::PI * d as f64 * k as f64 / n_out as f64;
                        v * Complex64::from_polar(1.0, ang)
                    })
                    .sum::<Complex64>()
                    / (n_out as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut taps = vec![Complex64::new(0.0, 0.0); 16];
        taps[0] = Complex64::new(1.0, 0.0);
        let ch = EffectiveDelayChannel { taps, g_b: Complex64::new(1.0, 0.0) };
        for k in 0..16 {
            let v = frequency_domain_channel(&ch, k).unwrap();
            assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
        assert!(frequency_domain_channel(&ch, 16).is_err());
    }

    #[test]
    fn parseval_and_naive_oracle() {
        for (n, seed) in [(8, 1), (16, 2), (64, 3), (12, 4)] {
            let x = random(n, seed);
            let fast = unitary_dft(&x);
            let slow = naive(&x, n);
            for k in 0..n {
                assert!((fast[k] - slow[k]).norm() < 1e-12);
                assert!((dft_bin(&x, k) - slow[k]).norm() < 1e-12);
            }
            let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let e_f: f64 = fast.iter().map(|v| v.norm_sqr()).sum();
            assert!((e_t - e_f).abs() < 1e-12 * e_t);
        }
    }

    #[test]
    fn interpolation_matches_direct_k_bin_evaluation() {
        let taps = random(16, 9);
        let out = interpolate_to_k(&taps, 64).unwrap();
        let want = naive(&taps, 64);
        for k in 0..64 {
            assert!((out[k] - want[k]).norm() < 1e-12);
        }
        let z = interpolate_to_k(&vec![Complex64::new(0.0, 0.0); 16], 64).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
        let same = interpolate_to_k(&taps, 16).unwrap();
        let ch = EffectiveDelayChannel { taps: taps.clone(), g_b: Complex64::new(1.0, 0.0) };
        for k in 0..16 {
            assert!((same[k] - frequency_domain_channel(&ch, k).unwrap()).norm() < 1e-12);
        }
        assert!(interpolate_to_k(&taps, 8).is_err());
    }

    #[test]
    fn tap_dump_format() {
        let mut buf = Vec::new();
        write_taps_csv(&mut buf, &[Complex64::new(1.0, -0.5)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "tap_index,re,im\n0,1.0000000000000000e0,-5.0000000000000000e-1\n");
    }
}
