//! Effective (beamformed) delay-domain channel.
//!
//! Steering vectors follow a(ψ) = [e^{j(x_m ψ^azi + y_n ψ^ele)}], so with the
//! BS precoder f = vec(Φ^B), the RIS map Φ and the UE combiner w = vec(Φ^U):
//! g^B(ψ) = a_B^H(ψ) f equals the element sum of Φ^B at (ψ, 0),
//! g(μ, ψ^R) = a_R^H(μ) diag(φ) a_R(ψ^R) equals the RIS element sum, and
//! g^U(ν) = w^H a_U(ν) is the complex conjugate of the element sum of Φ^U.

use num_complex::Complex64;

use super::config::SystemConfig;
use super::fading::RicianChannelParams;
use super::pulse::PulseShape;
use crate::beampattern::{beam_pattern_dpa, AngularPair, BeamPattern, ReflectionMap, SurfaceGeometry};
use crate::error::{check_shape, HolorisError, Result};

/// Receive-side view of a transmit beam pattern: g^U(ν) = conj(P(ν, 0)).
/// The incidence argument of `response` is ignored.
#[derive(Debug, Clone)]
pub struct ReceiveCombiner<P>(pub P);

impl<P: BeamPattern> BeamPattern for ReceiveCombiner<P> {
    fn response(&self, nu: AngularPair, _psi_in: AngularPair) -> Complex64 {
        self.0.response(nu, AngularPair::ZERO).conj()
    }
}

/// g^B(ψ^B) = a_B^H(ψ^B)·vec(Φ^B).
pub fn bs_gain(geom: &SurfaceGeometry, map: &ReflectionMap, psi_b: AngularPair) -> Result<Complex64> {
    beam_pattern_dpa(map, geom, psi_b, AngularPair::ZERO)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDelayChannel {
    /// h(d·T_s) for d = 0..N_CP.
    pub taps: Vec<Complex64>,
    /// BS beam-pattern factor G^B.
    pub g_b: Complex64,
}

/// taps[d] = α G^B Σ_paths gain·g(μ, ψ^R)·g^U(ν)·p(d T_s − τ).
///
/// `ris` is evaluated as `ris.response(μ, ψ^R)` and `ue` as
/// `ue.response(ν, 0)`; pass a [`ReceiveCombiner`] for a UE beamformer.
pub fn effective_delay_channel(
    params: &RicianChannelParams,
    ris: &dyn BeamPattern,
    ue: &dyn BeamPattern,
    bs_gain: Complex64,
    shape: &PulseShape,
    sys: &SystemConfig,
) -> Result<EffectiveDelayChannel> {
    check_shape("NLoS angle lists", params.l, params.mu_nlos.len())?;
    check_shape("NLoS delays", params.l, params.tau_nlos.len())?;
    let mut taps = vec![Complex64::new(0.0, 0.0); sys.n_cp];
    let front = params.alpha * bs_gain;
    for path in params.paths() {
        let c = front * path.gain * ris.response(path.mu, params.psi_r) * ue.response(path.nu, AngularPair::ZERO);
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (d, tap) in taps.iter_mut().enumerate() {
            *tap += c * shape.eval(d as f64 * sys.t_s - path.tau);
        }
    }
    if taps.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
        return Err(HolorisError::NonFinite("effective delay channel"));
    }
    Ok(EffectiveDelayChannel { taps, g_b: bs_gain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beampattern::{nbs_coefficients, MapBeam};
    use crate::channel::fading::{LinkDirection, RicianChannelParams};
    use crate::rng::substream;
    use rand::Rng;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(l: usize, k_f: f64, tau_los: f64) -> RicianChannelParams {
        RicianChannelParams {
            direction: LinkDirection::Downlink,
            l,
            k_f,
            mu_los: AngularPair::new(100.0, -300.0),
            nu_los: AngularPair::new(-50.0, 20.0),
            mu_nlos: vec![AngularPair::new(700.0, 40.0); l],
            nu_nlos: vec![AngularPair::new(10.0, -900.0); l],
            tau_los,
            tau_nlos: vec![tau_los + 1.3e-9; l],
            alpha: cz(0.3, -0.2),
            beta_los: cz(-0.1, 0.4),
            beta_nlos: vec![cz(0.5, 0.5); l],
            psi_b: AngularPair::ZERO,
            psi_r: AngularPair::new(30.0, -10.0),
            theta_alpha: 0.0,
            theta_beta: 0.0,
        }
    }

    #[test]
    fn single_pulse_peaks_at_its_delay() {
        let sys = SystemConfig::desk_scale();
        let shape = PulseShape::new(0.8, sys.t_s).unwrap();
        let p = params(0, f64::INFINITY, 3.0 * sys.t_s);
        let one = |_: AngularPair, _: AngularPair| cz(1.0, 0.0);
        let ch = effective_delay_channel(&p, &one, &one, cz(1.0, 0.0), &shape, &sys).unwrap();
        let best = (0..sys.n_cp).max_by(|&a, &b| ch.taps[a].norm().total_cmp(&ch.taps[b].norm())).unwrap();
        assert_eq!(best, 3);
        for (d, t) in ch.taps.iter().enumerate() {
            if d != 3 {
                assert!(t.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_ris_map_gives_zero_taps() {
        let sys = SystemConfig::desk_scale();
        let shape = PulseShape::new(0.8, sys.t_s).unwrap();
        let g = SurfaceGeometry::half_wavelength_upa(4, 4, sys.lambda).unwrap();
        let ris = MapBeam::new(g, ReflectionMap::constant(4, 4, cz(0.0, 0.0)).unwrap()).unwrap();
        let one = |_: AngularPair, _: AngularPair| cz(1.0, 0.0);
        let ch = effective_delay_channel(&params(1, 10.0, 2e-9), &ris, &one, cz(1.0, 0.0), &shape, &sys).unwrap();
        assert!(ch.taps.iter().all(|t| t.norm() == 0.0));
    }

    /// a(ψ) for a UPA with row-major element order (m slow, n fast).
    fn steering(g: &SurfaceGeometry, psi: AngularPair) -> Vec<Complex64> {
        let d = g.spacing();
        let mut v = Vec::with_capacity(g.elements());
        for m in 0..g.nx() {
            for n in 0..g.ny() {
                v.push(Complex64::from_polar(1.0, m as f64 * d * psi.azi + n as f64 * d * psi.ele));
            }
        }
        v
    }

    fn random_map<R: Rng>(nx: usize, ny: usize, rng: &mut R) -> ReflectionMap {
        let c = (0..nx * ny).map(|_| Complex64::from_polar(rng.random(), rng.random::<f64>() * 6.3)).collect();
        ReflectionMap::from_coeffs(nx, ny, c).unwrap()
    }

    #[test]
    fn taps_match_explicit_matrix_products() {
        // h(dT_s) = w^H (Σ_p β_p a_U(ν_p) a_R^H(μ_p) p(dT_s − τ_p)) diag(φ) G f,
        // G = α a_R(ψ^R) a_B^H(ψ^B), evaluated with dense vectors.
        let sys = SystemConfig::desk_scale();
        let lam = sys.lambda;
        let shape = PulseShape::new(0.8, sys.t_s).unwrap();
        let mut rng = substream(21, &[]);
        let gb = SurfaceGeometry::half_wavelength_upa(3, 2, lam).unwrap();
        let gr = SurfaceGeometry::dpa(5, 4, lam / 4.0, lam).unwrap();
        let gu = SurfaceGeometry::half_wavelength_upa(2, 2, lam).unwrap();
        let (fb, phi, wu) = (random_map(3, 2, &mut rng), random_map(5, 4, &mut rng), random_map(2, 2, &mut rng));
        let mut p = params(1, 4.0, 2.2e-9);
        p.psi_b = AngularPair::new(400.0, -800.0);

        let f = fb.coeffs();
        let w = wu.coeffs();
        let ab = steering(&gb, p.psi_b);
        let ar_in = steering(&gr, p.psi_r);
        let bs_scalar: Complex64 = ab.iter().zip(f).map(|(a, f)| a.conj() * f).sum();
        let mut want = vec![cz(0.0, 0.0); sys.n_cp];
        for path in p.paths() {
            let au = steering(&gu, path.nu);
            let ar = steering(&gr, path.mu);
            let wh_au: Complex64 = w.iter().zip(&au).map(|(w, a)| w.conj() * a).sum();
            let ris: Complex64 = ar.iter().zip(phi.coeffs()).zip(&ar_in).map(|((a, ph), b)| a.conj() * ph * b).sum();
            for (d, t) in want.iter_mut().enumerate() {
                *t += p.alpha * bs_scalar * path.gain * wh_au * ris * shape.eval(d as f64 * sys.t_s - path.tau);
            }
        }

        let ris = MapBeam::new(gr, phi).unwrap();
        let ue = ReceiveCombiner(MapBeam::new(gu, wu).unwrap());
        let g_b = bs_gain(&gb, &fb, p.psi_b).unwrap();
        let ch = effective_delay_channel(&p, &ris, &ue, g_b, &shape, &sys).unwrap();
        let scale = want.iter().map(|t| t.norm()).fold(0.0, f64::max);
        for (a, b) in ch.taps.iter().zip(&want) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn nbs_bs_gain_is_coherent_sum() {
        let lam = 0.002;
        let g = SurfaceGeometry::half_wavelength_upa(8, 6, lam).unwrap();
        let psi = AngularPair::new(900.0, -400.0);
        let map = nbs_coefficients(&g, psi, AngularPair::ZERO).unwrap();
        let v = bs_gain(&g, &map, psi).unwrap();
        assert!((v.norm() - 48.0).abs() < 1e-10);
    }
}
