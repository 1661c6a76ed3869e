//! Path loss, UE placement and the Rician RIS-UE channel.
//!
//! Random draws in [`sample_rician`] happen in a fixed order so that a
//! channel realization depends only on the stream it is given: θ_α, θ_β,
//! ν^LoS, then (μ_l, ν_l) per NLoS path, τ^LoS, the τ_l, and finally β_l.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{Deployment, SystemConfig};
use crate::beampattern::{physical_to_spatial, AngularPair, PhysicalAngle};
use crate::error::{domain, HolorisError, Result};

/// Half of the 120° sector served by the RIS.
pub const SECTOR_HALF_ANGLE: f64 = PI / 3.0;

/// Exponential molecular-absorption loss A_abs = e^{coeff·dist} (≥ 1).
///
/// `coeff` is the absorption coefficient at carrier `f_c`; 0 disables it.
pub fn molecular_absorption(f_c: f64, dist: f64, coeff: f64) -> Result<f64> {
    if !(f_c > 0.0) {
        return domain("carrier frequency must be positive");
    }
    if !(dist >= 0.0) {
        return domain(format!("negative distance {dist}"));
    }
    if !(coeff >= 0.0) {
        return domain(format!("negative absorption coefficient {coeff}"));
    }
    Ok((coeff * dist).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub g_tx: f64,
    pub g_ris: f64,
    pub g_rx: f64,
    /// Effective reflection area of the RIS, m².
    pub s_eff: f64,
    /// Physical area of one DPA element, m².
    pub s_ele: f64,
    /// Absorption coefficient, 1/m.
    pub absorption_coeff: f64,
    /// RIS-UE distance, m.
    pub d_ris_ue: f64,
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.g_tx, self.g_ris, self.g_rx, self.s_eff, self.s_ele];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return domain("gains and areas must be positive");
        }
        if !(self.d_ris_ue > 0.0) {
            return domain("RIS-UE distance must be positive");
        }
        if !(self.absorption_coeff >= 0.0) {
            return domain("absorption coefficient must be non-negative");
        }
        Ok(())
    }
}

/// |α| = sqrt(G_tx S_eff / (4πR² A_abs(R))),
/// |β^LoS| = sqrt(G_ris G_rx / A_abs(d)) · λ/(4πd), with U[0, 2π) phases.
///
/// R is the deployment radius, used as the BS-RIS distance.
pub fn channel_coefficients<R: Rng + ?Sized>(
    pl: &PathLossParams,
    sys: &SystemConfig,
    rng: &mut R,
) -> Result<(Complex64, Complex64)> {
    let (alpha, beta) = coefficient_magnitudes(pl, sys)?;
    let theta_a: f64 = rng.random::<f64>() * 2.0 * PI;
    let theta_b: f64 = rng.random::<f64>() * 2.0 * PI;
    Ok((Complex64::from_polar(alpha, theta_a), Complex64::from_polar(beta, theta_b)))
}

/// (|α|, |β^LoS|) without the random phases.
pub fn coefficient_magnitudes(pl: &PathLossParams, sys: &SystemConfig) -> Result<(f64, f64)> {
    pl.validate()?;
    let r = sys.geometry.r;
    if !(r > 0.0) {
        return domain("BS-RIS distance must be positive");
    }
    let a_bs = molecular_absorption(sys.f_c, r, pl.absorption_coeff)?;
    let a_ue = molecular_absorption(sys.f_c, pl.d_ris_ue, pl.absorption_coeff)?;
    let alpha = (pl.g_tx * pl.s_eff / (4.0 * PI * r * r * a_bs)).sqrt();
    let beta = (pl.g_ris * pl.g_rx / a_ue).sqrt() * sys.lambda / (4.0 * PI * pl.d_ris_ue);
    Ok((alpha, beta))
}

/// UE ground position in polar form around the RIS foot point: range `r`
/// and angle `phi` from the RIS normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePosition {
    pub r: f64,
    pub phi: f64,
}

impl UePosition {
    pub fn new(r: f64, phi: f64) -> Self {
        Self { r, phi }
    }

    pub fn in_sector(&self, geo: &Deployment) -> bool {
        (0.0..=geo.r).contains(&self.r) && self.phi.abs() <= SECTOR_HALF_ANGLE + 1e-12
    }

    /// Uniform by area over the sector.
    pub fn sample<R: Rng + ?Sized>(geo: &Deployment, rng: &mut R) -> Self {
        let r = geo.r * rng.random::<f64>().sqrt();
        let phi = (2.0 * rng.random::<f64>() - 1.0) * SECTOR_HALF_ANGLE;
        Self { r, phi }
    }

    /// Straight-line RIS-UE distance.
    pub fn distance(&self, geo: &Deployment) -> f64 {
        self.r.hypot(geo.h1 - geo.h2)
    }

    /// LoS AoD at the RIS. The RIS normal is horizontal and points along the
    /// sector axis; its azimuth axis is horizontal and its elevation axis
    /// vertical, so ψ = (2π/λ)·(r sinφ, h2 − h1)/distance.
    pub fn los_aod(&self, geo: &Deployment, lambda: f64) -> AngularPair {
        let k = 2.0 * PI / lambda / self.distance(geo);
        AngularPair::new(k * self.r * self.phi.sin(), k * (geo.h2 - geo.h1))
    }
}

/// Rician statistics of the RIS-UE link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingConfig {
    /// Number of NLoS paths L.
    pub l: usize,
    /// Rician factor K_f (linear). `f64::INFINITY` removes the NLoS part.
    pub k_f: f64,
}

impl FadingConfig {
    pub fn from_db(l: usize, k_f_db: f64) -> Self {
        Self { l, k_f: 10f64.powf(k_f_db / 10.0) }
    }

    pub fn los_only() -> Self {
        Self { l: 0, k_f: f64::INFINITY }
    }

    /// 1/√(L·K_f), or 0 when the NLoS part vanishes.
    pub fn nlos_scale(&self) -> f64 {
        if self.l == 0 || self.k_f.is_infinite() {
            0.0
        } else {
            1.0 / (self.l as f64 * self.k_f).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkDirection {
    Downlink,
    Uplink,
}

/// One LoS and `l` NLoS paths of the RIS-UE link plus the BS-RIS LoS link.
#[derive(Debug, Clone, PartialEq)]
pub struct RicianChannelParams {
    pub direction: LinkDirection,
    pub l: usize,
    pub k_f: f64,
    pub mu_los: AngularPair,
    pub nu_los: AngularPair,
    pub mu_nlos: Vec<AngularPair>,
    pub nu_nlos: Vec<AngularPair>,
    pub tau_los: f64,
    pub tau_nlos: Vec<f64>,
    pub alpha: Complex64,
    pub beta_los: Complex64,
    /// NLoS gains before the 1/√(L·K_f) scaling.
    pub beta_nlos: Vec<Complex64>,
    pub psi_b: AngularPair,
    pub psi_r: AngularPair,
    pub theta_alpha: f64,
    pub theta_beta: f64,
}

/// A single propagation path with its effective RIS-UE gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTerm {
    pub mu: AngularPair,
    pub nu: AngularPair,
    pub tau: f64,
    /// β^LoS for the LoS path, β_l/√(L·K_f) for NLoS path l.
    pub gain: Complex64,
}

impl RicianChannelParams {
    /// LoS path first, then the NLoS paths in order. NLoS paths are omitted
    /// when their scale is zero.
    pub fn paths(&self) -> Vec<PathTerm> {
        let mut out = vec![PathTerm { mu: self.mu_los, nu: self.nu_los, tau: self.tau_los, gain: self.beta_los }];
        let s = FadingConfig { l: self.l, k_f: self.k_f }.nlos_scale();
        if s > 0.0 {
            for i in 0..self.l {
                out.push(PathTerm {
                    mu: self.mu_nlos[i],
                    nu: self.nu_nlos[i],
                    tau: self.tau_nlos[i],
                    gain: self.beta_nlos[i] * s,
                });
            }
        }
        out
    }

    /// `key = value` lines describing the realization.
    pub fn describe(&self) -> Vec<String> {
        let p = |a: AngularPair| format!("{:.16e} {:.16e}", a.azi, a.ele);
        let c = |z: Complex64| format!("{:.16e} {:.16e}", z.re, z.im);
        let mut v = vec![
            format!("direction = {:?}", self.direction),
            format!("L = {}", self.l),
            format!("K_f = {:.16e}", self.k_f),
            format!("mu_los = {}", p(self.mu_los)),
            format!("nu_los = {}", p(self.nu_los)),
            format!("tau_los = {:.16e}", self.tau_los),
            format!("alpha = {}", c(self.alpha)),
            format!("beta_los = {}", c(self.beta_los)),
            format!("psi_b = {}", p(self.psi_b)),
            format!("psi_r = {}", p(self.psi_r)),
        ];
        for i in 0..self.l {
            v.push(format!("mu_nlos[{i}] = {}", p(self.mu_nlos[i])));
            v.push(format!("nu_nlos[{i}] = {}", p(self.nu_nlos[i])));
            v.push(format!("tau_nlos[{i}] = {:.16e}", self.tau_nlos[i]));
            v.push(format!("beta_nlos[{i}] = {}", c(self.beta_nlos[i])));
        }
        v
    }
}

/// Uniform direction over the outgoing hemisphere in physical-angle space.
pub fn random_direction<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> AngularPair {
    let azi = rng.random::<f64>() * 2.0 * PI;
    let ele = rng.random::<f64>() * PI / 2.0;
    physical_to_spatial(PhysicalAngle::new(azi, ele).expect("angles drawn in range"), lambda)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one downlink channel realization for a UE at `ue`.
///
/// `pl.d_ris_ue` is ignored and replaced by the UE's distance. NLoS delays
/// are drawn from U(τ^LoS, (N_CP−1)T_s), which is the distribution that
/// rejection of draws below τ^LoS would produce.
pub fn sample_rician<R: Rng + ?Sized>(
    sys: &SystemConfig,
    fading: &FadingConfig,
    pl: &PathLossParams,
    ue: UePosition,
    rng: &mut R,
) -> Result<RicianChannelParams> {
    let geo = &sys.geometry;
    if !ue.in_sector(geo) {
        return domain(format!("UE at r = {}, phi = {} lies outside the sector", ue.r, ue.phi));
    }
    if !(fading.k_f > 0.0) {
        return Err(HolorisError::Config("Rician factor must be positive".into()));
    }
    let pl = PathLossParams { d_ris_ue: ue.distance(geo), ..*pl };
    let (alpha_mag, beta_mag) = coefficient_magnitudes(&pl, sys)?;
    let theta_alpha = rng.random::<f64>() * 2.0 * PI;
    let theta_beta = rng.random::<f64>() * 2.0 * PI;
    let nu_los = random_direction(sys.lambda, rng);
    let mut mu_nlos = Vec::with_capacity(fading.l);
    let mut nu_nlos = Vec::with_capacity(fading.l);
    for _ in 0..fading.l {
        mu_nlos.push(random_direction(sys.lambda, rng));
        nu_nlos.push(random_direction(sys.lambda, rng));
    }
    let t_max = (sys.n_cp - 1) as f64 * sys.t_s;
    let tau_los = rng.random::<f64>() * t_max;
    let tau_nlos: Vec<f64> = (0..fading.l)
        .map(|_| {
            // Open interval so that τ_l > τ^LoS strictly.
            let u: f64 = rng.random();
            let u = if u == 0.0 { 0.5 } else { u };
            tau_los + u * (t_max - tau_los)
        })
        .collect();
    let beta_nlos = (0..fading.l).map(|_| complex_normal(rng) * beta_mag).collect();
    Ok(RicianChannelParams {
        direction: LinkDirection::Downlink,
        l: fading.l,
        k_f: fading.k_f,
        mu_los: ue.los_aod(geo, sys.lambda),
        nu_los,
        mu_nlos,
        nu_nlos,
        tau_los,
        tau_nlos,
        alpha: Complex64::from_polar(alpha_mag, theta_alpha),
        beta_los: Complex64::from_polar(beta_mag, theta_beta),
        beta_nlos,
        psi_b: sys.psi_b,
        psi_r: sys.psi_r,
        theta_alpha,
        theta_beta,
    })
}

/// Uplink parameters under TDD reciprocity: identical angles, delays and
/// coefficients, with the link direction flipped.
pub fn reciprocal_uplink(params: &RicianChannelParams) -> RicianChannelParams {
    let direction = match params.direction {
        LinkDirection::Downlink => LinkDirection::Uplink,
        LinkDirection::Uplink => LinkDirection::Downlink,
    };
    RicianChannelParams { direction, ..params.clone() }
}
