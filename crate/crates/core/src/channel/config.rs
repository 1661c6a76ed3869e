//! System-level configuration shared by the channel and estimation stages.

use crate::beampattern::AngularPair;
use crate::error::{HolorisError, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise power spectral density used by the presets, dBm/Hz.
pub const NOISE_PSD_DBM_HZ: f64 = -174.0;

/// dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm.
pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Deployment geometry: BS and RIS mounted at height `h1`, UEs at height
/// `h2` inside a 120° sector of radius `r` in front of the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deployment {
    pub r: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Wavelength, m. Kept equal to c/f_c by [`SystemConfig::set_carrier`].
    pub lambda: f64,
    /// Sampling period, s.
    pub t_s: f64,
    pub n_cp: usize,
    pub k: usize,
    /// BS array (M_x^B, M_y^B).
    pub m_b: (usize, usize),
    /// UE array (M_x^U, M_y^U).
    pub m_u: (usize, usize),
    pub n_rf: usize,
    /// Total downlink transmit power, W.
    pub p_tx_dl: f64,
    /// Per-UE uplink transmit power, W.
    pub p_tx_ul: f64,
    /// Receiver noise power σ_n², W.
    pub sigma_n2: f64,
    pub geometry: Deployment,
    /// BS-side LoS AoD of the BS-RIS link.
    pub psi_b: AngularPair,
    /// RIS-side LoS AoA of the BS-RIS link.
    pub psi_r: AngularPair,
}

impl SystemConfig {
    /// Full-size setup: 150 GHz, 500 MHz, N_CP = 64, K = 256, 64×64 BS,
    /// 8×8 UE, σ_n² = −174 dBm/Hz × bandwidth.
    pub fn full_scale() -> Self {
        let t_s = 2e-9;
        Self {
            f_c: 150e9,
            lambda: SPEED_OF_LIGHT / 150e9,
            t_s,
            n_cp: 64,
            k: 256,
            m_b: (64, 64),
            m_u: (8, 8),
            n_rf: 4,
            p_tx_dl: dbm_to_watt(30.0),
            p_tx_ul: dbm_to_watt(23.0),
            sigma_n2: dbm_to_watt(NOISE_PSD_DBM_HZ) / t_s,
            geometry: Deployment { r: 20.0, h1: 10.0, h2: 1.5 },
            psi_b: AngularPair::ZERO,
            psi_r: AngularPair::ZERO,
        }
    }

    /// Laptop-sized setup: N_CP = 16, K = 64, 16×16 BS, 4×4 UE; everything
    /// else as [`SystemConfig::full_scale`].
    pub fn desk_scale() -> Self {
        Self { n_cp: 16, k: 64, m_b: (16, 16), m_u: (4, 4), ..Self::full_scale() }
    }

    /// Sets f_c and the matching wavelength.
    pub fn set_carrier(&mut self, f_c: f64) {
        self.f_c = f_c;
        self.lambda = SPEED_OF_LIGHT / f_c;
    }

    /// Noise power for a PSD in dBm/Hz over the bandwidth 1/T_s.
    pub fn noise_from_psd(&mut self, psd_dbm_hz: f64) {
        self.sigma_n2 = dbm_to_watt(psd_dbm_hz) / self.t_s;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HolorisError::Config(m));
        if !(self.f_c > 0.0) || !(self.t_s > 0.0) {
            return bad("f_c and T_s must be positive".into());
        }
        if ((self.lambda - SPEED_OF_LIGHT / self.f_c) / self.lambda).abs() > 1e-9 {
            return bad(format!("lambda {} does not match c/f_c", self.lambda));
        }
        let counts = [self.n_cp, self.k, self.m_b.0, self.m_b.1, self.m_u.0, self.m_u.1, self.n_rf];
        if counts.contains(&0) {
            return bad("all counts must be at least 1".into());
        }
        if self.k % self.n_cp != 0 {
            return bad(format!("N_CP = {} does not divide K = {}", self.n_cp, self.k));
        }
        if self.p_tx_dl < 0.0 || self.p_tx_ul < 0.0 || self.sigma_n2 < 0.0 {
            return bad("powers must be non-negative".into());
        }
        let g = self.geometry;
        if !(g.r > 0.0) || g.h1 < 0.0 || g.h2 < 0.0 {
            return bad("deployment geometry must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        SystemConfig::full_scale().validate().unwrap();
        SystemConfig::desk_scale().validate().unwrap();
    }

    #[test]
    fn noise_power_is_about_minus_87_dbm() {
        let s = SystemConfig::full_scale();
        assert!((watt_to_dbm(s.sigma_n2) + 87.0).abs() < 0.05);
    }

    #[test]
    fn wavelength_is_about_two_millimetres() {
        let s = SystemConfig::full_scale();
        assert!((s.lambda - 1.998_616_386_666_666_7e-3).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_inconsistent_configs() {
        let mut s = SystemConfig::desk_scale();
        s.k = 60;
        assert!(s.validate().is_err());
        let mut s = SystemConfig::desk_scale();
        s.lambda *= 1.001;
        assert!(s.validate().is_err());
        let mut s = SystemConfig::desk_scale();
        s.m_u = (0, 4);
        assert!(s.validate().is_err());
        let mut s = SystemConfig::desk_scale();
        s.set_carrier(300e9);
        s.validate().unwrap();
    }

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watt(30.0) - 1.0).abs() < 1e-15);
        assert!((watt_to_dbm(dbm_to_watt(-87.3)) + 87.3).abs() < 1e-12);
    }
}
