//! Monte-Carlo trial runners shared by the experiment scenarios.
//!
//! Every trial is a pure function of its seed. Streams inside a trial are
//! opened with [`substream`] under the labels of [`label`], so the channel,
//! the UE positions, the RIS phases and each noise source can be reproduced
//! independently. Sweeps reuse the same trial seeds at every point, which
//! keeps curves smooth (common random numbers).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::beampattern::{
    array_gain, effective_reflection_area, normalized_nbs, quantize_phases, AngularPair, BeamPattern, MapBeam,
    QuantizerConfig, Scaled, SurfaceGeometry,
};
use crate::ce_downlink::{
    group_cutoffs, oracle_index, select_group, simulate_downlink_sweep, DownlinkSetup, GroupIndex, GroupingGrid,
    UeCodebook,
};
use crate::ce_uplink::{
    allocate_dsc, build_addd_channel, build_measurements, build_search_space, draw_slot_configs, ls_baseline,
    sensing_matrices, AdDdChannel, DscScheme, UplinkLink, UplinkSearchSpace,
};
use crate::channel::{
    dbm_to_watt, effective_delay_channel, reciprocal_uplink, Deployment, sample_rician, FadingConfig, PathLossParams, PulseShape,
    ReceiveCombiner, RicianChannelParams, SystemConfig, UePosition,
};
use crate::error::{HolorisError, Result};
use crate::metrics::{ase, nmse, pilot_overhead, AseInput, OverheadReport};
use crate::beampattern::nbs_coefficients;
use crate::rng::{derive_seed, label, substream};
use crate::sparse_recovery::{omp, KroneckerOperator, OmpConfig, SparseEstimate, Telemetry};

/// Element area of a fabricated THz reflector, 200 µm × 200 µm.
pub const DEFAULT_S_ELE: f64 = 4e-8;

/// RIS side of the full-size setup in wavelengths (0.2 m at 2 mm).
pub const FULL_APERTURE: f64 = 100.0;

/// Desk-scale aperture and deployment relative to the full-size setup.
pub const DESK_SHRINK: f64 = 16.0 / FULL_APERTURE;

/// Default transmit power of both stages at desk scale.
pub const DESK_POWER_DBM: f64 = 60.0;

/// Attempts allowed when drawing co-grouped UEs before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceSpec {
    Cms,
    /// DPA with element spacing `spacing` (in wavelengths).
    Dpa { spacing: f64 },
}

impl SurfaceSpec {
    /// Surface of side `aperture` wavelengths at wavelength `lambda`.
    pub fn build(&self, aperture: f64, lambda: f64) -> Result<SurfaceGeometry> {
        let a = aperture * lambda;
        match *self {
            Self::Cms => SurfaceGeometry::cms(a, a, lambda),
            Self::Dpa { spacing } => SurfaceGeometry::dpa_from_aperture(a, a, spacing * lambda, lambda),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Cms => "cms".into(),
            Self::Dpa { spacing } => format!("dpa_{spacing}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub sys: SystemConfig,
    /// RIS side length in wavelengths.
    pub aperture: f64,
    pub surface: SurfaceSpec,
    pub s_ele: f64,
    pub absorption_coeff: f64,
    pub fading: FadingConfig,
    pub rolloff: f64,
    pub groups: (usize, usize),
    pub n_p: usize,
    pub n_ue: usize,
    pub n_max: usize,
    pub omp_residual_tol: f64,
    pub dsc: DscScheme,
    pub t_coh: f64,
    /// Quadrature nodes per axis for the array-gain integrals.
    pub gain_quad: usize,
}

impl SimConfig {
    /// Laptop-sized defaults: 32×32 RIS at λ/2 (16λ aperture), 4×4 groups.
    /// The deployment shrinks by the same factor as the aperture (0.16), so
    /// every LoS angle keeps its full-size distribution.
    pub fn desk_scale() -> Self {
        let mut sys = SystemConfig::desk_scale();
        let g = sys.geometry;
        sys.geometry = Deployment { r: g.r * DESK_SHRINK, h1: g.h1 * DESK_SHRINK, h2: g.h2 * DESK_SHRINK };
        // The 16λ aperture collects far less energy than the full-size one;
        // both stages leave the noise-limited regime only around 60 dBm.
        sys.p_tx_dl = dbm_to_watt(DESK_POWER_DBM);
        sys.p_tx_ul = dbm_to_watt(DESK_POWER_DBM);
        Self {
            sys,
            aperture: 16.0,
            surface: SurfaceSpec::Dpa { spacing: 0.5 },
            s_ele: DEFAULT_S_ELE,
            absorption_coeff: 0.0,
            fading: FadingConfig::from_db(1, 30.0),
            rolloff: 0.8,
            groups: (4, 4),
            n_p: 40,
            n_ue: 4,
            n_max: 20,
            omp_residual_tol: 0.0,
            dsc: DscScheme::Random,
            t_coh: 5e-3,
            gain_quad: 256,
        }
    }

    /// Full-size setup: 0.2 m CMS aperture (100λ), 10×10 groups.
    pub fn full_scale() -> Self {
        Self {
            sys: SystemConfig::full_scale(),
            aperture: FULL_APERTURE,
            surface: SurfaceSpec::Cms,
            groups: (10, 10),
            ..Self::desk_scale()
        }
    }
}

/// Everything a trial needs that does not depend on the seed.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub cfg: SimConfig,
    pub ris: SurfaceGeometry,
    pub ue: SurfaceGeometry,
    pub grid: GroupingGrid,
    pub codebook: UeCodebook,
    pub shape: PulseShape,
    pub pl: PathLossParams,
}

/// Normalized BS pattern at ψ^B: the BS precoder points at the RIS.
const BS_GAIN: Complex64 = Complex64::new(1.0, 0.0);

impl Testbed {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let sys = &cfg.sys;
        sys.validate()?;
        let lambda = sys.lambda;
        let ris = cfg.surface.build(cfg.aperture, lambda)?;
        let ue = SurfaceGeometry::half_wavelength_upa(sys.m_u.0, sys.m_u.1, lambda)?;
        let bs = SurfaceGeometry::half_wavelength_upa(sys.m_b.0, sys.m_b.1, lambda)?;
        let grid = group_cutoffs(cfg.groups.0, cfg.groups.1, &ris)?;
        let codebook = UeCodebook::new(sys.m_u.0, sys.m_u.1, lambda)?;
        let shape = PulseShape::new(cfg.rolloff, sys.t_s)?;
        let gain = |g: SurfaceGeometry, toward: AngularPair, inc: AngularPair| {
            let beam = normalized_nbs(g, toward, inc);
            array_gain(|psi| beam.response(psi, inc), lambda, cfg.gain_quad)
        };
        let s_eff = effective_reflection_area(&ris, cfg.s_ele)?;
        let pl = PathLossParams {
            g_tx: gain(bs, sys.psi_b, AngularPair::ZERO)?,
            g_ris: gain(ris, sys.psi_r, sys.psi_r)?,
            g_rx: gain(ue, AngularPair::ZERO, AngularPair::ZERO)?,
            s_eff,
            s_ele: cfg.s_ele.min(s_eff),
            absorption_coeff: cfg.absorption_coeff,
            d_ris_ue: sys.geometry.r,
        };
        if cfg.n_ue == 0 || cfg.n_p == 0 || cfg.n_max == 0 {
            return Err(HolorisError::Config("N_UE, N_P and N_max must be at least 1".into()));
        }
        allocate_dsc(DscScheme::Block, sys.n_cp, cfg.n_ue, &mut substream(0, &[]))?;
        Ok(Self { cfg: cfg.clone(), ris, ue, grid, codebook, shape, pl })
    }

    pub fn sys(&self) -> &SystemConfig {
        &self.cfg.sys
    }

    /// N_UE UEs sharing the oracle RIS group of the first one, each with its
    /// own channel realization.
    pub fn draw_group(&self, seed: u64) -> Result<Vec<RicianChannelParams>> {
        let sys = self.sys();
        let geo = &sys.geometry;
        let mut pos_rng = substream(seed, &[label::UE_POSITION]);
        let first = UePosition::sample(geo, &mut pos_rng);
        let group = self.grid.oracle_group(first.los_aod(geo, sys.lambda));
        let mut ues = vec![first];
        let mut attempts = 0;
        while ues.len() < self.cfg.n_ue {
            attempts += 1;
            if attempts > MAX_PLACEMENT_ATTEMPTS {
                return Err(HolorisError::Domain(format!("no co-grouped UE found for group {group:?}")));
            }
            let p = UePosition::sample(geo, &mut pos_rng);
            if self.grid.oracle_group(p.los_aod(geo, sys.lambda)) == group {
                ues.push(p);
            }
        }
        ues.into_iter()
            .enumerate()
            .map(|(u, pos)| sample_rician(sys, &self.cfg.fading, &self.pl, pos, &mut substream(seed, &[label::CHANNEL, u as u64])))
            .collect()
    }

    fn oracle(&self, p: &RicianChannelParams) -> GroupIndex {
        oracle_index(&self.grid, &self.codebook, p.mu_los, p.nu_los)
    }

    /// Downlink sweep for one UE; returns (estimate, oracle).
    pub fn downlink(&self, p: &RicianChannelParams, noise_seed: u64) -> Result<(GroupIndex, GroupIndex)> {
        let setup = DownlinkSetup {
            grid: &self.grid,
            codebook: &self.codebook,
            ris: &self.ris,
            ue: &self.ue,
            bs_gain: BS_GAIN,
            shape: &self.shape,
            sys: self.sys(),
        };
        let obs = simulate_downlink_sweep(&setup, p, noise_seed)?;
        Ok((select_group(&obs)?, self.oracle(p)))
    }

    /// Whether the first UE of the trial picks a wrong group or codeword.
    pub fn downlink_failure(&self, seed: u64) -> Result<bool> {
        let p = self.draw_group_first(seed)?;
        let (est, truth) = self.downlink(&p, derive_seed(seed, &[label::DOWNLINK_NOISE, 0]))?;
        Ok(est != truth)
    }

    fn draw_group_first(&self, seed: u64) -> Result<RicianChannelParams> {
        let sys = self.sys();
        let pos = UePosition::sample(&sys.geometry, &mut substream(seed, &[label::UE_POSITION]));
        sample_rician(sys, &self.cfg.fading, &self.pl, pos, &mut substream(seed, &[label::CHANNEL, 0]))
    }

    fn ue_beam(&self, n_x: usize, n_y: usize) -> ReceiveCombiner<Scaled<crate::beampattern::NbsBeam>> {
        ReceiveCombiner(normalized_nbs(self.ue, self.codebook.direction(n_x, n_y), AngularPair::ZERO))
    }

    fn addd(&self, p: &RicianChannelParams, space: &UplinkSearchSpace, cw: (usize, usize)) -> Result<AdDdChannel> {
        let ue = self.ue_beam(cw.0, cw.1);
        let link = UplinkLink {
            space,
            ris: &self.ris,
            ue: &ue,
            bs_gain: BS_GAIN,
            shape: &self.shape,
            sys: self.sys(),
        };
        build_addd_channel(&reciprocal_uplink(p), &link)
    }

    /// Uplink CS estimation for every UE of a group.
    ///
    /// `group` and `codewords` select the search space and UE beams; the
    /// true channels are always built from `ues`.
    pub fn uplink(
        &self,
        seed: u64,
        ues: &[RicianChannelParams],
        group: (usize, usize),
        codewords: &[(usize, usize)],
    ) -> Result<UplinkRun> {
        let sys = self.sys();
        let space = build_search_space(group.0, group.1, &self.grid)?;
        let slots = draw_slot_configs(&space, &self.ris, sys.psi_r, self.cfg.n_p, &mut substream(seed, &[label::UPLINK_PHASES]))?;
        let alloc = allocate_dsc(self.cfg.dsc, sys.n_cp, ues.len(), &mut substream(seed, &[label::DSC]))?;
        let mut out = UplinkRun { space: space.clone(), truth: Vec::new(), estimates: Vec::new(), telemetry: Telemetry::default() };
        for (u, p) in ues.iter().enumerate() {
            let h = self.addd(p, &space, codewords[u])?;
            let sens = sensing_matrices(&slots, &alloc.sets[u], sys.n_cp, sys.p_tx_ul)?;
            let meas = build_measurements(&h, &sens, sys.sigma_n2, &mut substream(seed, &[label::UPLINK_NOISE, u as u64]))?;
            let op = KroneckerOperator::new(sens.w, sens.f_u)?;
            let est = robust_omp(&op, &meas.y, self.omp_config(self.cfg.n_p * alloc.n_used))?;
            out.telemetry = add_telemetry(out.telemetry, est.telemetry);
            out.truth.push(h);
            out.estimates.push(est);
        }
        Ok(out)
    }

    fn omp_config(&self, measurements: usize) -> OmpConfig {
        OmpConfig { max_iters: self.cfg.n_max.min(measurements), residual_tol: self.cfg.omp_residual_tol }
    }

    /// Uplink NMSE averaged over the UEs of one trial, with oracle group and
    /// codewords.
    pub fn uplink_nmse(&self, seed: u64) -> Result<(f64, Telemetry)> {
        let ues = self.draw_group(seed)?;
        let group = self.grid.oracle_group(ues[0].mu_los);
        let cws: Vec<_> = ues.iter().map(|p| self.codebook.nearest(p.nu_los)).collect();
        let run = self.uplink(seed, &ues, group, &cws)?;
        Ok((run.mean_nmse()?, run.telemetry))
    }

    /// Time-division LS baseline: each UE owns B_xB_y slots and all N_CP
    /// subcarriers. Returns the estimates and the pilot count B_xB_y·N_UE.
    pub fn ls(&self, seed: u64, ues: &[RicianChannelParams], group: (usize, usize), codewords: &[(usize, usize)]) -> Result<(Vec<AdDdChannel>, Vec<AdDdChannel>, usize)> {
        let sys = self.sys();
        let space = build_search_space(group.0, group.1, &self.grid)?;
        let bb = space.len();
        let slots = draw_slot_configs(&space, &self.ris, sys.psi_r, bb, &mut substream(seed, &[label::LS_PHASES]))?;
        let all: Vec<usize> = (0..sys.n_cp).collect();
        let sens = sensing_matrices(&slots, &all, sys.n_cp, sys.p_tx_ul)?;
        let mut truth = Vec::new();
        let mut est = Vec::new();
        for (u, p) in ues.iter().enumerate() {
            let h = self.addd(p, &space, codewords[u])?;
            let m = build_measurements(&h, &sens, sys.sigma_n2, &mut substream(seed, &[label::LS_NOISE, u as u64]))?;
            est.push(ls_baseline(&sens.w, &m.y, &sens.f_u)?);
            truth.push(h);
        }
        Ok((truth, est, bb * ues.len()))
    }

    pub fn ls_nmse(&self, seed: u64) -> Result<f64> {
        let ues = self.draw_group(seed)?;
        let group = self.grid.oracle_group(ues[0].mu_los);
        let cws: Vec<_> = ues.iter().map(|p| self.codebook.nearest(p.nu_los)).collect();
        let (truth, est, _) = self.ls(seed, &ues, group, &cws)?;
        mean_nmse(&est, &truth)
    }

    /// h^Fd_k = Σ_d h_d e^{−j2πdk/K} of the data link with the RIS steering
    /// an NBS beam at `mu` and the UE using `ue_beam`.
    pub fn data_channel(&self, p: &RicianChannelParams, ris: &dyn BeamPattern, ue_beam: &dyn BeamPattern) -> Result<Vec<Complex64>> {
        let sys = self.sys();
        let ch = effective_delay_channel(&reciprocal_uplink(p), ris, ue_beam, BS_GAIN, &self.shape, sys)?;
        let s = (sys.k as f64).sqrt();
        Ok(crate::channel::interpolate_to_k(&ch.taps, sys.k)?.into_iter().map(|v| v * s).collect())
    }

    fn ase_of(&self, h_fd: Vec<Complex64>, overhead: &OverheadReport) -> Result<f64> {
        let sys = self.sys();
        ase(&AseInput { t_coh: self.cfg.t_coh, h_fd, p_tx: sys.p_tx_ul, sigma_n2: sys.sigma_n2 }, overhead)
    }

    /// Overhead of the closed-loop scheme with `n_p` uplink pilots.
    pub fn overhead(&self, n_p: usize) -> OverheadReport {
        let sys = self.sys();
        pilot_overhead(self.cfg.groups, sys.m_u, n_p, sys.n_cp, sys.t_s)
    }

    /// Full pipeline ASE per UE, averaged over the group: downlink
    /// selection, uplink CS (and LS) estimation, data with an NBS beam at
    /// the estimated grid direction. The bound steers at the true μ^LoS with
    /// the oracle codeword and pays no pilot overhead.
    pub fn ase_trial(&self, seed: u64) -> Result<AseOutcome> {
        let ues = self.draw_group(seed)?;
        let mut picks = Vec::with_capacity(ues.len());
        for (u, p) in ues.iter().enumerate() {
            picks.push(self.downlink(p, derive_seed(seed, &[label::DOWNLINK_NOISE, u as u64]))?.0);
        }
        let group = (picks[0].g_x, picks[0].g_y);
        let cws: Vec<_> = picks.iter().map(|g| (g.n_x, g.n_y)).collect();
        let run = self.uplink(seed, &ues, group, &cws)?;
        let (_, ls_est, ls_np) = self.ls(seed, &ues, group, &cws)?;
        let psi_r = self.sys().psi_r;
        let zero = pilot_overhead((1, 1), (1, 1), 0, 1, 0.0);
        let mut o = AseOutcome::default();
        for (u, p) in ues.iter().enumerate() {
            let ue_beam = self.ue_beam(cws[u].0, cws[u].1);
            let steer = |h: &AdDdChannel| normalized_nbs(self.ris, run.space.zeta(strongest_row(h)), psi_r);
            let cs = self.data_channel(p, &steer(&run.estimates[u].h_hat_channel()), &ue_beam)?;
            o.estimated += self.ase_of(cs, &self.overhead(self.cfg.n_p))?;
            let ls = self.data_channel(p, &steer(&ls_est[u]), &ue_beam)?;
            o.ls += self.ase_of(ls, &self.overhead(ls_np)).unwrap_or(0.0);
            let (nx, ny) = self.codebook.nearest(p.nu_los);
            let bound = self.data_channel(p, &normalized_nbs(self.ris, p.mu_los, psi_r), &self.ue_beam(nx, ny))?;
            o.bound += self.ase_of(bound, &zero)?;
        }
        let n = ues.len() as f64;
        o.estimated /= n;
        o.ls /= n;
        o.bound /= n;
        Ok(o)
    }

    /// Perfect-CSI ASE of the first UE with the RIS NBS map quantized to
    /// `bits` phase bits (`None` keeps continuous phases). Needs a DPA.
    pub fn quantized_ase(&self, seed: u64, bits: Option<u32>) -> Result<f64> {
        self.ris.require_dpa()?;
        let p = self.draw_group_first(seed)?;
        let psi_r = self.sys().psi_r;
        let map = nbs_coefficients(&self.ris, p.mu_los, psi_r)?;
        let map = match bits {
            Some(b) => quantize_phases(&map, QuantizerConfig::bits(b)?),
            None => map,
        };
        let beam = Scaled::new(MapBeam::new(self.ris, map)?, 1.0 / self.ris.elements() as f64);
        let (nx, ny) = self.codebook.nearest(p.nu_los);
        let h = self.data_channel(&p, &beam, &self.ue_beam(nx, ny))?;
        self.ase_of(h, &pilot_overhead((1, 1), (1, 1), 0, 1, 0.0))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AseOutcome {
    pub estimated: f64,
    pub ls: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct UplinkRun {
    pub space: UplinkSearchSpace,
    pub truth: Vec<AdDdChannel>,
    pub estimates: Vec<SparseEstimate>,
    pub telemetry: Telemetry,
}

impl UplinkRun {
    pub fn mean_nmse(&self) -> Result<f64> {
        let est: Vec<AdDdChannel> = self.estimates.iter().map(|e| e.h_hat_channel()).collect();
        mean_nmse(&est, &self.truth)
    }
}

impl SparseEstimate {
    pub fn h_hat_channel(&self) -> AdDdChannel {
        AdDdChannel { h: self.h_hat.clone() }
    }
}

fn mean_nmse(est: &[AdDdChannel], truth: &[AdDdChannel]) -> Result<f64> {
    let mut s = 0.0;
    for (e, t) in est.iter().zip(truth) {
        s += nmse(&e.h, &t.h)?;
    }
    Ok(s / truth.len() as f64)
}

/// Row (grid point) of largest energy, ties to the lowest.
pub fn strongest_row(h: &AdDdChannel) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (b, row) in h.h.rows().into_iter().enumerate() {
        let e: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        if e > best.1 {
            best = (b, e);
        }
    }
    best.0
}

fn add_telemetry(a: Telemetry, b: Telemetry) -> Telemetry {
    Telemetry {
        iterations: a.iterations + b.iterations,
        matched_filter_mults: a.matched_filter_mults + b.matched_filter_mults,
        least_squares_mults: a.least_squares_mults + b.least_squares_mults,
        residual_mults: a.residual_mults + b.residual_mults,
    }
}

/// OMP that stops one step early instead of failing when the support
/// becomes numerically dependent (aliased columns under uniform DSC).
fn robust_omp(op: &KroneckerOperator, y: &ndarray::Array2<Complex64>, cfg: OmpConfig) -> Result<SparseEstimate> {
    let mut cfg = cfg;
    loop {
        match omp(op, y.view(), &cfg) {
            Err(HolorisError::Singular { rank, .. }) if cfg.max_iters > 1 => {
                cfg.max_iters = rank.clamp(1, cfg.max_iters - 1);
            }
            other => return other,
        }
    }
}

/// Runs `trials` trials in parallel with seeds derive_seed(master, [t]) and
/// returns the results in trial order.
pub fn run_trials<T, F>(master: u64, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..trials as u64).into_par_iter().map(|t| f(derive_seed(master, &[t]))).collect()
}
