//! Downlink coarse channel estimation: grouped SBF sweep at the RIS, NBS
//! codebook sweep at the UE, and argmax selection of (group, codeword).
//!
//! Indices are 0-based: group g_x ∈ 0..G_x covers normalized azimuth
//! [−1 + 2g_x/G_x, −1 + 2(g_x+1)/G_x − λ/A_x], and codeword n_x ∈ 0..M_x^U
//! points at normalized azimuth −1 + 2n_x/M_x^U.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::beampattern::{
    nbs_coefficients, normalized_nbs, AngularPair, BeamPattern, ReflectionMap, SbfBeam, SurfaceGeometry,
};
use crate::channel::{unitary_dft, PulseShape, ReceiveCombiner, RicianChannelParams, SystemConfig};
use crate::error::{check_shape, domain, HolorisError, Result};
use crate::rng::{label, substream};

/// `value` as an integer if it is one to within 1e−9 relative.
pub(crate) fn integral(value: f64, what: &str) -> Result<usize> {
    let r = value.round();
    if r >= 1.0 && (value - r).abs() <= 1e-9 * value.abs().max(1.0) {
        Ok(r as usize)
    } else {
        Err(HolorisError::Config(format!("{what} = {value} is not a positive integer")))
    }
}

/// BS precoder of every RF chain: NBS toward ψ^B with ψ_in = 0.
pub fn bs_beamforming(geom: &SurfaceGeometry, psi_b: AngularPair) -> Result<ReflectionMap> {
    nbs_coefficients(geom, psi_b, AngularPair::ZERO)
}

/// Partition of the RIS AoD range into G_x × G_y groups separated by one
/// resolution cell λ/A.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingGrid {
    gx: usize,
    gy: usize,
    bx: usize,
    by: usize,
    lambda: f64,
    ax: f64,
    ay: f64,
}

/// Cut-offs of all groups for a surface of aperture A_x × A_y.
///
/// Fails unless B_x = 2A_x/(λG_x) and B_y = 2A_y/(λG_y) are integers.
pub fn group_cutoffs(gx: usize, gy: usize, geom: &SurfaceGeometry) -> Result<GroupingGrid> {
    if gx == 0 || gy == 0 {
        return Err(HolorisError::Config("group counts must be at least 1".into()));
    }
    let lambda = geom.lambda();
    let bx = integral(2.0 * geom.ax() / (lambda * gx as f64), "B_x")?;
    let by = integral(2.0 * geom.ay() / (lambda * gy as f64), "B_y")?;
    Ok(GroupingGrid { gx, gy, bx, by, lambda, ax: geom.ax(), ay: geom.ay() })
}

impl GroupingGrid {
    pub fn gx(&self) -> usize {
        self.gx
    }
    pub fn gy(&self) -> usize {
        self.gy
    }
    /// Uplink grid points per group along azimuth.
    pub fn bx(&self) -> usize {
        self.bx
    }
    pub fn by(&self) -> usize {
        self.by
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn aperture(&self) -> (f64, f64) {
        (self.ax, self.ay)
    }

    fn k0(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    pub fn psi_min(&self, g_x: usize, g_y: usize) -> AngularPair {
        let k = self.k0();
        AngularPair::new(
            k * (-1.0 + 2.0 * g_x as f64 / self.gx as f64),
            k * (-1.0 + 2.0 * g_y as f64 / self.gy as f64),
        )
    }

    pub fn psi_max(&self, g_x: usize, g_y: usize) -> AngularPair {
        let k = self.k0();
        AngularPair::new(
            k * (-1.0 + 2.0 * (g_x + 1) as f64 / self.gx as f64 - self.lambda / self.ax),
            k * (-1.0 + 2.0 * (g_y + 1) as f64 / self.gy as f64 - self.lambda / self.ay),
        )
    }

    /// Group whose range, widened by half a gap on each side, contains `mu`.
    /// The widened ranges tile the axis, so every direction has one group.
    pub fn oracle_group(&self, mu: AngularPair) -> (usize, usize) {
        let (a, e) = mu.normalized(self.lambda);
        (
            tile_index(a, self.gx, self.lambda / self.ax),
            tile_index(e, self.gy, self.lambda / self.ay),
        )
    }

    /// Number of downlink pilots (UWs) for a full sweep with `cb`.
    pub fn pilot_count(&self, cb: &UeCodebook) -> usize {
        self.gx * self.gy * cb.mx * cb.my
    }
}

fn tile_index(x: f64, g: usize, gap: f64) -> usize {
    let i = ((x + 1.0 + gap / 2.0) * g as f64 / 2.0).floor();
    i.clamp(0.0, (g - 1) as f64) as usize
}

/// UE steering directions on the uniform grid over [−1, 1 − 2/M).
#[derive(Debug, Clone, PartialEq)]
pub struct UeCodebook {
    mx: usize,
    my: usize,
    lambda: f64,
}

impl UeCodebook {
    pub fn new(mx: usize, my: usize, lambda: f64) -> Result<Self> {
        if mx == 0 || my == 0 {
            return domain("codebook needs at least one direction per axis");
        }
        Ok(Self { mx, my, lambda })
    }

    pub fn mx(&self) -> usize {
        self.mx
    }
    pub fn my(&self) -> usize {
        self.my
    }

    pub fn direction(&self, n_x: usize, n_y: usize) -> AngularPair {
        AngularPair::from_normalized(
            self.lambda,
            -1.0 + 2.0 * n_x as f64 / self.mx as f64,
            -1.0 + 2.0 * n_y as f64 / self.my as f64,
        )
    }

    /// Codeword nearest to `nu` in circular distance (normalized period 2).
    pub fn nearest(&self, nu: AngularPair) -> (usize, usize) {
        let (a, e) = nu.normalized(self.lambda);
        let idx = |x: f64, m: usize| (((x + 1.0) * m as f64 / 2.0).round() as i64).rem_euclid(m as i64) as usize;
        (idx(a, self.mx), idx(e, self.my))
    }
}

/// Pilot samples y[k] for every sweep cell, cell-major then subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkObservation {
    pub n_cp: usize,
    pub dims: [usize; 4],
    pub y: Vec<Complex64>,
    pub sigma_n2: f64,
}

impl DownlinkObservation {
    pub fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cell_index(&self, idx: GroupIndex) -> usize {
        let [_, gy, mx, my] = self.dims;
        ((idx.g_x * gy + idx.g_y) * mx + idx.n_x) * my + idx.n_y
    }

    pub fn cell_at(&self, cell: usize) -> GroupIndex {
        let [_, gy, mx, my] = self.dims;
        GroupIndex { n_y: cell % my, n_x: (cell / my) % mx, g_y: (cell / (my * mx)) % gy, g_x: cell / (my * mx * gy) }
    }

    /// y_k for one cell.
    pub fn samples(&self, idx: GroupIndex) -> &[Complex64] {
        let c = self.cell_index(idx);
        &self.y[c * self.n_cp..(c + 1) * self.n_cp]
    }
}

/// Estimated (g_x, g_y, n_x, n_y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupIndex {
    pub g_x: usize,
    pub g_y: usize,
    pub n_x: usize,
    pub n_y: usize,
}

/// Ground-truth index for the LoS path: oracle RIS group of μ^LoS and the
/// UE codeword nearest ν^LoS.
pub fn oracle_index(grid: &GroupingGrid, cb: &UeCodebook, mu: AngularPair, nu: AngularPair) -> GroupIndex {
    let (g_x, g_y) = grid.oracle_group(mu);
    let (n_x, n_y) = cb.nearest(nu);
    GroupIndex { g_x, g_y, n_x, n_y }
}

/// Argmax over cells of Σ_k |y_k|; ties go to the lowest index.
pub fn select_group(obs: &DownlinkObservation) -> Result<GroupIndex> {
    if obs.cells() == 0 || obs.n_cp == 0 {
        return domain("empty downlink observation");
    }
    check_shape("observation length", obs.cells() * obs.n_cp, obs.y.len())?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (c, chunk) in obs.y.chunks(obs.n_cp).enumerate() {
        let s: f64 = chunk.iter().map(|v| v.norm()).sum();
        if s > best.1 {
            best = (c, s);
        }
    }
    Ok(obs.cell_at(best.0))
}

/// Surfaces and gains used during the sweep.
pub struct DownlinkSetup<'a> {
    pub grid: &'a GroupingGrid,
    pub codebook: &'a UeCodebook,
    /// RIS surface; SBF patterns are normalized per [`SbfBeam`].
    pub ris: &'a SurfaceGeometry,
    /// UE array; NBS combiners are normalized to unit peak.
    pub ue: &'a SurfaceGeometry,
    /// BS beam-pattern factor G^B.
    pub bs_gain: Complex64,
    pub shape: &'a PulseShape,
    pub sys: &'a SystemConfig,
}

/// Runs the full downlink sweep and returns the received pilots.
///
/// y_k = sqrt(P_Tx^DL / N_CP) · h_k + n_k with n_k ~ CN(0, σ_n²). Noise of
/// each cell comes from its own substream of `noise_seed`, so the result
/// does not depend on how cells are scheduled.
pub fn simulate_downlink_sweep(
    setup: &DownlinkSetup<'_>,
    params: &RicianChannelParams,
    noise_seed: u64,
) -> Result<DownlinkObservation> {
    let DownlinkSetup { grid, codebook: cb, ris, ue, bs_gain, shape, sys } = *setup;
    let n = sys.n_cp;
    let paths = params.paths();
    // Per-path spectra α G^B gain DFT{p(dT_s − τ)}.
    let spectra: Vec<Vec<Complex64>> = paths
        .iter()
        .map(|p| {
            let taps: Vec<Complex64> =
                shape.samples(n, p.tau).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            let c = params.alpha * bs_gain * p.gain;
            unitary_dft(&taps).into_iter().map(|v| v * c).collect()
        })
        .collect();
    let mut ris_gain = Vec::with_capacity(grid.gx * grid.gy);
    for g_x in 0..grid.gx {
        for g_y in 0..grid.gy {
            let beam = SbfBeam::new(*ris, grid.psi_min(g_x, g_y), grid.psi_max(g_x, g_y), params.psi_r)?;
            ris_gain.push(paths.iter().map(|p| beam.response(p.mu, params.psi_r)).collect::<Vec<_>>());
        }
    }
    let mut ue_gain = Vec::with_capacity(cb.mx * cb.my);
    for n_x in 0..cb.mx {
        for n_y in 0..cb.my {
            let beam = ReceiveCombiner(normalized_nbs(*ue, cb.direction(n_x, n_y), AngularPair::ZERO));
            ue_gain.push(paths.iter().map(|p| beam.response(p.nu, AngularPair::ZERO)).collect::<Vec<_>>());
        }
    }
    let amp = (sys.p_tx_dl / n as f64).sqrt();
    let sigma = (sys.sigma_n2 / 2.0).sqrt();
    let n_ue = cb.mx * cb.my;
    let cells = grid.gx * grid.gy * n_ue;
    let y: Vec<Complex64> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|cell| {
            let (g, u) = (cell / n_ue, cell % n_ue);
            let mut rng = substream(noise_seed, &[label::DOWNLINK_NOISE, cell as u64]);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (pi, spec) in spectra.iter().enumerate() {
                let w = ris_gain[g][pi] * ue_gain[u][pi] * amp;
                for (o, s) in out.iter_mut().zip(spec) {
                    *o += w * s;
                }
            }
            for o in out.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *o += Complex64::new(re, im) * sigma;
            }
            out
        })
        .collect();
    Ok(DownlinkObservation { n_cp: n, dims: [grid.gx, grid.gy, cb.mx, cb.my], y, sigma_n2: sys.sigma_n2 })
}

/// Whether the estimated index misses the oracle group or codeword.
pub fn is_grouping_failure(est: GroupIndex, truth: GroupIndex) -> bool {
    est != truth
}

/// Draws `n` i.i.d. CN(0, σ²) samples (exposed for tests and baselines).
pub fn complex_noise<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (sigma2 / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beampattern::{beam_pattern_dpa, normalized_axis};
    use crate::channel::{FadingConfig, LinkDirection, PathLossParams, UePosition, sample_rician};

    const LAMBDA: f64 = 0.002;

    fn cms(cells: f64) -> SurfaceGeometry {
        SurfaceGeometry::cms(cells * LAMBDA, cells * LAMBDA, LAMBDA).unwrap()
    }

    #[test]
    fn bs_beamforming_is_nbs() {
        let g = SurfaceGeometry::half_wavelength_upa(8, 8, LAMBDA).unwrap();
        let flat = bs_beamforming(&g, AngularPair::ZERO).unwrap();
        assert!(flat.coeffs().iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let psi = AngularPair::from_normalized(LAMBDA, 0.3, -0.1);
        let m = bs_beamforming(&g, psi).unwrap();
        assert_eq!(m, nbs_coefficients(&g, psi, AngularPair::ZERO).unwrap());
        let v = beam_pattern_dpa(&m, &g, psi, AngularPair::ZERO).unwrap();
        assert!((v.norm() - 64.0).abs() < 1e-10);
    }

    #[test]
    fn single_group_cutoffs() {
        let grid = group_cutoffs(1, 1, &cms(8.0)).unwrap();
        let k = 2.0 * PI / LAMBDA;
        assert_eq!(grid.psi_min(0, 0).azi, -k);
        assert!((grid.psi_max(0, 0).azi - k * (1.0 - 1.0 / 8.0)).abs() < 1e-9);
    }

    #[test]
    fn hundred_wavelength_aperture_with_ten_groups_gives_twenty_points() {
        let lam = 0.2 / 100.0;
        let g = SurfaceGeometry::cms(0.2, 0.2, lam).unwrap();
        let grid = group_cutoffs(10, 10, &g).unwrap();
        assert_eq!((grid.bx(), grid.by()), (20, 20));
        assert!(group_cutoffs(3, 10, &g).is_err());
    }

    #[test]
    fn group_widths_are_equal_and_tiling_is_exact() {
        let grid = group_cutoffs(4, 2, &cms(16.0)).unwrap();
        let k = 2.0 * PI / LAMBDA;
        let want = k * (2.0 / 4.0 - 1.0 / 16.0);
        for g in 0..4 {
            let w = grid.psi_max(g, 0).azi - grid.psi_min(g, 0).azi;
            assert!((w - want).abs() < 1e-9 * want);
            // Gap to the next group (or to the period end) is one cell.
            let next = if g + 1 < 4 { grid.psi_min(g + 1, 0).azi } else { k };
            assert!((next - grid.psi_max(g, 0).azi - k / 16.0).abs() < 1e-9 * k);
        }
        assert_eq!(grid.psi_min(0, 0).azi, -k);
    }

    #[test]
    fn oracle_group_contains_interior_points() {
        let grid = group_cutoffs(4, 4, &cms(16.0)).unwrap();
        for &a in &normalized_axis(101) {
            for &e in &normalized_axis(37) {
                // Beyond 1 − gap/2 the last group is used by clamping.
                if a > 1.0 - 1.0 / 32.0 || e > 1.0 - 1.0 / 32.0 {
                    continue;
                }
                let mu = AngularPair::from_normalized(LAMBDA, a, e);
                let (gx, gy) = grid.oracle_group(mu);
                let (lo, hi) = (grid.psi_min(gx, gy), grid.psi_max(gx, gy));
                let cell = 2.0 * PI / (16.0 * LAMBDA);
                assert!(mu.azi >= lo.azi - cell / 2.0 - 1e-9 && mu.azi <= hi.azi + cell / 2.0 + 1e-9);
                assert!(mu.ele >= lo.ele - cell / 2.0 - 1e-9 && mu.ele <= hi.ele + cell / 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn codebook_grid_and_nearest() {
        let cb = UeCodebook::new(4, 4, LAMBDA).unwrap();
        assert_eq!(cb.direction(0, 0).normalized(LAMBDA), (-1.0, -1.0));
        assert_eq!(cb.direction(3, 1).normalized(LAMBDA), (0.5, -0.5));
        let nu = AngularPair::from_normalized(LAMBDA, 0.7, 0.9);
        // 0.9 is nearer to −1 (≡ 1) than to 0.5.
        assert_eq!(cb.nearest(nu), (3, 0));
    }

    fn obs_from(values: &[f64]) -> DownlinkObservation {
        DownlinkObservation {
            n_cp: 2,
            dims: [1, 2, 1, values.len() / 2],
            y: values.iter().flat_map(|&v| [Complex64::new(v, 0.0), Complex64::new(0.0, v)]).collect(),
            sigma_n2: 0.0,
        }
    }

    #[test]
    fn selection_examples() {
        let o = obs_from(&[0.0, 0.0, 0.0, 2.0]);
        assert_eq!(select_group(&o).unwrap(), GroupIndex { g_x: 0, g_y: 1, n_x: 0, n_y: 1 });
        let o = obs_from(&[1.0; 4]);
        assert_eq!(select_group(&o).unwrap(), GroupIndex { g_x: 0, g_y: 0, n_x: 0, n_y: 0 });
        let mut e = obs_from(&[1.0; 4]);
        e.y.clear();
        assert!(select_group(&e).is_err());
    }

    #[test]
    fn cell_indexing_round_trips() {
        let o = DownlinkObservation { n_cp: 1, dims: [3, 2, 4, 5], y: vec![], sigma_n2: 0.0 };
        for c in 0..o.cells() {
            assert_eq!(o.cell_index(o.cell_at(c)), c);
        }
    }

    fn setup_parts(p_dl: f64, sigma2: f64) -> (SystemConfig, GroupingGrid, UeCodebook, SurfaceGeometry, SurfaceGeometry, PulseShape) {
        let mut sys = SystemConfig::desk_scale();
        sys.p_tx_dl = p_dl;
        sys.sigma_n2 = sigma2;
        let ris = SurfaceGeometry::cms(16.0 * sys.lambda, 16.0 * sys.lambda, sys.lambda).unwrap();
        let grid = group_cutoffs(4, 4, &ris).unwrap();
        let cb = UeCodebook::new(4, 4, sys.lambda).unwrap();
        let ue = SurfaceGeometry::half_wavelength_upa(4, 4, sys.lambda).unwrap();
        let shape = PulseShape::new(0.8, sys.t_s).unwrap();
        (sys, grid, cb, ris, ue, shape)
    }

    fn los_params(sys: &SystemConfig, seed: u64) -> RicianChannelParams {
        let pl = PathLossParams {
            g_tx: 1.0,
            g_ris: 1.0,
            g_rx: 1.0,
            s_eff: 1.0,
            s_ele: 1e-8,
            absorption_coeff: 0.0,
            d_ris_ue: 1.0,
        };
        let mut rng = substream(seed, &[]);
        let ue = UePosition::sample(&sys.geometry, &mut rng);
        let mut p = sample_rician(sys, &FadingConfig::los_only(), &pl, ue, &mut rng).unwrap();
        p.alpha = Complex64::new(1.0, 0.0);
        p.beta_los = Complex64::new(1.0, 0.0);
        assert_eq!(p.direction, LinkDirection::Downlink);
        p
    }

    #[test]
    fn noiseless_sweep_finds_the_oracle_cell() {
        let (sys, grid, cb, ris, ue, shape) = setup_parts(1.0, 0.0);
        let setup = DownlinkSetup {
            grid: &grid,
            codebook: &cb,
            ris: &ris,
            ue: &ue,
            bs_gain: Complex64::new(1.0, 0.0),
            shape: &shape,
            sys: &sys,
        };
        let mut hits = 0;
        for seed in 0..40 {
            let p = los_params(&sys, seed);
            let obs = simulate_downlink_sweep(&setup, &p, seed).unwrap();
            assert_eq!(obs.cells(), grid.pilot_count(&cb));
            let truth = oracle_index(&grid, &cb, p.mu_los, p.nu_los);
            if select_group(&obs).unwrap() == truth {
                hits += 1;
            }
        }
        // Misses only happen when μ sits within a fraction of a cell of a
        // group boundary or ν halfway between codewords.
        assert!(hits >= 36, "{hits}/40");
    }

    #[test]
    fn zero_power_gives_pure_noise_and_sweeps_are_deterministic() {
        let (sys, grid, cb, ris, ue, shape) = setup_parts(0.0, 1e-3);
        let setup = DownlinkSetup {
            grid: &grid,
            codebook: &cb,
            ris: &ris,
            ue: &ue,
            bs_gain: Complex64::new(1.0, 0.0),
            shape: &shape,
            sys: &sys,
        };
        let p = los_params(&sys, 4);
        let a = simulate_downlink_sweep(&setup, &p, 99).unwrap();
        let b = simulate_downlink_sweep(&setup, &p, 99).unwrap();
        assert_eq!(a, b);
        // With P = 0 the samples are exactly the per-cell noise streams.
        let cell = 5;
        let mut rng = substream(99, &[label::DOWNLINK_NOISE, cell as u64]);
        let want = complex_noise(sys.n_cp, 1e-3, &mut rng);
        assert_eq!(&a.y[cell * sys.n_cp..(cell + 1) * sys.n_cp], &want[..]);
        let power: f64 = a.y.iter().map(|v| v.norm_sqr()).sum::<f64>() / a.y.len() as f64;
        assert!((power / 1e-3 - 1.0).abs() < 0.1);
    }
}
