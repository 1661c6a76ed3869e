//! Uplink fine-grained channel estimation: search grid inside the selected
//! group, overlapped-NBS sensing at the RIS, dedicated-subcarrier (DSC)
//! allocation and assembly of Y = W H F_u + N.
//!
//! The search grid is indexed b = b_x·B_y + b_y (elevation fastest); this is
//! the row order of H and the column order of W.

use std::f64::consts::PI;
use std::io::{self, Write};

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::beampattern::{normalized_nbs, AngularPair, BeamPattern, SurfaceGeometry, SurfaceKind};
use crate::ce_downlink::GroupingGrid;
use crate::ce_downlink::complex_noise;
use crate::channel::{PulseShape, RicianChannelParams, SystemConfig};
use crate::error::{check_shape, domain, HolorisError, Result};
use crate::io::fmt_f64;
use crate::linalg::HouseholderQr;

/// Oversampling of the CMS map grid used to find max |Φ̃|.
pub const CMS_MAP_OVERSAMPLING: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSearchSpace {
    pub zeta_azi: Vec<f64>,
    pub zeta_ele: Vec<f64>,
}

impl UplinkSearchSpace {
    pub fn bx(&self) -> usize {
        self.zeta_azi.len()
    }
    pub fn by(&self) -> usize {
        self.zeta_ele.len()
    }
    pub fn len(&self) -> usize {
        self.bx() * self.by()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Grid point b = b_x·B_y + b_y.
    pub fn zeta(&self, b: usize) -> AngularPair {
        AngularPair::new(self.zeta_azi[b / self.by()], self.zeta_ele[b % self.by()])
    }
    pub fn points(&self) -> Vec<AngularPair> {
        (0..self.len()).map(|b| self.zeta(b)).collect()
    }
}

/// ζ_b = ψ_min + b·2π/A per axis for the group (g_x, g_y).
pub fn build_search_space(g_x: usize, g_y: usize, grid: &GroupingGrid) -> Result<UplinkSearchSpace> {
    if g_x >= grid.gx() || g_y >= grid.gy() {
        return domain(format!("group ({g_x}, {g_y}) outside the {}×{} grid", grid.gx(), grid.gy()));
    }
    let lo = grid.psi_min(g_x, g_y);
    let (ax, ay) = grid.aperture();
    let zeta_azi = (0..grid.bx()).map(|b| lo.azi + b as f64 * 2.0 * PI / ax).collect();
    let zeta_ele = (0..grid.by()).map(|b| lo.ele + b as f64 * 2.0 * PI / ay).collect();
    Ok(UplinkSearchSpace { zeta_azi, zeta_ele })
}

/// Index b maximizing |ĝ_NBS(μ, ψ^R; ζ_b)|, ties to the lowest.
pub fn exhaustive_scan(space: &UplinkSearchSpace, ris: &SurfaceGeometry, mu: AngularPair, psi_r: AngularPair) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for b in 0..space.len() {
        let v = normalized_nbs(*ris, space.zeta(b), psi_r).response(mu, psi_r).norm();
        if v > best.1 {
            best = (b, v);
        }
    }
    best.0
}

/// RIS configuration of one time slot: Φ̃ = c·(1/√B) Σ_b e^{jθ_b} Φ_NBS(ζ_b),
/// with c chosen so that max |Φ̃| = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlappedNbs {
    /// Renormalization c.
    pub scale: f64,
    /// Renormalized coefficients for a DPA (row-major N_x × N_y); empty for
    /// a CMS, whose map is only sampled to find c.
    pub coeffs: Vec<Complex64>,
}

/// Builds the overlapped-NBS map for phases `theta` (length B_xB_y).
pub fn overlapped_nbs(
    space: &UplinkSearchSpace,
    theta: &[f64],
    geom: &SurfaceGeometry,
    psi_r: AngularPair,
) -> Result<OverlappedNbs> {
    check_shape("phase count", space.len(), theta.len())?;
    let (bx, by) = (space.bx(), space.by());
    let amp = 1.0 / (space.len() as f64).sqrt();
    let th = Array2::from_shape_fn((bx, by), |(i, j)| Complex64::from_polar(amp, theta[i * by + j]));
    // Φ(x, y) = Σ Θ[bx,by] e^{j x k_bx} e^{j y l_by} = (E_x Θ E_y^T)(x, y).
    let (xs, ys, keep) = match geom.kind() {
        SurfaceKind::Dpa => {
            let d = geom.spacing();
            // 1-based element counter in the NBS phase ramp.
            let xs: Vec<f64> = (1..=geom.nx()).map(|m| m as f64 * d).collect();
            let ys: Vec<f64> = (1..=geom.ny()).map(|n| n as f64 * d).collect();
            (xs, ys, true)
        }
        SurfaceKind::Cms => {
            let sample = |a: f64, b: usize| {
                let n = CMS_MAP_OVERSAMPLING * b.max(1);
                (0..=n).map(|j| a * j as f64 / n as f64).collect::<Vec<_>>()
            };
            (sample(geom.ax(), bx), sample(geom.ay(), by), false)
        }
    };
    let ex = Array2::from_shape_fn((xs.len(), bx), |(m, b)| {
        Complex64::from_polar(1.0, xs[m] * (space.zeta_azi[b] - psi_r.azi))
    });
    let ey = Array2::from_shape_fn((ys.len(), by), |(n, b)| {
        Complex64::from_polar(1.0, ys[n] * (space.zeta_ele[b] - psi_r.ele))
    });
    let phi = ex.dot(&th).dot(&ey.t());
    let max = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(HolorisError::NonFinite("overlapped NBS map"));
    }
    let scale = 1.0 / max;
    let coeffs = if keep { phi.iter().map(|v| v * scale).collect() } else { Vec::new() };
    Ok(OverlappedNbs { scale, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DscScheme {
    Block,
    Uniform,
    Random,
}

impl DscScheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Block => "block",
            Self::Uniform => "uniform",
            Self::Random => "random",
        }
    }
}

impl std::str::FromStr for DscScheme {
    type Err = HolorisError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(Self::Block),
            "uniform" => Ok(Self::Uniform),
            "random" => Ok(Self::Random),
            _ => Err(HolorisError::Config(format!("unknown DSC scheme '{s}'"))),
        }
    }
}

/// Subcarrier sets 𝒦_u (0-based, ascending) for each UE.
#[derive(Debug, Clone, PartialEq)]
pub struct DscAllocation {
    pub scheme: DscScheme,
    pub sets: Vec<Vec<usize>>,
    pub n_used: usize,
}

/// Splits N_CP subcarriers into N_UE disjoint sets of N_CP/N_UE.
pub fn allocate_dsc<R: Rng + ?Sized>(scheme: DscScheme, n_cp: usize, n_ue: usize, rng: &mut R) -> Result<DscAllocation> {
    if n_ue == 0 || n_cp == 0 || n_cp % n_ue != 0 {
        return Err(HolorisError::Config(format!("N_UE = {n_ue} does not divide N_CP = {n_cp}")));
    }
    let n_used = n_cp / n_ue;
    let sets = match scheme {
        DscScheme::Block => (0..n_ue).map(|u| (u * n_used..(u + 1) * n_used).collect()).collect(),
        DscScheme::Uniform => (0..n_ue).map(|u| (u..n_cp).step_by(n_ue).collect()).collect(),
        DscScheme::Random => {
            let mut all: Vec<usize> = (0..n_cp).collect();
            all.shuffle(rng);
            all.chunks(n_used)
                .map(|c| {
                    let mut v = c.to_vec();
                    v.sort_unstable();
                    v
                })
                .collect()
        }
    };
    Ok(DscAllocation { scheme, sets, n_used })
}

/// Columns `cols` of the unitary N-point DFT matrix, F[d, k] = e^{−j2πdk/N}/√N.
pub fn partial_dft(n: usize, cols: &[usize]) -> Array2<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, cols.len()), |(d, j)| {
        Complex64::from_polar(s, -2.0 * PI * ((d * cols[j]) % n) as f64 / n as f64)
    })
}

/// Angular/delay-domain channel, B_xB_y × N_CP.
#[derive(Debug, Clone, PartialEq)]
pub struct AdDdChannel {
    pub h: Array2<Complex64>,
}

/// Surfaces and gains that shape the uplink channel of one UE.
pub struct UplinkLink<'a> {
    pub space: &'a UplinkSearchSpace,
    pub ris: &'a SurfaceGeometry,
    /// UE beam toward its downlink codeword, evaluated as `ue.response(ν, 0)`.
    pub ue: &'a dyn BeamPattern,
    pub bs_gain: Complex64,
    pub shape: &'a PulseShape,
    pub sys: &'a SystemConfig,
}

/// H[b, t] = Σ_paths α G^B gain ĝ^U(ν) ĝ_NBS(μ, ψ^R; ζ_b) p(t T_s − τ).
pub fn build_addd_channel(params: &RicianChannelParams, link: &UplinkLink<'_>) -> Result<AdDdChannel> {
    let n = link.sys.n_cp;
    let bb = link.space.len();
    let mut h = Array2::zeros((bb, n));
    let beams: Vec<_> = (0..bb).map(|b| normalized_nbs(*link.ris, link.space.zeta(b), params.psi_r)).collect();
    for path in params.paths() {
        let c = params.alpha * link.bs_gain * path.gain * link.ue.response(path.nu, AngularPair::ZERO);
        let pulse = link.shape.samples(n, path.tau);
        for (b, beam) in beams.iter().enumerate() {
            let g = c * beam.response(path.mu, params.psi_r);
            for (t, p) in pulse.iter().enumerate() {
                h[[b, t]] += g * *p;
            }
        }
    }
    if h.iter().any(|v: &Complex64| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(HolorisError::NonFinite("AdDd channel"));
    }
    Ok(AdDdChannel { h })
}

/// Random RIS configurations for N_P slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotConfigs {
    /// θ[i, b] ~ U[0, 2π).
    pub theta: Array2<f64>,
    /// Renormalization c_i of each slot's map.
    pub scales: Vec<f64>,
}

/// Draws θ row by row (slot i, then b) and computes each slot's c_i.
pub fn draw_slot_configs<R: Rng + ?Sized>(
    space: &UplinkSearchSpace,
    ris: &SurfaceGeometry,
    psi_r: AngularPair,
    n_p: usize,
    rng: &mut R,
) -> Result<SlotConfigs> {
    if n_p == 0 {
        return domain("N_P must be at least 1");
    }
    let bb = space.len();
    let theta = Array2::from_shape_fn((n_p, bb), |_| rng.random::<f64>() * 2.0 * PI);
    let mut scales = Vec::with_capacity(n_p);
    for row in theta.axis_iter(Axis(0)) {
        scales.push(overlapped_nbs(space, row.as_slice().expect("row-major"), ris, psi_r)?.scale);
    }
    Ok(SlotConfigs { theta, scales })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrices {
    /// W[i, b] = sqrt(P/N_used)·c_i·e^{jθ_{i,b}}/√(B_xB_y).
    pub w: Array2<Complex64>,
    pub f_u: Array2<Complex64>,
    pub theta: Array2<f64>,
    pub scales: Vec<f64>,
}

/// W and F_u for a UE transmitting `p_tx` over the subcarriers `set`.
pub fn sensing_matrices(slots: &SlotConfigs, set: &[usize], n_cp: usize, p_tx: f64) -> Result<SensingMatrices> {
    if set.is_empty() || set.iter().any(|&k| k >= n_cp) {
        return domain("subcarrier set empty or out of range");
    }
    let bb = slots.theta.ncols();
    let amp = (p_tx / set.len() as f64).sqrt() / (bb as f64).sqrt();
    let w = Array2::from_shape_fn(slots.theta.dim(), |(i, b)| {
        Complex64::from_polar(amp * slots.scales[i], slots.theta[[i, b]])
    });
    Ok(SensingMatrices { w, f_u: partial_dft(n_cp, set), theta: slots.theta.clone(), scales: slots.scales.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub y: Array2<Complex64>,
    pub noise: Array2<Complex64>,
}

/// Y = W H F_u + N with N ~ CN(0, σ_n²) drawn row by row.
pub fn build_measurements<R: Rng + ?Sized>(
    h: &AdDdChannel,
    sensing: &SensingMatrices,
    sigma_n2: f64,
    rng: &mut R,
) -> Result<MeasurementSet> {
    check_shape("W columns vs H rows", sensing.w.ncols(), h.h.nrows())?;
    check_shape("H columns vs F_u rows", h.h.ncols(), sensing.f_u.nrows())?;
    let clean = sensing.w.dot(&h.h).dot(&sensing.f_u);
    let (r, c) = clean.dim();
    let noise = Array2::from_shape_vec((r, c), complex_noise(r * c, sigma_n2, rng)).expect("sized");
    Ok(MeasurementSet { y: &clean + &noise, noise })
}

/// Least-squares baseline for a UE that owns `W.nrows()` slots on all N_CP
/// subcarriers: Ĥ = W^+ Y F^H with F the full unitary DFT.
pub fn ls_baseline(w: &Array2<Complex64>, y: &Array2<Complex64>, f: &Array2<Complex64>) -> Result<AdDdChannel> {
    let (np, bb) = w.dim();
    let (n_cp, n_used) = f.dim();
    if np < bb {
        return Err(HolorisError::Underdetermined { rows: np, cols: bb });
    }
    if n_used < n_cp {
        return Err(HolorisError::Underdetermined { rows: n_used, cols: n_cp });
    }
    check_shape("Y rows", np, y.nrows())?;
    check_shape("Y columns", n_used, y.ncols())?;
    let (x, _) = HouseholderQr::new(w.view())?.solve(y.view(), "LS baseline")?;
    // X ≈ H F, and F F^H = I when F is square unitary; the general
    // overdetermined case solves H F = X in the least-squares sense.
    let fh = f.t().mapv(|v| v.conj());
    if n_used == n_cp {
        return Ok(AdDdChannel { h: x.dot(&fh) });
    }
    let (ht, _) = HouseholderQr::new(f.t().view())?.solve(x.t().view(), "LS baseline delay")?;
    Ok(AdDdChannel { h: ht.t().to_owned() })
}

/// Writes `# name rows cols` followed by `row,col,re,im` lines.
pub fn write_matrix_csv<W: Write>(w: &mut W, name: &str, m: &Array2<Complex64>) -> io::Result<()> {
    writeln!(w, "# {name} {} {}", m.nrows(), m.ncols())?;
    writeln!(w, "row,col,re,im")?;
    for ((r, c), v) in m.indexed_iter() {
        writeln!(w, "{r},{c},{},{}", fmt_f64(v.re), fmt_f64(v.im))?;
    }
    Ok(())
}
