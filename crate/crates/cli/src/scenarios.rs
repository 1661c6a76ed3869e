//! Scenario registry and runners. Each runner returns the complete CSV
//! (echo header included) as bytes.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use holoris_core::beampattern::{
    beam_pattern_dpa, cms_nbs_pattern, cms_sbf_pattern, nbs_cms_deviation, nbs_coefficients, nbs_pattern,
    quantize_phases, sbf_coefficients, sbf_separable, AngularPair, PatternGrid, QuantizerConfig, SurfaceGeometry,
};
use holoris_core::channel::config::{dbm_to_watt, watt_to_dbm, NOISE_PSD_DBM_HZ, SPEED_OF_LIGHT};
use holoris_core::channel::fading::FadingConfig;
use holoris_core::io::{fmt_f64, write_comments};
use holoris_core::metrics::{binomial_ci, grouping_failure_prob, mean_ci, uplink_multiplications, write_sweep_csv, SweepPoint};
use holoris_core::sim::{run_trials, SimConfig, SurfaceSpec, Testbed};
use holoris_core::HolorisError;
use num_complex::Complex64;

use crate::config::{surface_name, ExperimentConfig, Scale};
use crate::{CliError, Result};

/// Carrier used by the beam-pattern scenarios; patterns in normalized
/// coordinates do not depend on it.
const BEAM_F_C: f64 = 150e9;

/// CSV header of the downlink grouping-failure sweep.
pub const DOWNLINK_CSV_HEADER: &str = "series,ptx_dbm,groups,failure_prob,ci_halfwidth,trials";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    BeamNbs,
    BeamSbf,
    CmsConvergence,
    DownlinkFailure,
    OverheadTradeoff,
    UplinkNmseVsPilots,
    UplinkNmseVsUes,
    UplinkNmseVsPower,
    Ase,
    Quantization,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Self::BeamNbs,
        Self::BeamSbf,
        Self::CmsConvergence,
        Self::DownlinkFailure,
        Self::OverheadTradeoff,
        Self::UplinkNmseVsPilots,
        Self::UplinkNmseVsUes,
        Self::UplinkNmseVsPower,
        Self::Ase,
        Self::Quantization,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::BeamNbs => "beam_nbs",
            Self::BeamSbf => "beam_sbf",
            Self::CmsConvergence => "cms_convergence",
            Self::DownlinkFailure => "downlink_failure",
            Self::OverheadTradeoff => "overhead_tradeoff",
            Self::UplinkNmseVsPilots => "uplink_nmse_vs_pilots",
            Self::UplinkNmseVsUes => "uplink_nmse_vs_ues",
            Self::UplinkNmseVsPower => "uplink_nmse_vs_power",
            Self::Ase => "ase",
            Self::Quantization => "quantization",
        }
    }

    /// The figure the scenario regenerates.
    pub fn figure(&self) -> &'static str {
        match self {
            Self::BeamNbs => "NBS beam pattern of a 64x64 half-wavelength array steered to (0.6, -0.2)",
            Self::BeamSbf => "SBF beam pattern with passband [-0.2, 0.2] x [0.2, 0.6]",
            Self::CmsConvergence => "DPA NBS pattern converging to the CMS sinc pattern as spacing shrinks",
            Self::DownlinkFailure => "grouping-failure probability versus downlink power",
            Self::OverheadTradeoff => "pilot overhead and search complexity versus group count",
            Self::UplinkNmseVsPilots => "uplink NMSE versus pilot count for each DSC scheme",
            Self::UplinkNmseVsUes => "uplink NMSE versus number of UEs",
            Self::UplinkNmseVsPower => "uplink NMSE versus uplink power, OMP against the LS baseline",
            Self::Ase => "average spectral efficiency versus power with estimated, LS and perfect CSI",
            Self::Quantization => "average spectral efficiency versus power for quantized phase shifters",
        }
    }

    pub fn default_trials(&self) -> usize {
        match self {
            Self::BeamNbs | Self::BeamSbf | Self::CmsConvergence => 1,
            Self::OverheadTradeoff => 10,
            Self::Ase => 100,
            _ => 50,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario '{s}'")))
    }
}

/// A configuration key with its default.
#[derive(Debug, Clone, PartialEq)]
pub struct Knob {
    pub key: &'static str,
    pub default: String,
}

fn knob(key: &'static str, default: impl fmt::Display) -> Knob {
    Knob { key, default: default.to_string() }
}

/// Rounds away binary noise from dB conversions so defaults echo cleanly.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn preset(scale: Scale) -> SimConfig {
    match scale {
        Scale::Desk => SimConfig::desk_scale(),
        Scale::Full => SimConfig::full_scale(),
    }
}

fn sim_knobs(c: &SimConfig, scale: Scale, skip: &[&str]) -> Vec<Knob> {
    let s = &c.sys;
    let all = vec![
        knob("scale", if scale == Scale::Desk { "desk" } else { "full" }),
        knob("f_c", s.f_c),
        knob("t_s", s.t_s),
        knob("n_cp", s.n_cp),
        knob("k", s.k),
        knob("m_b_x", s.m_b.0),
        knob("m_b_y", s.m_b.1),
        knob("m_u_x", s.m_u.0),
        knob("m_u_y", s.m_u.1),
        knob("p_tx_dl_dbm", tidy(watt_to_dbm(s.p_tx_dl))),
        knob("p_tx_ul_dbm", tidy(watt_to_dbm(s.p_tx_ul))),
        knob("noise_psd_dbm_hz", NOISE_PSD_DBM_HZ),
        knob("r", tidy(s.geometry.r)),
        knob("h1", tidy(s.geometry.h1)),
        knob("h2", tidy(s.geometry.h2)),
        knob("aperture", c.aperture),
        knob("surface", surface_name(&c.surface)),
        knob("s_ele", c.s_ele),
        knob("absorption_coeff", c.absorption_coeff),
        knob("nlos_paths", c.fading.l),
        knob("k_f_db", tidy(10.0 * c.fading.k_f.log10())),
        knob("rolloff", c.rolloff),
        knob("groups_x", c.groups.0),
        knob("groups_y", c.groups.1),
        knob("n_p", c.n_p),
        knob("n_ue", c.n_ue),
        knob("n_max", c.n_max),
        knob("omp_residual_tol", c.omp_residual_tol),
        knob("dsc", c.dsc.name()),
        knob("t_coh", c.t_coh),
        knob("gain_quad", c.gain_quad),
    ];
    all.into_iter().filter(|k| !skip.contains(&k.key)).collect()
}

fn beam_knobs() -> Vec<Knob> {
    vec![
        knob("n_x", 64),
        knob("n_y", 64),
        knob("spacing", 0.5),
        knob("surface", "dpa"),
        knob("in_azi", 0.0),
        knob("in_ele", 0.0),
        knob("grid_points", 256),
        knob("bits", 0),
    ]
}

fn list_knob(key: &'static str, xs: &[&str]) -> Knob {
    knob(key, xs.join(","))
}

const POWERS_20_70: [&str; 11] = ["20", "25", "30", "35", "40", "45", "50", "55", "60", "65", "70"];
const POWERS_0_60: [&str; 7] = ["0", "10", "20", "30", "40", "50", "60"];
const POWERS_20_80: [&str; 7] = ["20", "30", "40", "50", "60", "70", "80"];
const SURFACE_SWEEP: [&str; 3] = ["dpa:0.5", "dpa:0.125", "cms"];

/// Every knob of `scenario` with its default under `scale`.
pub fn knobs(scenario: Scenario, scale: Scale) -> Vec<Knob> {
    let mut c = preset(scale);
    match scenario {
        Scenario::BeamNbs => {
            let mut k = beam_knobs();
            k.extend([knob("opt_azi", 0.6), knob("opt_ele", -0.2)]);
            k
        }
        Scenario::BeamSbf => {
            let mut k = beam_knobs();
            k.extend([
                knob("min_azi", -0.2),
                knob("min_ele", 0.2),
                knob("max_azi", 0.2),
                knob("max_ele", 0.6),
                knob("quad_points", 128),
            ]);
            k
        }
        Scenario::CmsConvergence => vec![
            knob("aperture", 16.0),
            list_knob("spacings", &["0.5", "0.25", "0.125", "0.0625"]),
            knob("opt_azi", 0.6),
            knob("opt_ele", -0.2),
            knob("grid_points", 101),
        ],
        Scenario::DownlinkFailure => {
            let mut k = sim_knobs(&c, scale, &["surface", "p_tx_dl_dbm"]);
            k.extend([list_knob("powers_dbm", &POWERS_20_70), list_knob("surfaces", &SURFACE_SWEEP)]);
            k
        }
        Scenario::OverheadTradeoff => {
            let mut k = sim_knobs(&c, scale, &["groups_x", "groups_y"]);
            k.push(list_knob("group_counts", &["1", "2", "4", "8", "16", "32"]));
            k
        }
        Scenario::UplinkNmseVsPilots => {
            let mut k = sim_knobs(&c, scale, &["n_p", "dsc"]);
            k.extend([
                list_knob("pilots", &["8", "16", "24", "32", "40", "48", "56", "64"]),
                list_knob("schemes", &["random", "block", "uniform"]),
            ]);
            k
        }
        Scenario::UplinkNmseVsUes => {
            let mut k = sim_knobs(&c, scale, &["n_ue"]);
            k.push(list_knob("ues", &["1", "2", "4", "8", "16"]));
            k
        }
        Scenario::UplinkNmseVsPower => {
            c.surface = SurfaceSpec::Cms;
            let mut k = sim_knobs(&c, scale, &["p_tx_ul_dbm", "n_p"]);
            k.extend([list_knob("powers_dbm", &POWERS_20_80), list_knob("pilots", &["40", "80"])]);
            k
        }
        Scenario::Ase => {
            let mut k = sim_knobs(&c, scale, &["surface", "p_tx_ul_dbm"]);
            k.extend([list_knob("powers_dbm", &POWERS_0_60), list_knob("surfaces", &SURFACE_SWEEP)]);
            k
        }
        Scenario::Quantization => {
            c.surface = SurfaceSpec::Dpa { spacing: 0.25 };
            let mut k = sim_knobs(&c, scale, &["p_tx_ul_dbm"]);
            k.extend([list_knob("powers_dbm", &POWERS_0_60), list_knob("bits_list", &["1", "2", "3", "inf"])]);
            k
        }
    }
}

/// Human-readable registry: one block per scenario with its figure and knobs.
pub fn list_scenarios() -> String {
    let mut s = String::new();
    for sc in Scenario::ALL {
        let keys: Vec<&str> = knobs(sc, Scale::Desk).iter().map(|k| k.key).collect();
        s.push_str(&format!("{:<22} {}\n", sc.name(), sc.figure()));
        s.push_str(&format!("{:<22} knobs: {}\n", "", keys.join(" ")));
    }
    s
}

/// Runs the scenario and returns the CSV bytes.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    match cfg.scenario {
        Scenario::BeamNbs => beam_nbs(cfg),
        Scenario::BeamSbf => beam_sbf(cfg),
        Scenario::CmsConvergence => cms_convergence(cfg),
        Scenario::DownlinkFailure => downlink_failure(cfg),
        Scenario::OverheadTradeoff => overhead_tradeoff(cfg),
        Scenario::UplinkNmseVsPilots => uplink_vs_pilots(cfg),
        Scenario::UplinkNmseVsUes => uplink_vs_ues(cfg),
        Scenario::UplinkNmseVsPower => uplink_vs_power(cfg),
        Scenario::Ase => ase_sweep(cfg),
        Scenario::Quantization => quantization(cfg),
    }
}

/// Builds the simulation setup from the simulation knobs present in `cfg`.
pub fn sim_config(cfg: &ExperimentConfig) -> Result<SimConfig> {
    let has = |k: &str| cfg.values.contains_key(k);
    let mut c = preset(cfg.get::<Scale>("scale")?);
    let s = &mut c.sys;
    s.set_carrier(cfg.get("f_c")?);
    s.t_s = cfg.get("t_s")?;
    s.n_cp = cfg.get("n_cp")?;
    s.k = cfg.get("k")?;
    s.m_b = (cfg.get("m_b_x")?, cfg.get("m_b_y")?);
    s.m_u = (cfg.get("m_u_x")?, cfg.get("m_u_y")?);
    if has("p_tx_dl_dbm") {
        s.p_tx_dl = dbm_to_watt(cfg.get("p_tx_dl_dbm")?);
    }
    if has("p_tx_ul_dbm") {
        s.p_tx_ul = dbm_to_watt(cfg.get("p_tx_ul_dbm")?);
    }
    s.noise_from_psd(cfg.get("noise_psd_dbm_hz")?);
    s.geometry.r = cfg.get("r")?;
    s.geometry.h1 = cfg.get("h1")?;
    s.geometry.h2 = cfg.get("h2")?;
    c.aperture = cfg.get("aperture")?;
    if has("surface") {
        c.surface = cfg.surface("surface")?;
    }
    c.s_ele = cfg.get("s_ele")?;
    c.absorption_coeff = cfg.get("absorption_coeff")?;
    c.fading = FadingConfig::from_db(cfg.get("nlos_paths")?, cfg.get("k_f_db")?);
    c.rolloff = cfg.get("rolloff")?;
    if has("groups_x") {
        c.groups = (cfg.get("groups_x")?, cfg.get("groups_y")?);
    }
    if has("n_p") {
        c.n_p = cfg.get("n_p")?;
    }
    if has("n_ue") {
        c.n_ue = cfg.get("n_ue")?;
    }
    c.n_max = cfg.get("n_max")?;
    c.omp_residual_tol = cfg.get("omp_residual_tol")?;
    if has("dsc") {
        c.dsc = cfg.dsc("dsc")?;
    }
    c.t_coh = cfg.get("t_coh")?;
    c.gain_quad = cfg.get("gain_quad")?;
    Ok(c)
}

fn pattern_csv(cfg: &ExperimentConfig, grid: &PatternGrid) -> Result<Vec<u8>> {
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(HolorisError::NonFinite("pattern grid").into());
    }
    let mut out = Vec::new();
    write_comments(&mut out, &cfg.echo())?;
    grid.peak_normalized().write_csv(&mut out)?;
    Ok(out)
}

fn sweep_csv(cfg: &ExperimentConfig, points: &[SweepPoint]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &cfg.echo(), points)?;
    Ok(out)
}

/// Failed evaluations become NaN so the grid check reports them.
fn or_nan(r: holoris_core::Result<Complex64>) -> Complex64 {
    r.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

struct BeamSetup {
    lambda: f64,
    n: usize,
    geom: SurfaceGeometry,
    cms: bool,
    psi_in: AngularPair,
    quantizer: Option<QuantizerConfig>,
}

fn beam_setup(cfg: &ExperimentConfig) -> Result<BeamSetup> {
    let lambda = SPEED_OF_LIGHT / BEAM_F_C;
    let d = cfg.get::<f64>("spacing")? * lambda;
    let geom = SurfaceGeometry::dpa(cfg.get("n_x")?, cfg.get("n_y")?, d, lambda)?;
    let cms = match cfg.get::<String>("surface")?.as_str() {
        "dpa" => false,
        "cms" => true,
        other => return Err(CliError::Config(format!("surface: expected dpa or cms, got '{other}'"))),
    };
    let bits: u32 = cfg.get("bits")?;
    if cms && bits > 0 {
        return Err(CliError::Config("bits: phase quantization needs surface = dpa".into()));
    }
    let quantizer = if bits > 0 { Some(QuantizerConfig::bits(bits)?) } else { None };
    let psi_in = AngularPair::from_normalized(lambda, cfg.get("in_azi")?, cfg.get("in_ele")?);
    Ok(BeamSetup { lambda, n: cfg.get("grid_points")?, geom, cms, psi_in, quantizer })
}

fn beam_nbs(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let b = beam_setup(cfg)?;
    let opt = AngularPair::from_normalized(b.lambda, cfg.get("opt_azi")?, cfg.get("opt_ele")?);
    let (g, inc) = (&b.geom, b.psi_in);
    let grid = if b.cms {
        let (ax, ay) = (g.nx() as f64 * g.spacing(), g.ny() as f64 * g.spacing());
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(cms_nbs_pattern(ax, ay, p, inc, opt)))
    } else if let Some(q) = b.quantizer {
        let map = quantize_phases(&nbs_coefficients(g, opt, inc)?, q);
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(beam_pattern_dpa(&map, g, p, inc)))
    } else {
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(nbs_pattern(g, p, inc, opt)))
    };
    pattern_csv(cfg, &grid)
}

fn beam_sbf(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let b = beam_setup(cfg)?;
    let lo = AngularPair::from_normalized(b.lambda, cfg.get("min_azi")?, cfg.get("min_ele")?);
    let hi = AngularPair::from_normalized(b.lambda, cfg.get("max_azi")?, cfg.get("max_ele")?);
    let (g, inc) = (&b.geom, b.psi_in);
    let grid = if b.cms {
        let (ax, ay) = (g.nx() as f64 * g.spacing(), g.ny() as f64 * g.spacing());
        let quad: usize = cfg.get("quad_points")?;
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(cms_sbf_pattern(ax, ay, p, inc, lo, hi, quad)))
    } else if let Some(q) = b.quantizer {
        let map = quantize_phases(&sbf_coefficients(g, lo, hi, inc)?, q);
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(beam_pattern_dpa(&map, g, p, inc)))
    } else {
        let map = sbf_separable(g, lo, hi, inc)?;
        PatternGrid::evaluate(b.n, b.lambda, |p| or_nan(map.pattern(g, p, inc)))
    };
    pattern_csv(cfg, &grid)
}

fn cms_convergence(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let lambda = SPEED_OF_LIGHT / BEAM_F_C;
    let aperture = cfg.get::<f64>("aperture")? * lambda;
    let opt = AngularPair::from_normalized(lambda, cfg.get("opt_azi")?, cfg.get("opt_ele")?);
    let n: usize = cfg.get("grid_points")?;
    let mut points = Vec::new();
    for d in cfg.list::<f64>("spacings")? {
        let dev = nbs_cms_deviation(aperture, d * lambda, lambda, opt, n)?;
        points.push(SweepPoint { series: "max_deviation".into(), x: d, metric: dev, ci: 0.0, trials: 1 });
    }
    sweep_csv(cfg, &points)
}

fn mean_point(series: String, x: f64, vals: &[f64]) -> Result<SweepPoint> {
    let (m, ci) = mean_ci(vals)?;
    Ok(SweepPoint { series, x, metric: m, ci, trials: vals.len() })
}

fn with_surface(base: &SimConfig, s: SurfaceSpec) -> SimConfig {
    SimConfig { surface: s, ..base.clone() }
}

fn downlink_failure(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let base = sim_config(cfg)?;
    let powers: Vec<f64> = cfg.list("powers_dbm")?;
    let mut out = Vec::new();
    write_comments(&mut out, &cfg.echo())?;
    writeln!(out, "{DOWNLINK_CSV_HEADER}")?;
    for s in cfg.surfaces("surfaces")? {
        let mut tb = Testbed::new(&with_surface(&base, s))?;
        for &p in &powers {
            tb.cfg.sys.p_tx_dl = dbm_to_watt(p);
            let fails = run_trials(cfg.seed, cfg.trials, |t| tb.downlink_failure(t))?;
            let prob = grouping_failure_prob(&fails)?;
            writeln!(
                out,
                "{},{},{}x{},{},{},{}",
                surface_name(&s),
                fmt_f64(p),
                base.groups.0,
                base.groups.1,
                fmt_f64(prob),
                fmt_f64(binomial_ci(prob, fails.len())),
                fails.len()
            )?;
        }
    }
    Ok(out)
}

fn overhead_tradeoff(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let base = sim_config(cfg)?;
    let mut points = Vec::new();
    for g in cfg.list::<usize>("group_counts")? {
        let tb = Testbed::new(&SimConfig { groups: (g, g), ..base.clone() })?;
        let rep = tb.overhead(base.n_p);
        let x = g as f64;
        let fixed = |name: &str, v: f64| SweepPoint { series: name.into(), x, metric: v, ci: 0.0, trials: 1 };
        points.push(fixed("t_dl_s", rep.t_dl));
        points.push(fixed("t_ul_s", rep.t_ul));
        points.push(fixed("t_total_s", rep.t_total));
        points.push(fixed("overhead_fraction", rep.t_total / base.t_coh));
        points.push(fixed("downlink_search_ops", rep.downlink_search_ops as f64));
        let mults = run_trials(cfg.seed, cfg.trials, |t| {
            let (_, tel) = tb.uplink_nmse(t)?;
            Ok(uplink_multiplications(&tel) as f64 / base.n_ue as f64)
        })?;
        points.push(mean_point("uplink_mults".into(), x, &mults)?);
    }
    sweep_csv(cfg, &points)
}

fn nmse_trials(tb: &Testbed, cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    Ok(run_trials(cfg.seed, cfg.trials, |t| Ok(tb.uplink_nmse(t)?.0))?)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// NMSE sweeps report the mean in dB with the CI of the linear mean mapped
/// to a symmetric dB half-width.
fn nmse_point(series: String, x: f64, vals: &[f64]) -> Result<SweepPoint> {
    let (m, ci) = mean_ci(vals)?;
    let half = if ci < m { (db(m + ci) - db(m - ci)) / 2.0 } else { f64::INFINITY };
    Ok(SweepPoint { series, x, metric: db(m), ci: half, trials: vals.len() })
}

fn uplink_vs_pilots(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let mut tb = Testbed::new(&sim_config(cfg)?)?;
    let mut points = Vec::new();
    for scheme in cfg.list::<String>("schemes")? {
        tb.cfg.dsc = scheme.parse()?;
        for n_p in cfg.list::<usize>("pilots")? {
            tb.cfg.n_p = n_p;
            points.push(nmse_point(format!("omp_{scheme}"), n_p as f64, &nmse_trials(&tb, cfg)?)?);
        }
    }
    sweep_csv(cfg, &points)
}

fn uplink_vs_ues(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let base = sim_config(cfg)?;
    let mut points = Vec::new();
    for n_ue in cfg.list::<usize>("ues")? {
        let tb = Testbed::new(&SimConfig { n_ue, ..base.clone() })?;
        points.push(nmse_point("omp".into(), n_ue as f64, &nmse_trials(&tb, cfg)?)?);
    }
    sweep_csv(cfg, &points)
}

fn uplink_vs_power(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let mut tb = Testbed::new(&sim_config(cfg)?)?;
    let pilots: Vec<usize> = cfg.list("pilots")?;
    let mut points = Vec::new();
    for p in cfg.list::<f64>("powers_dbm")? {
        tb.cfg.sys.p_tx_ul = dbm_to_watt(p);
        for &n_p in &pilots {
            tb.cfg.n_p = n_p;
            points.push(nmse_point(format!("omp_np{n_p}"), p, &nmse_trials(&tb, cfg)?)?);
        }
        let ls = run_trials(cfg.seed, cfg.trials, |t| tb.ls_nmse(t))?;
        points.push(nmse_point("ls".into(), p, &ls)?);
    }
    sweep_csv(cfg, &points)
}

fn ase_sweep(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let base = sim_config(cfg)?;
    let powers: Vec<f64> = cfg.list("powers_dbm")?;
    let mut points = Vec::new();
    for s in cfg.surfaces("surfaces")? {
        let mut tb = Testbed::new(&with_surface(&base, s))?;
        let name = surface_name(&s);
        for &p in &powers {
            tb.cfg.sys.p_tx_ul = dbm_to_watt(p);
            let runs = run_trials(cfg.seed, cfg.trials, |t| tb.ase_trial(t))?;
            let col = |f: fn(&holoris_core::sim::AseOutcome) -> f64| runs.iter().map(f).collect::<Vec<_>>();
            points.push(mean_point(format!("{name}_estimated"), p, &col(|o| o.estimated))?);
            points.push(mean_point(format!("{name}_ls"), p, &col(|o| o.ls))?);
            points.push(mean_point(format!("{name}_bound"), p, &col(|o| o.bound))?);
        }
    }
    sweep_csv(cfg, &points)
}

fn parse_bits(s: &str) -> Result<Option<u32>> {
    match s {
        "inf" => Ok(None),
        _ => s
            .parse::<u32>()
            .ok()
            .filter(|b| *b > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("bits_list: expected a positive integer or inf, got '{s}'"))),
    }
}

fn quantization(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let mut tb = Testbed::new(&sim_config(cfg)?)?;
    let bits: Vec<Option<u32>> = cfg.list::<String>("bits_list")?.iter().map(|s| parse_bits(s)).collect::<Result<_>>()?;
    let mut points = Vec::new();
    for b in bits {
        let series = b.map_or("bits_inf".to_string(), |b| format!("bits_{b}"));
        for p in cfg.list::<f64>("powers_dbm")? {
            tb.cfg.sys.p_tx_ul = dbm_to_watt(p);
            let v = run_trials(cfg.seed, cfg.trials, |t| tb.quantized_ase(t, b))?;
            points.push(mean_point(series.clone(), p, &v)?);
        }
    }
    sweep_csv(cfg, &points)
}
