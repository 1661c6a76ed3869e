use holoris_core::channel::fading::FadingConfig;
use holoris_core::metrics::nmse;
use holoris_core::sim::{run_trials, SimConfig, Testbed};

fn quick() -> SimConfig {
    SimConfig { gain_quad: 64, ..SimConfig::desk_scale() }
}

#[test]
fn noiseless_ls_recovers_every_ue_channel() {
    let mut tb = Testbed::new(&quick()).unwrap();
    tb.cfg.sys.sigma_n2 = 0.0;
    for seed in 0..3 {
        let ues = tb.draw_group(seed).unwrap();
        let group = tb.grid.oracle_group(ues[0].mu_los);
        let cws: Vec<_> = ues.iter().map(|p| tb.codebook.nearest(p.nu_los)).collect();
        let (truth, est, n_p) = tb.ls(seed, &ues, group, &cws).unwrap();
        assert_eq!(n_p, 64 * 4);
        for (t, e) in truth.iter().zip(&est) {
            assert!(nmse(&e.h, &t.h).unwrap() < 1e-20);
        }
    }
}

#[test]
fn noiseless_los_downlink_finds_the_oracle_group() {
    let mut tb = Testbed::new(&SimConfig { fading: FadingConfig::los_only(), ..quick() }).unwrap();
    tb.cfg.sys.sigma_n2 = 0.0;
    for seed in 0..20 {
        assert!(!tb.downlink_failure(seed).unwrap(), "seed {seed}");
    }
}

#[test]
fn more_pilots_do_not_hurt_on_average() {
    let mut tb = Testbed::new(&quick()).unwrap();
    let mean = |tb: &Testbed| {
        let v = run_trials(11, 12, |s| Ok(tb.uplink_nmse(s)?.0)).unwrap();
        v.iter().sum::<f64>() / v.len() as f64
    };
    tb.cfg.n_p = 8;
    let few = mean(&tb);
    tb.cfg.n_p = 64;
    let many = mean(&tb);
    assert!(many < few, "N_P=64 gives {many}, N_P=8 gives {few}");
}

#[test]
fn trial_results_depend_only_on_the_master_seed() {
    let tb = Testbed::new(&quick()).unwrap();
    let a = run_trials(5, 4, |s| tb.downlink_failure(s)).unwrap();
    let b = run_trials(5, 4, |s| tb.downlink_failure(s)).unwrap();
    assert_eq!(a, b);
}
