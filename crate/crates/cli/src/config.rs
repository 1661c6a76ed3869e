//! Experiment configuration: a flat `key = value` file plus command-line
//! overrides, resolved against the knobs a scenario declares.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key '=' value [comment]
//! key     := [a-z0-9_]+
//! ```
//!
//! Surrounding whitespace is trimmed. `scenario`, `seed` and `trials` are
//! reserved; every other key must be a knob of the selected scenario.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use holoris_core::ce_uplink::DscScheme;
use holoris_core::sim::SurfaceSpec;

use crate::scenarios::{knobs, Scenario};
use crate::{CliError, Result};

/// Master seed used when neither the file nor the command line sets one.
pub const DEFAULT_SEED: u64 = 1;

/// Parsed but unresolved configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`", i + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
                return Err(CliError::Config(format!("line {}: invalid key '{k}'", i + 1)));
            }
            if v.is_empty() {
                return Err(CliError::Config(format!("line {}: empty value for '{k}'", i + 1)));
            }
            if entries.iter().any(|(e, _)| e == k) {
                return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    /// Extra `key = value` pairs applied after the file.
    pub set: Vec<(String, String)>,
}

/// Fully resolved experiment: every knob of the scenario has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    pub values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn resolve(file: &ConfigFile, ov: &Overrides) -> Result<Self> {
        let from_file = file.get("scenario").map(Scenario::from_str).transpose()?;
        let scenario = match (ov.scenario, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!(
                    "scenario '{}' requested but the config file names '{}'",
                    a.name(),
                    b.name()
                )))
            }
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => return Err(CliError::Config("no scenario given".into())),
        };
        let seed = match ov.seed {
            Some(s) => s,
            None => file.get("seed").map(|v| parse_as::<u64>("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
        };
        let trials = match ov.trials {
            Some(t) => t,
            None => file.get("trials").map(|v| parse_as::<usize>("trials", v)).transpose()?.unwrap_or(scenario.default_trials()),
        };
        if trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }

        let mut set: BTreeMap<String, String> = BTreeMap::new();
        let reserved = ["scenario", "seed", "trials"];
        for (k, v) in file.entries.iter().chain(&ov.set) {
            if !reserved.contains(&k.as_str()) {
                set.insert(k.clone(), v.clone());
            }
        }
        let scale = match set.get("scale") {
            Some(s) => Scale::from_str(s)?,
            None => Scale::Desk,
        };
        let mut values: BTreeMap<String, String> =
            knobs(scenario, scale).into_iter().map(|k| (k.key.to_string(), k.default)).collect();
        for (k, v) in set {
            match values.get_mut(&k) {
                Some(slot) => *slot = v,
                None => {
                    return Err(CliError::Config(format!("unknown key '{k}' for scenario '{}'", scenario.name())))
                }
            }
        }
        let out = ov.out.clone().unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { scenario, seed, trials, out, values })
    }

    /// `# `-less header lines: version, scenario, seed, trials, then every
    /// knob in key order.
    pub fn echo(&self) -> Vec<String> {
        let mut lines = vec![
            format!("holoris {}", env!("CARGO_PKG_VERSION")),
            format!("scenario = {}", self.scenario.name()),
            format!("seed = {}", self.seed),
            format!("trials = {}", self.trials),
        ];
        lines.extend(self.values.iter().map(|(k, v)| format!("{k} = {v}")));
        lines
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Config(format!("scenario '{}' has no knob '{key}'", self.scenario.name())))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        parse_as(key, self.raw(key)?)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.raw(key)?;
        let items: Vec<T> = raw.split(',').map(|s| parse_as(key, s.trim())).collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(CliError::Config(format!("{key}: empty list")));
        }
        Ok(items)
    }

    pub fn surface(&self, key: &str) -> Result<SurfaceSpec> {
        parse_surface(self.raw(key)?)
    }

    pub fn surfaces(&self, key: &str) -> Result<Vec<SurfaceSpec>> {
        self.raw(key)?.split(',').map(|s| parse_surface(s.trim())).collect()
    }

    pub fn dsc(&self, key: &str) -> Result<DscScheme> {
        Ok(self.raw(key)?.parse()?)
    }
}

fn parse_as<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

/// Which preset supplies the defaults of the simulation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            _ => Err(CliError::Config(format!("scale: expected desk or full, got '{s}'"))),
        }
    }
}

/// `cms` or `dpa:<spacing in wavelengths>`.
pub fn parse_surface(s: &str) -> Result<SurfaceSpec> {
    if s == "cms" {
        return Ok(SurfaceSpec::Cms);
    }
    let spacing = s
        .strip_prefix("dpa:")
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| CliError::Config(format!("surface: expected cms or dpa:<spacing>, got '{s}'")))?;
    Ok(SurfaceSpec::Dpa { spacing })
}

pub fn surface_name(s: &SurfaceSpec) -> String {
    match s {
        SurfaceSpec::Cms => "cms".into(),
        SurfaceSpec::Dpa { spacing } => format!("dpa:{spacing}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_trailing_comments_are_ignored() {
        let f = ConfigFile::parse("# top\n\n n_x = 32  # cols\nscenario=beam_nbs\n").unwrap();
        assert_eq!(f.entries, vec![("n_x".into(), "32".into()), ("scenario".into(), "beam_nbs".into())]);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ConfigFile::parse("n_x 32").is_err());
        assert!(ConfigFile::parse("N_X = 32").is_err());
        assert!(ConfigFile::parse("n_x =").is_err());
        assert!(ConfigFile::parse("n_x = 1\nn_x = 2").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_per_scenario() {
        let f = ConfigFile::parse("scenario = beam_nbs\nn_pilots = 3").unwrap();
        let e = ExperimentConfig::resolve(&f, &Overrides::default()).unwrap_err();
        assert!(e.to_string().contains("unknown key 'n_pilots'"), "{e}");
    }

    #[test]
    fn command_line_beats_file() {
        let f = ConfigFile::parse("scenario = beam_nbs\nseed = 5\ntrials = 3").unwrap();
        let ov = Overrides { seed: Some(9), ..Default::default() };
        let c = ExperimentConfig::resolve(&f, &ov).unwrap();
        assert_eq!((c.seed, c.trials), (9, 3));
        let clash = Overrides { scenario: Some(Scenario::Ase), ..Default::default() };
        assert!(ExperimentConfig::resolve(&f, &clash).is_err());
    }

    #[test]
    fn echo_lists_every_knob_sorted() {
        let f = ConfigFile::parse("scenario = beam_nbs\nn_x = 8").unwrap();
        let c = ExperimentConfig::resolve(&f, &Overrides::default()).unwrap();
        let echo = c.echo();
        assert!(echo[0].starts_with("holoris "));
        let keys: Vec<&str> = echo[4..].iter().map(|l| l.split(" = ").next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(echo.contains(&"n_x = 8".to_string()));
    }

    #[test]
    fn surfaces_round_trip() {
        for s in ["cms", "dpa:0.5", "dpa:0.125"] {
            assert_eq!(surface_name(&parse_surface(s).unwrap()), s);
        }
        assert!(parse_surface("dpa:-1").is_err());
        assert!(parse_surface("ula").is_err());
    }
}
