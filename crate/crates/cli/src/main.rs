use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use holoris_cli::{list_scenarios, run, CliError, ConfigFile, ExperimentConfig, Overrides, Scenario};

/// Run a holoris experiment.
///
/// COMMAND is a scenario name, `run` (scenario taken from the config file)
/// or `list`.
#[derive(Debug, Parser)]
#[command(name = "holoris", version)]
struct Args {
    command: String,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Extra `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(args: Args) -> Result<Option<PathBuf>, CliError> {
    let scenario = match args.command.as_str() {
        "list" => {
            print!("{}", list_scenarios());
            return Ok(None);
        }
        "run" => None,
        name => Some(name.parse::<Scenario>()?),
    };
    let file = match &args.config {
        Some(p) => ConfigFile::parse(&std::fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    let set = args
        .set
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))
        })
        .collect::<Result<_, _>>()?;
    let ov = Overrides { scenario, seed: args.seed, trials: args.trials, out: Some(args.out), set };
    let cfg = ExperimentConfig::resolve(&file, &ov)?;
    run(&cfg).map(Some)
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(Some(path)) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holoris: {e}");
            ExitCode::FAILURE
        }
    }
}
