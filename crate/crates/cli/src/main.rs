//! `hetlb`: run, sweep and validate load-balancing scenarios.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetlb_core::experiment::{self, SweepParameter};
use hetlb_core::scenario::{ScenarioConfig, PRESETS};
use hetlb_core::{Error, SonVariant};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "hetlb", version, about = "Backhaul-aware load balancing in heterogeneous cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its time series.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Repeat a run over a list of parameter values.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// backhaul_capacity, epsilon or lambda.
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated values; `inf` is accepted.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in estimator and queue checks, and check a config if given.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the attachment map at the configured CIOs as CSV.
    MapDump {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory for `attachment_map.csv`; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario used when no --config is given.
    #[arg(long, default_value = "paper_table1")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    variant: Option<SonVariant>,
}

enum Failure {
    Config(String),
    Validation(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<(ScenarioConfig, u64), Failure> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::preset(&self.preset).ok_or_else(|| {
                Failure::Config(format!("unknown preset `{}` (available: {})", self.preset, PRESETS.join(", ")))
            })?,
        };
        if let Some(d) = self.duration {
            config.run.duration_s = d;
        }
        if let Some(v) = self.variant {
            config.son.variant = v;
        }
        if let Some(s) = self.seed {
            config.run.seed = s;
        }
        config
            .validate()
            .map_err(|(path, msg)| Failure::Config(format!("{}: {msg}", path.join("."))))?;
        let seed = config.run.seed;
        Ok((config, seed))
    }
}

fn run(scenario: &ScenarioArgs, out: &Path) -> Result<(), Failure> {
    let (config, seed) = scenario.resolve()?;
    let output = experiment::run(&config, seed)?;
    output.write_to(out)?;
    // Keep the exact scenario next to its outputs.
    fs::write(out.join("scenario.toml"), config.to_toml()).map_err(|e| io(out, e))?;
    let s = &output.summary;
    println!(
        "{} ({} SON, seed {seed}): {} windows, {} flows -> {}",
        s.scenario,
        s.variant.as_str(),
        s.windows,
        s.completed_flows,
        out.display()
    );
    for c in &s.cells {
        println!(
            "  cell {:>2} {:<5} cio {:>6.2} dB  scheduler {:.3}  global {:.3}  mean FTT {}",
            c.cell,
            c.kind.as_str(),
            c.final_cio_db,
            c.final_scheduler_load,
            c.final_global_load,
            c.mean_ftt_s.map_or_else(|| "n/a".to_string(), |f| format!("{f:.2} s"))
        );
    }
    Ok(())
}

fn sweep(scenario: &ScenarioArgs, param: SweepParameter, values: &[f64], out: &Path) -> Result<(), Failure> {
    let (config, seed) = scenario.resolve()?;
    let result = experiment::sweep(&config, param, values, seed)?;
    fs::create_dir_all(out).map_err(|e| io(out, e))?;
    for (k, p) in result.points.iter().enumerate() {
        p.output.write_to(&out.join(format!("{}-{k}", param.as_str())))?;
    }
    fs::write(out.join("sweep.csv"), result.table_csv()).map_err(|e| io(out, e))?;
    println!("{} runs over {} -> {}", result.points.len(), param.as_str(), out.join("sweep.csv").display());
    Ok(())
}

fn validate(config: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = config {
        let c = load_config(path)?;
        c.build().map_err(Error::from)?;
        println!("{}: ok", path.display());
    }
    let report = experiment::validate();
    print!("{report}");
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Validation(format!("check `{}` failed: {}", c.name, c.detail))),
    }
}

fn map_dump(scenario: &ScenarioArgs, out: Option<&Path>) -> Result<(), Failure> {
    let (config, _) = scenario.resolve()?;
    let csv = config.build().map_err(Error::from)?.map.to_csv();
    match out {
        None => print!("{csv}"),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            let path = dir.join("attachment_map.csv");
            fs::write(&path, csv).map_err(|e| io(&path, e))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out } => run(scenario, out),
        Command::Sweep { scenario, param, values, out } => sweep(scenario, *param, values, out),
        Command::Validate { config } => validate(config.as_deref()),
        Command::MapDump { scenario, out } => map_dump(scenario, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
