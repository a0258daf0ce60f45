use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pla_delay_cli::commands::{self, RunOptions};
use pla_delay_cli::config::{parse_set, ScenarioFile, Sweep};
use pla_delay_cli::error::{error_list_json, CliError, ErrorRecord, Result};

/// Detection and delay-bound analysis of physical layer authentication.
#[derive(Parser)]
#[command(name = "pla-delay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the grid deployment as TOML.
    Deployment(Common),
    /// Detection rates and bounds for an impersonating attacker.
    Detect(Common),
    /// Delay guarantees and bounds, optionally with a simulated overlay.
    Delay(Common),
    /// Simulate the tagged link and compare with the bound.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML); defaults apply when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// var=start:stop:steps[:log]
    #[arg(long)]
    sweep: Option<String>,
    /// Worker threads for sweeps and Monte Carlo.
    #[arg(long)]
    threads: Option<usize>,
    /// key=value override, repeatable.
    #[arg(long = "set")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(errors) if errors.is_empty() => ExitCode::SUCCESS,
        Ok(errors) => {
            eprintln!("{}", error_list_json(&errors));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{}", error_list_json(&[ErrorRecord::new(&e, None)]));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Vec<ErrorRecord>> {
    let (cmd, common) = match cli.command {
        Command::Deployment(c) => ("deployment", c),
        Command::Detect(c) => ("detect", c),
        Command::Delay(c) => ("delay", c),
        Command::Simulate(c) => ("simulate", c),
    };
    if let Some(n) = common.threads {
        set_threads(n)?;
    }
    let scenario = match &common.scenario {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::default(),
    };
    let opts = RunOptions {
        sets: common.sets.iter().map(|s| parse_set(s)).collect::<Result<_>>()?,
        sweep: common.sweep.as_deref().map(Sweep::parse).transpose()?,
        seed: common.seed,
    };
    let mut out: Box<dyn Write> = match &common.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let io_err = |e| CliError::io(common.out.as_deref().unwrap_or("-".as_ref()), e);
    let outcome = match cmd {
        "deployment" => {
            let text = commands::deployment(&scenario, &opts)?;
            out.write_all(text.as_bytes()).map_err(io_err)?;
            return Ok(Vec::new());
        }
        "detect" => commands::detect(&scenario, &opts)?,
        "delay" => commands::delay(&scenario, &opts)?,
        _ => commands::simulate(&scenario, &opts)?,
    };
    outcome.table.write_csv(&mut out)?;
    out.flush().map_err(io_err)?;
    Ok(outcome.errors)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CliError::Config("--threads must be ≥ 1".into()));
    }
    Ok(())
}
