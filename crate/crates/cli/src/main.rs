//! `sublevy`: config-driven simulation and verification of subordinated
//! Lévy processes.
//!
//! Exit codes: 0 success, 1 a check failed, 2 config error, 3 I/O error.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Format};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sublevy", version, about = "Simulate and verify subordinated Lévy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config, or a JSON report whose embedded config is rerun.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Output format; overrides `output.formats` where applicable.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print ρ(u) for each probe.
    Exponent {
        #[command(flatten)]
        common: Common,
        /// Comma-separated flat coordinates; repeatable.
        #[arg(long = "u", value_delimiter = ';', allow_hyphen_values = true)]
        u: Vec<String>,
    },
    /// Write i.i.d. draws of X(t), or a path on `run.grid`.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the configured check battery and write a report.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Print the integrability classification.
    Classify {
        #[command(flatten)]
        common: Common,
    },
}

fn setup(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    if let Some(f) = common.format {
        cfg.output.formats = vec![f];
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(cfg)
}

fn parse_probe(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --u value `{s}`: {e}")))
}

fn print(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Exponent { common, u } => {
            let probes = u.iter().map(|s| parse_probe(s)).collect::<Result<Vec<_>, _>>()?;
            let cfg = setup(&common)?;
            print(&commands::exponent(
                &cfg,
                &probes,
                common.format.unwrap_or(Format::Csv),
            )?);
        }
        Command::Simulate { common } => {
            let cfg = setup(&common)?;
            for p in commands::simulate(&cfg)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Verify { common } => {
            let cfg = setup(&common)?;
            let report = commands::verify(&cfg)?;
            let written = commands::write_report(&cfg, &report)?;
            print(&commands::summary(&report));
            for p in written {
                println!("wrote {}", p.display());
            }
            return Ok(report.passed);
        }
        Command::Classify { common } => {
            let cfg = setup(&common)?;
            print(&commands::classify(&cfg, common.format.unwrap_or(Format::Csv))?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
