use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mrio_footprint::commands::{cmd_compare, cmd_fixture, cmd_footprint, cmd_validate, RunConfig};
use mrio_footprint::CliError;

#[derive(Parser)]
#[command(
    name = "mrio",
    version,
    about = "Consumption-based footprints and low-consumption scenarios from MRIO tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check table balance and productivity. Exit 2 when the data fail a check.
    Validate {
        #[arg(long)]
        layout: PathBuf,
        /// Also write validation.toml here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Footprint reports for one or more scenarios.
    Footprint(RunArgs),
    /// Footprints plus a comparison table and plot series across scenarios.
    Compare(RunArgs),
    /// Write a synthetic balanced dataset.
    Fixture {
        #[arg(long, default_value_t = 3)]
        regions: usize,
        #[arg(long, default_value_t = 5)]
        sectors: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    layout: PathBuf,
    /// Scenario file, or a name in the layout's scenario directory. Repeatable.
    #[arg(long = "scenario", required = true)]
    scenarios: Vec<String>,
    /// Comma-separated extension names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    extensions: Option<Vec<String>>,
    #[arg(long)]
    home_region: Option<String>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl From<RunArgs> for RunConfig {
    fn from(a: RunArgs) -> Self {
        RunConfig {
            layout: a.layout,
            scenarios: a.scenarios,
            extensions: a.extensions,
            home_region: a.home_region,
            params: a.params,
            out: a.out,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Validate { layout, out } => {
            let report = cmd_validate(&layout, out.as_deref())?;
            print!("{}", report.render());
            Ok(if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Footprint(args) => {
            let cfg = RunConfig::from(args);
            for run in cmd_footprint(&cfg)? {
                for r in &run.reports {
                    println!(
                        "{}\t{}\t{:.6e} {}",
                        run.scenario.spec.name, r.extension_name, r.total, r.unit
                    );
                }
            }
            println!("reports written to {}", cfg.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let cfg = RunConfig::from(args);
            let cmp = cmd_compare(&cfg)?;
            println!(
                "{} scenario(s), {} plot series written to {}",
                cmp.runs.len(),
                cmp.plots.len(),
                cfg.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixture {
            regions,
            sectors,
            seed,
            out,
        } => {
            let layout = cmd_fixture(regions, sectors, seed, &out)?;
            println!("{}", layout.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
