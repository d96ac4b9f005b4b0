use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wsn_qos::sim::SweepAxis;
use wsn_qos_cli::{cmd_loadcheck, cmd_run, cmd_sweep, parse_axis_values, CliError};

#[derive(Parser)]
#[command(name = "wsnqos", version, about = "Energy-aware topology control and QoS routing for sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Threshold,
    Lambda,
}

#[derive(Subcommand)]
enum Command {
    /// Route the scenario's requests in order and write the routing table and report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat runs over a list of thresholds or mean demands and write averages as CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated; `none` is the no-threshold baseline.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value_t = 1)]
        replications: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve the load-balancing LP and report the peak node utilization.
    Loadcheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, out, seed } => {
            let report = cmd_run(&scenario, &out, seed)?;
            println!(
                "{} requests, {} lost, variance {}",
                report.request_table.len(),
                report.lost_count,
                report.variance
            );
        }
        Command::Sweep {
            scenario,
            out,
            axis,
            values,
            replications,
            seed,
        } => {
            let axis = match axis {
                Axis::Threshold => SweepAxis::Threshold,
                Axis::Lambda => SweepAxis::Lambda,
            };
            let values = parse_axis_values(axis, &values)?;
            let result = cmd_sweep(&scenario, axis, &values, replications, &out, seed)?;
            println!("{} sweep points written", result.points.len());
        }
        Command::Loadcheck { scenario, seed } => println!("{}", cmd_loadcheck(&scenario, seed)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
