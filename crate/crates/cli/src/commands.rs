//! The three subcommands. Each returns the exit status through `CliError`.

use std::path::{Path, PathBuf};

use milp::Limits;
use wsn_qos::qos::solve_load_lp;
use wsn_qos::sim::{run_scenario, sweep_lambda, sweep_threshold, SweepAxis};
use wsn_qos::{RunReport, Scenario, SweepResult};

use crate::output::{report_json, routing_table, sweep_csv, NONE_WORD};
use crate::{ensure_dir, io_err, CliError, ScenarioFile};

pub const TABLE_FILE: &str = "routing_table.txt";
pub const REPORT_FILE: &str = "run_report.json";

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut sc = ScenarioFile::load(path)?.into_scenario()?;
    if let Some(seed) = seed {
        sc.params.seed = seed;
    }
    Ok(sc)
}

fn write(path: PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

pub fn cmd_run(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<RunReport, CliError> {
    let sc = load(scenario, seed)?;
    let report = run_scenario(&sc, &Limits::default())?;
    let dir = ensure_dir(out)?;
    write(dir.join(TABLE_FILE), &routing_table(&report))?;
    write(dir.join(REPORT_FILE), &report_json(&report))?;
    Ok(report)
}

/// Threshold values accept `none` (or `inf`) for the unconstrained baseline;
/// lambda values must be numbers.
pub fn parse_axis_values(axis: SweepAxis, list: &str) -> Result<Vec<Option<f64>>, CliError> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let lower = s.to_ascii_lowercase();
            if axis == SweepAxis::Threshold && (lower == NONE_WORD || lower == "inf") {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| CliError::Parse(format!("bad axis value {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Parse("--values needs at least one entry".into()));
    }
    Ok(values)
}

pub fn sweep_file_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Threshold => "sweep_threshold.csv",
        SweepAxis::Lambda => "sweep_lambda.csv",
    }
}

pub fn cmd_sweep(
    scenario: &Path,
    axis: SweepAxis,
    values: &[Option<f64>],
    replications: usize,
    out: &Path,
    seed: Option<u64>,
) -> Result<SweepResult, CliError> {
    let sc = load(scenario, seed)?;
    let limits = Limits::default();
    let result = match axis {
        SweepAxis::Threshold => sweep_threshold(&sc, values, replications, &limits)?,
        SweepAxis::Lambda => {
            let lambdas: Vec<f64> = values.iter().map(|v| v.expect("lambda values are numbers")).collect();
            sweep_lambda(&sc, &lambdas, replications, &limits)?
        }
    };
    let dir = ensure_dir(out)?;
    write(dir.join(sweep_file_name(axis)), &sweep_csv(&result))?;
    Ok(result)
}

/// Returns the printed line: `L_max = <value>` followed by `OVERLOADED` when
/// some node's utilization exceeds 1.
pub fn cmd_loadcheck(scenario: &Path, seed: Option<u64>) -> Result<String, CliError> {
    let sc = load(scenario, seed)?;
    let (net, requests) = sc.materialize()?;
    let result = solve_load_lp(&net, &requests, &Limits::default())?;
    Ok(if result.overloaded() {
        format!("L_max = {} OVERLOADED", result.l_max)
    } else {
        format!("L_max = {}", result.l_max)
    })
}
