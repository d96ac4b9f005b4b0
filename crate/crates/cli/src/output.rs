//! Text, JSON and CSV renderings of simulator results.

use std::fmt::Write as _;

use wsn_qos::qos::RouteOutcome;
use wsn_qos::{RunReport, SweepResult};

use crate::CliError;

/// `None` thresholds and sweep points print as this word.
pub const NONE_WORD: &str = "none";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NONE_WORD.to_string(), |v| v.to_string())
}

/// Header line, column line, then one row per request.
pub fn routing_table(report: &RunReport) -> String {
    let p = &report.params;
    let mut out = String::new();
    writeln!(
        out,
        "λ_m = {}, Threshold = {}, Hop count = {}, Variance = {}",
        p.lambda_m,
        opt(p.threshold),
        p.hop_bound,
        report.variance
    )
    .unwrap();
    out.push_str("Req. # | λ_{s,d} | Sender | Receiver | Routing Path\n");
    for row in &report.request_table {
        let path = match &row.outcome {
            RouteOutcome::Routed { path } => path
                .iter()
                .map(|v| v.0.to_string())
                .collect::<Vec<_>>()
                .join(" → "),
            RouteOutcome::Lost(_) => "Lost".to_string(),
        };
        writeln!(
            out,
            "{} | {} | {} | {} | {}",
            row.index, row.demand, row.sender.0, row.receiver.0, path
        )
        .unwrap();
    }
    out
}

pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports contain only finite numbers");
    s.push('\n');
    s
}

pub fn parse_report_json(text: &str) -> Result<RunReport, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub const SWEEP_HEADER: [&str; 5] = [
    "axis_value",
    "variance_mean",
    "lost_mean",
    "total_energy_mean",
    "replications",
];

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).unwrap();
    for p in &result.points {
        w.write_record([
            opt(p.axis_value),
            p.variance_mean.to_string(),
            p.lost_mean.to_string(),
            p.total_energy_mean.to_string(),
            p.replications.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
