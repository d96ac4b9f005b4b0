//! TOML scenario files.

use std::path::Path;

use serde::Deserialize;
use wsn_qos::{NodeId, Point, Request, Scenario, ScenarioParams};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    /// `[width, height]` in meters.
    pub region: [f64; 2],
    pub path_loss_exponent: f64,
    pub power_cap: f64,
    pub bandwidth: f64,
    pub request_rate: f64,
    pub lambda_m: f64,
    pub hop_bound: usize,
    /// Omitted means no threshold.
    pub threshold: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Fixed coordinates; must list exactly `n` nodes when present.
    pub nodes: Option<Vec<NodeEntry>>,
    /// Fixed request sequence; replaces Poisson generation when present,
    /// even if empty.
    pub requests: Option<Vec<RequestEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestEntry {
    pub source: usize,
    pub destination: usize,
    pub demand: f64,
    /// Defaults to the file-level `hop_bound`.
    pub hop_bound: Option<usize>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        ScenarioFile::parse(&text)
    }

    /// Request invariants are checked here; network-dependent checks happen
    /// when the scenario is materialized.
    pub fn into_scenario(self) -> Result<Scenario, CliError> {
        let params = ScenarioParams {
            n: self.n,
            region: (self.region[0], self.region[1]),
            path_loss_exponent: self.path_loss_exponent,
            power_cap: self.power_cap,
            bandwidth: self.bandwidth,
            request_rate: self.request_rate,
            lambda_m: self.lambda_m,
            hop_bound: self.hop_bound,
            threshold: self.threshold,
            seed: self.seed,
        };
        let positions = self
            .nodes
            .map(|nodes| nodes.iter().map(|p| Point::new(p.x, p.y)).collect());
        let requests = match self.requests {
            None => None,
            Some(entries) => Some(
                entries
                    .iter()
                    .map(|r| {
                        Request::new(
                            NodeId(r.source),
                            NodeId(r.destination),
                            r.demand,
                            r.hop_bound.unwrap_or(self.hop_bound),
                        )
                        .map_err(|e| CliError::InvalidParams(e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(Scenario {
            params,
            positions,
            requests,
        })
    }
}
