//! Optimization models over a [`NetworkModel`]: the min-max-load flow LP and
//! the min-max-transmission-energy topology/routing MILP with hop, bandwidth,
//! coupling and consumed-energy threshold rows.

mod load;
mod topology;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::QosError;
use crate::net::{NetworkModel, NodeId};

pub use load::{build_load_lp, solve_load_lp, LoadLpResult, LoadModel};
pub use topology::{
    build_compact_topology_milp, build_topology_milp, solve_single_request, LostReason, RouteOutcome, TopologyModel,
    TopologySolution,
};
pub use validate::{decode_and_validate, route_energy};

/// A unicast demand to be routed from `source` to `destination` within
/// `hop_bound` links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub source: NodeId,
    pub destination: NodeId,
    pub demand: f64,
    pub hop_bound: usize,
}

impl Request {
    pub fn new(source: NodeId, destination: NodeId, demand: f64, hop_bound: usize) -> Result<Self, QosError> {
        let r = Request {
            source,
            destination,
            demand,
            hop_bound,
        };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), QosError> {
        if self.source == self.destination {
            return Err(QosError::InvalidRequest(format!(
                "source and destination are both node {}",
                self.source
            )));
        }
        if !(self.demand.is_finite() && self.demand > 0.0) {
            return Err(QosError::InvalidRequest(format!(
                "demand must be positive, got {}",
                self.demand
            )));
        }
        if self.hop_bound == 0 {
            return Err(QosError::InvalidRequest("hop bound must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks the request invariants and that both endpoints exist in `net`.
    pub fn validate(&self, net: &NetworkModel) -> Result<(), QosError> {
        self.check()?;
        for v in [self.source, self.destination] {
            if v.0 >= net.len() {
                return Err(QosError::InvalidRequest(format!("node {v} is not in the network")));
            }
        }
        Ok(())
    }
}

/// Cumulative transmission energy per node across a request sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    consumed: Vec<f64>,
}

impl EnergyLedger {
    pub fn new(n: usize) -> Self {
        EnergyLedger {
            consumed: vec![0.0; n],
        }
    }

    /// Builds a ledger from explicit values; all entries must be finite and `>= 0`.
    pub fn from_values(consumed: Vec<f64>) -> Result<Self, QosError> {
        if let Some(v) = consumed.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(QosError::InvalidRequest(format!("ledger entry {v} is not a valid energy")));
        }
        Ok(EnergyLedger { consumed })
    }

    pub fn len(&self) -> usize {
        self.consumed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.consumed.is_empty()
    }

    pub fn consumed(&self) -> &[f64] {
        &self.consumed
    }

    pub fn get(&self, node: NodeId) -> f64 {
        self.consumed[node.0]
    }

    pub fn total(&self) -> f64 {
        self.consumed.iter().sum()
    }

    pub fn average(&self) -> f64 {
        if self.consumed.is_empty() {
            0.0
        } else {
            self.total() / self.consumed.len() as f64
        }
    }

    /// Adds per-node increments (same length as the ledger).
    pub fn commit(&mut self, increments: &[f64]) {
        assert_eq!(increments.len(), self.consumed.len());
        for (c, inc) in self.consumed.iter_mut().zip(increments) {
            *c += inc;
        }
    }

    pub(crate) fn check_size(&self, net: &NetworkModel) -> Result<(), QosError> {
        if self.consumed.len() != net.len() {
            return Err(QosError::LedgerSize {
                expected: net.len(),
                got: self.consumed.len(),
            });
        }
        Ok(())
    }
}
