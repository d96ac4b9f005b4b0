//! Geometric network model: node placement, distances, `d^a` link energies,
//! candidate power levels and power-induced topologies.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Directed link `(from, to)`.
pub type Link = (NodeId, NodeId);

/// Immutable node layout plus radio parameters. Distances and link energies
/// are precomputed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    positions: Vec<Point>,
    path_loss: f64,
    power_cap: f64,
    bandwidth: f64,
    distance: Vec<f64>,
    energy: Vec<f64>,
}

impl NetworkModel {
    pub fn new(
        positions: Vec<Point>,
        path_loss: f64,
        power_cap: f64,
        bandwidth: f64,
    ) -> Result<Self, NetError> {
        let n = positions.len();
        if n < 2 {
            return Err(NetError::TooFewNodes(n));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(NetError::NonFiniteCoordinate(NodeId(i)));
            }
        }
        for (name, value) in [
            ("path-loss exponent", path_loss),
            ("power cap", power_cap),
            ("bandwidth", bandwidth),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(NetError::InvalidParameter { name, value });
            }
        }
        let mut distance = vec![0.0; n * n];
        let mut energy = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (positions[i].x - positions[j].x).hypot(positions[i].y - positions[j].y);
                if d == 0.0 {
                    return Err(NetError::CoincidentNodes(NodeId(i), NodeId(j)));
                }
                let e = d.powf(path_loss);
                distance[i * n + j] = d;
                distance[j * n + i] = d;
                energy[i * n + j] = e;
                energy[j * n + i] = e;
            }
        }
        Ok(NetworkModel {
            positions,
            path_loss,
            power_cap,
            bandwidth,
            distance,
            energy,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.len()).map(NodeId)
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn path_loss(&self) -> f64 {
        self.path_loss
    }

    pub fn power_cap(&self) -> f64 {
        self.power_cap
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    fn check_pair(&self, i: NodeId, j: NodeId) -> Result<(), NetError> {
        for v in [i, j] {
            if v.0 >= self.len() {
                return Err(NetError::UnknownNode(v));
            }
        }
        if i == j {
            return Err(NetError::SameNode(i));
        }
        Ok(())
    }

    pub fn distance(&self, i: NodeId, j: NodeId) -> Result<f64, NetError> {
        self.check_pair(i, j)?;
        Ok(self.distance[i.0 * self.len() + j.0])
    }

    /// Transmission energy `d(i,j)^a` needed for `i` to reach `j`.
    pub fn link_energy(&self, i: NodeId, j: NodeId) -> Result<f64, NetError> {
        self.check_pair(i, j)?;
        Ok(self.energy[i.0 * self.len() + j.0])
    }

    /// Unchecked lookups for hot loops over valid, distinct indices.
    pub(crate) fn dist_unchecked(&self, i: usize, j: usize) -> f64 {
        self.distance[i * self.len() + j]
    }

    pub(crate) fn energy_unchecked(&self, i: usize, j: usize) -> f64 {
        self.energy[i * self.len() + j]
    }

    /// Per node, the ascending distinct link energies within the power cap,
    /// with 0 (radio off) first.
    pub fn power_levels(&self) -> PowerLevelSet {
        let n = self.len();
        let levels = (0..n)
            .map(|i| {
                let mut l: Vec<f64> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.energy_unchecked(i, j))
                    .filter(|&e| e <= self.power_cap)
                    .collect();
                l.push(0.0);
                l.sort_by(f64::total_cmp);
                l.dedup();
                l
            })
            .collect();
        PowerLevelSet { levels }
    }

    /// Directed links reachable under the given per-node powers:
    /// `(i, j)` is present iff `d(i,j)^a <= power[i]`.
    pub fn induced_links(&self, power: &[f64]) -> Result<BTreeSet<Link>, NetError> {
        if power.len() != self.len() {
            return Err(NetError::PowerVectorLength {
                expected: self.len(),
                got: power.len(),
            });
        }
        for (i, &p) in power.iter().enumerate() {
            if !(p >= 0.0 && p <= self.power_cap) {
                return Err(NetError::PowerOutOfRange {
                    node: NodeId(i),
                    power: p,
                    cap: self.power_cap,
                });
            }
        }
        let n = self.len();
        let mut links = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.energy_unchecked(i, j) <= power[i] {
                    links.insert((NodeId(i), NodeId(j)));
                }
            }
        }
        Ok(links)
    }
}

/// Undirected edges `{i, j}` (stored with `i < j`) whose both directions are present.
pub fn symmetric_closure(links: &BTreeSet<Link>) -> BTreeSet<(NodeId, NodeId)> {
    links
        .iter()
        .filter(|&&(i, j)| i < j && links.contains(&(j, i)))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLevelSet {
    levels: Vec<Vec<f64>>,
}

impl PowerLevelSet {
    pub fn node(&self, i: NodeId) -> &[f64] {
        &self.levels[i.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.levels.iter().map(Vec::as_slice)
    }
}
