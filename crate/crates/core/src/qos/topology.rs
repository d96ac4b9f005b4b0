//! Joint topology and routing MILP: pick symmetric, distance-ordered links and
//! one hop-bounded route per request so that the largest link energy `E_max`
//! is minimal, subject to node bandwidth and (optionally) the consumed-energy
//! threshold `E_i <= E_average + threshold`.

use std::collections::BTreeSet;

use milp::{Limits, MilpModel, Sense, Status, VarId, VarKind};
use serde::{Deserialize, Serialize};

use super::validate::decode_and_validate;
use super::{EnergyLedger, Request};
use crate::error::{QosError, ValidationError};
use crate::net::{Link, NetworkModel, NodeId};

/// Upper bound on subtour-elimination rounds per request.
const MAX_CUT_ROUNDS: usize = 64;

#[derive(Debug, Clone)]
pub struct TopologyModel {
    pub model: MilpModel,
    pub e_max: VarId,
    n: usize,
    links: Vec<Option<VarId>>,
    routes: Vec<Vec<Option<VarId>>>,
}

impl TopologyModel {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_requests(&self) -> usize {
        self.routes.len()
    }

    /// Variable `x(i,j)`: link `i -> j` is active.
    pub fn link_var(&self, i: NodeId, j: NodeId) -> Option<VarId> {
        self.links[i.0 * self.n + j.0]
    }

    /// Variable `x(i,j)` of request `request`: its route uses `i -> j`. Arcs into
    /// the source and out of the destination have no variable.
    pub fn route_var(&self, request: usize, i: NodeId, j: NodeId) -> Option<VarId> {
        self.routes[request][i.0 * self.n + j.0]
    }

    /// Adds `sum of route arcs inside nodes <= |nodes| - 1` for one request,
    /// which removes every cycle on `nodes` while keeping all simple paths.
    pub fn add_subtour_cut(&mut self, request: usize, nodes: &[NodeId]) -> Result<(), QosError> {
        let mut terms = Vec::new();
        for &i in nodes {
            for &j in nodes {
                if i != j {
                    if let Some(v) = self.route_var(request, i, j) {
                        terms.push((v, 1.0));
                    }
                }
            }
        }
        let label = nodes
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        self.model.add_named_constraint(
            terms,
            Sense::Le,
            nodes.len() as f64 - 1.0,
            format!("subtour[{request}]({label})"),
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LostReason {
    /// No feasible topology and route under the current constraints and ledger.
    Infeasible,
    /// The solver ran out of nodes or iterations before deciding.
    ResourceLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RouteOutcome {
    Routed { path: Vec<NodeId> },
    Lost(LostReason),
}

impl RouteOutcome {
    pub fn path(&self) -> Option<&[NodeId]> {
        match self {
            RouteOutcome::Routed { path } => Some(path),
            RouteOutcome::Lost(_) => None,
        }
    }

    pub fn is_lost(&self) -> bool {
        matches!(self, RouteOutcome::Lost(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySolution {
    /// Optimal maximum link energy; `None` when every request is lost.
    pub e_max: Option<f64>,
    /// Active directed links.
    pub links: BTreeSet<Link>,
    pub routes: Vec<RouteOutcome>,
    /// Transmission energy each node commits by carrying the routes.
    pub node_tx_energy: Vec<f64>,
}

impl TopologySolution {
    fn lost(n: usize, requests: usize, reason: LostReason) -> Self {
        TopologySolution {
            e_max: None,
            links: BTreeSet::new(),
            routes: vec![RouteOutcome::Lost(reason); requests],
            node_tx_energy: vec![0.0; n],
        }
    }
}

fn check_threshold(threshold: Option<f64>) -> Result<(), QosError> {
    match threshold {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(QosError::InvalidThreshold(t)),
        _ => Ok(()),
    }
}

/// Builds the MILP with one row family per constraint: symmetric link pairs,
/// pairwise distance ordering, `E_max >= d^a x` per link, route-to-link
/// coupling per arc. Variable order is `E_max`, then `x(i,j)` row-major, then
/// each request's route arcs row-major.
pub fn build_topology_milp(
    net: &NetworkModel,
    requests: &[Request],
    ledger: &EnergyLedger,
    threshold: Option<f64>,
) -> Result<TopologyModel, QosError> {
    build(net, requests, ledger, threshold, false)
}

/// Same optimum over simple routes as [`build_topology_milp`], with a tighter
/// relaxation:
/// - one variable per unordered link, so symmetry holds by construction;
/// - `E_max >= sum_k (e(i,k) - e(i,k-1)) x(i,k)` per node over its neighbours
///   in distance order, which telescopes to the energy of its farthest link;
/// - `x(i,k) >= sum of arcs i -> j` and `x(j,k) >= sum of arcs i -> j` over
///   every `j` (resp. `i`) at least as far as `k`, since a simple route leaves
///   and enters each node at most once. These replace the per-arc coupling.
pub fn build_compact_topology_milp(
    net: &NetworkModel,
    requests: &[Request],
    ledger: &EnergyLedger,
    threshold: Option<f64>,
) -> Result<TopologyModel, QosError> {
    build(net, requests, ledger, threshold, true)
}

fn build(
    net: &NetworkModel,
    requests: &[Request],
    ledger: &EnergyLedger,
    threshold: Option<f64>,
    compact: bool,
) -> Result<TopologyModel, QosError> {
    for r in requests {
        r.validate(net)?;
    }
    ledger.check_size(net)?;
    check_threshold(threshold)?;

    let n = net.len();
    let mut model = MilpModel::new();
    let e_max = model.add_named_variable(
        VarKind::Continuous {
            lower: 0.0,
            upper: net.power_cap(),
        },
        "E_max",
    );
    let mut links = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if compact && j < i {
                links[i * n + j] = links[j * n + i];
            } else {
                links[i * n + j] = Some(model.add_named_variable(VarKind::Binary, format!("x({i},{j})")));
            }
        }
    }
    let mut routes = Vec::with_capacity(requests.len());
    for (k, req) in requests.iter().enumerate() {
        let (s, d) = (req.source.0, req.destination.0);
        let mut vars = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j && j != s && i != d {
                    vars[i * n + j] =
                        Some(model.add_named_variable(VarKind::Binary, format!("r[{k}]({i},{j})")));
                }
            }
        }
        routes.push(vars);
    }
    model.set_objective([(e_max, 1.0)])?;
    let link = |i: usize, j: usize| links[i * n + j].expect("off-diagonal link");

    // Neighbours of each node by distance, index breaking ties.
    let order: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut o: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            o.sort_by(|&a, &b| {
                net.dist_unchecked(i, a)
                    .total_cmp(&net.dist_unchecked(i, b))
                    .then(a.cmp(&b))
            });
            o
        })
        .collect();

    // Links are bidirectional.
    if !compact {
        for i in 0..n {
            for j in (i + 1)..n {
                model.add_named_constraint(
                    [(link(i, j), 1.0), (link(j, i), -1.0)],
                    Sense::Eq,
                    0.0,
                    format!("sym({i},{j})"),
                )?;
            }
        }
    }

    // Broadcast ordering: reaching j implies reaching every j' with d(i,j') <= d(i,j).
    // Written as a chain over the neighbours sorted by distance; equal distances
    // are tied both ways.
    for i in 0..n {
        for w in order[i].windows(2) {
            let (near, far) = (w[0], w[1]);
            model.add_named_constraint(
                [(link(i, far), 1.0), (link(i, near), -1.0)],
                Sense::Le,
                0.0,
                format!("order({i};{far}>{near})"),
            )?;
            if net.dist_unchecked(i, near) == net.dist_unchecked(i, far) {
                model.add_named_constraint(
                    [(link(i, near), 1.0), (link(i, far), -1.0)],
                    Sense::Le,
                    0.0,
                    format!("order({i};{near}={far})"),
                )?;
            }
        }
    }

    // E_max covers every active link; the cap is E_max's upper bound.
    if compact {
        for i in 0..n {
            let mut terms = vec![(e_max, 1.0)];
            let mut prev = 0.0;
            for &k in &order[i] {
                let e = net.energy_unchecked(i, k);
                if e > prev {
                    terms.push((link(i, k), -(e - prev)));
                    prev = e;
                }
            }
            model.add_named_constraint(terms, Sense::Ge, 0.0, format!("power({i})"))?;
        }
    } else {
        for i in 0..n {
            for j in (i + 1)..n {
                model.add_named_constraint(
                    [(e_max, 1.0), (link(i, j), -net.energy_unchecked(i, j))],
                    Sense::Ge,
                    0.0,
                    format!("emax({i},{j})"),
                )?;
            }
        }
    }

    for (k, req) in requests.iter().enumerate() {
        let route = |i: usize, j: usize| routes[k][i * n + j];
        let arcs: Vec<(usize, usize, VarId)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| route(i, j).map(|v| (i, j, v)))
            .collect();

        model.add_named_constraint(
            arcs.iter().map(|&(_, _, v)| (v, 1.0)),
            Sense::Le,
            req.hop_bound as f64,
            format!("hops[{k}]"),
        )?;

        if compact {
            for i in 0..n {
                for (pos, &near) in order[i].iter().enumerate() {
                    let outgoing: Vec<(VarId, f64)> = order[i][pos..]
                        .iter()
                        .filter_map(|&j| route(i, j).map(|v| (v, -1.0)))
                        .collect();
                    let incoming: Vec<(VarId, f64)> = order[i][pos..]
                        .iter()
                        .filter_map(|&j| route(j, i).map(|v| (v, -1.0)))
                        .collect();
                    for (dir, terms) in [("out", outgoing), ("in", incoming)] {
                        if terms.is_empty() {
                            continue;
                        }
                        let mut row = terms;
                        row.push((link(i, near), 1.0));
                        model.add_named_constraint(
                            row,
                            Sense::Ge,
                            0.0,
                            format!("reach_{dir}[{k}]({i};{near})"),
                        )?;
                    }
                }
            }
        } else {
            for &(i, j, v) in &arcs {
                model.add_named_constraint(
                    [(v, 1.0), (link(i, j), -1.0)],
                    Sense::Le,
                    0.0,
                    format!("couple[{k}]({i},{j})"),
                )?;
            }
        }

        for node in 0..n {
            let terms = arcs.iter().filter_map(|&(i, j, v)| {
                if i == node {
                    Some((v, 1.0))
                } else if j == node {
                    Some((v, -1.0))
                } else {
                    None
                }
            });
            let rhs = if node == req.source.0 {
                1.0
            } else if node == req.destination.0 {
                -1.0
            } else {
                0.0
            };
            model.add_named_constraint(terms, Sense::Eq, rhs, format!("route[{k}]({node})"))?;
        }
    }

    // Node bandwidth: demand carried in plus out.
    for node in 0..n {
        let mut terms = Vec::new();
        for (k, req) in requests.iter().enumerate() {
            for other in 0..n {
                if other == node {
                    continue;
                }
                if let Some(v) = routes[k][node * n + other] {
                    terms.push((v, req.demand));
                }
                if let Some(v) = routes[k][other * n + node] {
                    terms.push((v, req.demand));
                }
            }
        }
        model.add_named_constraint(terms, Sense::Le, net.bandwidth(), format!("bw({node})"))?;
    }

    // Consumed-energy threshold, with the candidate routes' energy included on
    // both sides: E_i + inc_i - mean(E + inc) <= threshold.
    if let Some(t) = threshold {
        let mean_consumed = ledger.average();
        let inv_n = 1.0 / n as f64;
        for node in 0..n {
            let mut terms = Vec::new();
            for (k, req) in requests.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        if let Some(v) = routes[k][i * n + j] {
                            let own = if i == node { 1.0 } else { 0.0 };
                            let coef = req.demand * net.energy_unchecked(i, j) * (own - inv_n);
                            terms.push((v, coef));
                        }
                    }
                }
            }
            let rhs = t - ledger.consumed()[node] + mean_consumed;
            model.add_named_constraint(terms, Sense::Le, rhs, format!("threshold({node})"))?;
        }
    }

    Ok(TopologyModel {
        model,
        e_max,
        n,
        links,
        routes,
    })
}

/// Routes one request against the current ledger. Infeasible models become
/// `Lost(Infeasible)`; solver limits become `Lost(ResourceLimit)`.
pub fn solve_single_request(
    net: &NetworkModel,
    request: &Request,
    ledger: &EnergyLedger,
    threshold: Option<f64>,
    limits: &Limits,
) -> Result<TopologySolution, QosError> {
    let requests = std::slice::from_ref(request);
    let mut tm = build_compact_topology_milp(net, requests, ledger, threshold)?;
    for _ in 0..MAX_CUT_ROUNDS {
        let raw = tm.model.solve(limits)?;
        match raw.status {
            Status::Optimal => {}
            Status::Infeasible => {
                return Ok(TopologySolution::lost(net.len(), 1, LostReason::Infeasible))
            }
            Status::ResourceLimit => {
                return Ok(TopologySolution::lost(net.len(), 1, LostReason::ResourceLimit))
            }
            Status::Unbounded => unreachable!("E_max is bounded below by 0"),
        }
        match decode_and_validate(net, requests, ledger, threshold, &tm, &raw) {
            Ok(sol) => return Ok(sol),
            Err(ValidationError::SubtourDependent { request, cycles }) => {
                for nodes in &cycles {
                    tm.add_subtour_cut(request, nodes)?;
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(QosError::ResourceLimit)
}
