//! Turns raw solver values into links and simple paths, then re-checks every
//! constraint on the decoded structures without trusting the solver.

use std::collections::BTreeSet;

use milp::{Solution, Status};

use super::topology::{RouteOutcome, TopologyModel, TopologySolution};
use super::{EnergyLedger, Request};
use crate::error::{QosError, ValidationError};
use crate::net::{NetworkModel, NodeId};

const TOL: f64 = 1e-7;

fn on(x: f64) -> bool {
    x > 0.5
}

fn within(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + TOL * scale.max(1.0)
}

/// Per-node energy a routed request consumes: each transmitting node on `path`
/// pays `demand * d(i, next)^a`; the destination pays nothing.
pub fn route_energy(
    net: &NetworkModel,
    request: &Request,
    path: &[NodeId],
) -> Result<Vec<f64>, QosError> {
    let mut inc = vec![0.0; net.len()];
    for hop in path.windows(2) {
        inc[hop[0].0] += request.demand * net.link_energy(hop[0], hop[1])?;
    }
    Ok(inc)
}

#[derive(Debug)]
struct Decoded {
    path: Vec<NodeId>,
    /// Node sets of arcs left over after loop erasure, one per component.
    cycles: Vec<Vec<NodeId>>,
}

fn decode_route(n: usize, request: usize, req: &Request, arcs: &[(usize, usize)]) -> Result<Decoded, ValidationError> {
    let broken = |reason: String| ValidationError::BrokenRoute { request, reason };
    let mut used = vec![false; arcs.len()];
    let mut path = vec![req.source.0];
    let mut pos = vec![usize::MAX; n];
    pos[req.source.0] = 0;
    let mut current = req.source.0;
    while current != req.destination.0 {
        let Some(k) = (0..arcs.len()).find(|&k| !used[k] && arcs[k].0 == current) else {
            return Err(broken(format!("walk stops at node {current}")));
        };
        used[k] = true;
        let next = arcs[k].1;
        if pos[next] != usize::MAX {
            // Erase the loop that just closed.
            for &v in &path[pos[next] + 1..] {
                pos[v] = usize::MAX;
            }
            path.truncate(pos[next] + 1);
        } else {
            pos[next] = path.len();
            path.push(next);
        }
        current = next;
    }

    let on_path: BTreeSet<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut touched = vec![false; n];
    for &(i, j) in arcs {
        if on_path.contains(&(i, j)) {
            continue;
        }
        touched[i] = true;
        touched[j] = true;
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for v in 0..n {
        if !touched[v] {
            continue;
        }
        let r = find(&mut parent, v);
        if root_index[r] == usize::MAX {
            root_index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_index[r]].push(NodeId(v));
    }
    Ok(Decoded {
        path: path.into_iter().map(NodeId).collect(),
        cycles: groups,
    })
}

/// Decodes an optimal solution of `tm` and checks it against symmetry,
/// distance ordering, `E_max` coverage and cap, hop bounds, link coupling,
/// bandwidth and the threshold rows. Arcs outside the simple source to
/// destination path are dropped; if the threshold only held thanks to them the
/// result is [`ValidationError::SubtourDependent`].
pub fn decode_and_validate(
    net: &NetworkModel,
    requests: &[Request],
    ledger: &EnergyLedger,
    threshold: Option<f64>,
    tm: &TopologyModel,
    raw: &Solution,
) -> Result<TopologySolution, ValidationError> {
    if raw.status != Status::Optimal {
        return Err(ValidationError::NotOptimal);
    }
    let n = net.len();
    let val = |v: milp::VarId| raw.values[v.0];
    let e_max = val(tm.e_max);

    let mut links = BTreeSet::new();
    for i in net.nodes() {
        for j in net.nodes() {
            if i != j && on(val(tm.link_var(i, j).expect("off-diagonal"))) {
                links.insert((i, j));
            }
        }
    }
    for &(i, j) in &links {
        if !links.contains(&(j, i)) {
            return Err(ValidationError::Asymmetric(i, j));
        }
        let d = net.dist_unchecked(i.0, j.0);
        for k in net.nodes() {
            if k != i && k != j && net.dist_unchecked(i.0, k.0) <= d && !links.contains(&(i, k)) {
                return Err(ValidationError::DistanceOrder { node: i, far: j, near: k });
            }
        }
        let e = net.energy_unchecked(i.0, j.0);
        if !within(e, e_max, e) {
            return Err(ValidationError::EnergyAboveMax(i, j));
        }
    }
    if !within(e_max, net.power_cap(), net.power_cap()) {
        return Err(ValidationError::AbovePowerCap(e_max, net.power_cap()));
    }

    let mut routes = Vec::with_capacity(requests.len());
    let mut cycles_of = Vec::with_capacity(requests.len());
    let mut load = vec![0.0; n];
    let mut tx = vec![0.0; n];
    for (k, req) in requests.iter().enumerate() {
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(v) = tm.route_var(k, NodeId(i), NodeId(j)) {
                    if on(val(v)) {
                        arcs.push((i, j));
                    }
                }
            }
        }
        let decoded = decode_route(n, k, req, &arcs)?;
        let hops = decoded.path.len() - 1;
        if hops > req.hop_bound {
            return Err(ValidationError::HopBound {
                request: k,
                hops,
                bound: req.hop_bound,
            });
        }
        for w in decoded.path.windows(2) {
            if !links.contains(&(w[0], w[1])) {
                return Err(ValidationError::InactiveLink {
                    request: k,
                    from: w[0],
                    to: w[1],
                });
            }
            load[w[0].0] += req.demand;
            load[w[1].0] += req.demand;
            tx[w[0].0] += req.demand * net.energy_unchecked(w[0].0, w[1].0);
        }
        cycles_of.push(decoded.cycles);
        routes.push(RouteOutcome::Routed { path: decoded.path });
    }

    for (i, &l) in load.iter().enumerate() {
        if !within(l, net.bandwidth(), net.bandwidth()) {
            return Err(ValidationError::Bandwidth {
                node: NodeId(i),
                load: l,
                bandwidth: net.bandwidth(),
            });
        }
    }

    if let Some(t) = threshold {
        let mut after = ledger.clone();
        after.commit(&tx);
        let average = after.average();
        for (i, &energy) in after.consumed().iter().enumerate() {
            if !within(energy, average + t, energy.max(average).max(t)) {
                if let Some(request) = cycles_of.iter().position(|c| !c.is_empty()) {
                    return Err(ValidationError::SubtourDependent {
                        request,
                        cycles: cycles_of.swap_remove(request),
                    });
                }
                return Err(ValidationError::Threshold {
                    node: NodeId(i),
                    energy,
                    average,
                    threshold: t,
                });
            }
        }
    }

    Ok(TopologySolution {
        e_max: Some(e_max),
        links,
        routes,
        node_tx_energy: tx,
    })
}
