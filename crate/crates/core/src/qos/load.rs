//! Splittable multi-commodity flow LP minimizing the peak node bandwidth
//! utilization `L_max`. Flows run on the network graph at full power: arc
//! `(i, j)` exists iff `d(i,j)^a` is within the power cap.

use milp::{Limits, MilpModel, Sense, Status, VarId, VarKind};

use super::Request;
use crate::error::QosError;
use crate::net::NetworkModel;

/// The load LP plus the variable map needed to decode it.
#[derive(Debug, Clone)]
pub struct LoadModel {
    pub model: MilpModel,
    pub l_max: VarId,
    n: usize,
    /// `flows[r][i * n + j]`, `None` on the diagonal and for arcs beyond the cap.
    flows: Vec<Vec<Option<VarId>>>,
}

impl LoadModel {
    pub fn flow_var(&self, request: usize, i: usize, j: usize) -> Option<VarId> {
        self.flows[request][i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadLpResult {
    /// Peak per-node utilization (load divided by bandwidth).
    pub l_max: f64,
    n: usize,
    flows: Vec<Vec<f64>>,
}

impl LoadLpResult {
    /// Flow of request `request` on directed link `(i, j)`.
    pub fn flow(&self, request: usize, i: usize, j: usize) -> f64 {
        self.flows[request][i * self.n + j]
    }

    pub fn num_requests(&self) -> usize {
        self.flows.len()
    }

    /// Capacity is exceeded somewhere iff `L_max > 1`.
    pub fn overloaded(&self) -> bool {
        self.l_max > 1.0
    }
}

pub fn build_load_lp(net: &NetworkModel, requests: &[Request]) -> Result<LoadModel, QosError> {
    for r in requests {
        r.validate(net)?;
    }
    let n = net.len();
    let mut model = MilpModel::new();
    let l_max = model.add_named_variable(
        VarKind::Continuous {
            lower: 0.0,
            upper: f64::INFINITY,
        },
        "L_max",
    );
    let mut flows = Vec::with_capacity(requests.len());
    for (k, req) in requests.iter().enumerate() {
        let mut vars = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j || net.energy_unchecked(i, j) > net.power_cap() {
                    continue;
                }
                // Nothing flows back into the source or out of the destination.
                let upper = if j == req.source.0 || i == req.destination.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                vars[i * n + j] = Some(model.add_named_variable(
                    VarKind::Continuous { lower: 0.0, upper },
                    format!("f[{k}]({i},{j})"),
                ));
            }
        }
        flows.push(vars);
    }
    model.set_objective([(l_max, 1.0)])?;

    for (k, req) in requests.iter().enumerate() {
        let f = &flows[k];
        for i in 0..n {
            let mut terms = Vec::with_capacity(2 * n);
            for j in 0..n {
                if let Some(v) = f[i * n + j] {
                    terms.push((v, 1.0));
                }
                if let Some(v) = f[j * n + i] {
                    terms.push((v, -1.0));
                }
            }
            let rhs = if i == req.source.0 {
                req.demand
            } else if i == req.destination.0 {
                -req.demand
            } else {
                0.0
            };
            model.add_named_constraint(terms, Sense::Eq, rhs, format!("conserve[{k}]({i})"))?;
        }
    }

    let bandwidth = net.bandwidth();
    for i in 0..n {
        let mut terms = vec![(l_max, -bandwidth)];
        for f in &flows {
            for j in 0..n {
                if let Some(v) = f[i * n + j] {
                    terms.push((v, 1.0));
                }
                if let Some(v) = f[j * n + i] {
                    terms.push((v, 1.0));
                }
            }
        }
        model.add_named_constraint(terms, Sense::Le, 0.0, format!("load({i})"))?;
    }

    Ok(LoadModel {
        model,
        l_max,
        n,
        flows,
    })
}

pub fn solve_load_lp(
    net: &NetworkModel,
    requests: &[Request],
    limits: &Limits,
) -> Result<LoadLpResult, QosError> {
    let lm = build_load_lp(net, requests)?;
    let sol = lm.model.solve(limits)?;
    match sol.status {
        Status::Optimal => {}
        Status::ResourceLimit => return Err(QosError::ResourceLimit),
        Status::Infeasible => return Err(QosError::Disconnected),
        // L_max >= 0 is minimized and flows are non-negative.
        Status::Unbounded => unreachable!("load LP cannot be unbounded"),
    }
    let n = lm.n;
    let flows = lm
        .flows
        .iter()
        .map(|vars| {
            vars.iter()
                .map(|v| v.map_or(0.0, |v| sol.values[v.0]))
                .collect()
        })
        .collect();
    Ok(LoadLpResult {
        l_max: sol.values[lm.l_max.0],
        n,
        flows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{NodeId, Point};

    fn line(n: usize, cap: f64, bandwidth: f64) -> NetworkModel {
        let pts = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        NetworkModel::new(pts, 2.0, cap, bandwidth).unwrap()
    }

    /// Oracle for single-request instances whose graph has exactly one simple
    /// source-destination path: every node on it carries demand in and/or out,
    /// so its load is demand times its path degree.
    fn unique_path_peak(net: &NetworkModel, req: &Request) -> f64 {
        let n = net.len();
        let adj = |i: usize, j: usize| i != j && net.energy_unchecked(i, j) <= net.power_cap();
        let mut paths = Vec::new();
        let mut stack = vec![vec![req.source.0]];
        while let Some(p) = stack.pop() {
            let last = *p.last().unwrap();
            if last == req.destination.0 {
                paths.push(p);
                continue;
            }
            for j in 0..n {
                if adj(last, j) && !p.contains(&j) {
                    let mut q = p.clone();
                    q.push(j);
                    stack.push(q);
                }
            }
        }
        assert_eq!(paths.len(), 1, "oracle needs a unique path");
        let path = &paths[0];
        let mut peak: f64 = 0.0;
        for (k, _) in path.iter().enumerate() {
            let degree = usize::from(k > 0) + usize::from(k + 1 < path.len());
            peak = peak.max(degree as f64 * req.demand);
        }
        peak / net.bandwidth()
    }

    fn solve_one(net: &NetworkModel, req: Request) -> LoadLpResult {
        solve_load_lp(net, &[req], &Limits::default()).unwrap()
    }

    #[test]
    fn two_nodes() {
        let net = line(2, 100.0, 10.0);
        let req = Request::new(NodeId(0), NodeId(1), 4.0, 1).unwrap();
        let expected = unique_path_peak(&net, &req);
        let res = solve_one(&net, req);
        assert!((res.l_max - expected).abs() < 1e-9);
        assert!((res.l_max - 0.4).abs() < 1e-9);
        assert!(!res.overloaded());
    }

    #[test]
    fn relay_on_a_line() {
        // cap 1 keeps only the unit-length links: 0 - 1 - 2
        let net = line(3, 1.0, 4.0);
        let req = Request::new(NodeId(0), NodeId(2), 2.0, 2).unwrap();
        let expected = unique_path_peak(&net, &req);
        let res = solve_one(&net, req);
        assert!((res.l_max - expected).abs() < 1e-9);
        assert!((res.l_max - 1.0).abs() < 1e-9);
        assert!(!res.overloaded(), "exactly 1.0 is not overloaded");
    }

    #[test]
    fn overloaded_relay() {
        let net = line(3, 1.0, 4.0);
        let req = Request::new(NodeId(0), NodeId(2), 5.0, 2).unwrap();
        let expected = unique_path_peak(&net, &req);
        let res = solve_one(&net, req);
        assert!((res.l_max - expected).abs() < 1e-9);
        assert!((res.l_max - 2.5).abs() < 1e-9);
        assert!(res.overloaded());
    }

    #[test]
    fn no_requests_means_no_load() {
        let net = line(3, 10.0, 10.0);
        let res = solve_load_lp(&net, &[], &Limits::default()).unwrap();
        assert_eq!(res.l_max, 0.0);
        assert!(!res.overloaded());
    }

    #[test]
    fn direct_arc_beats_relay_when_in_range() {
        let net = line(3, 4.0, 4.0);
        let req = Request::new(NodeId(0), NodeId(2), 2.0, 2).unwrap();
        assert!((solve_one(&net, req).l_max - 0.5).abs() < 1e-9);
    }

    #[test]
    fn unreachable_destination() {
        let net = line(3, 0.5, 4.0);
        let req = Request::new(NodeId(0), NodeId(2), 1.0, 2).unwrap();
        assert_eq!(
            solve_load_lp(&net, &[req], &Limits::default()),
            Err(QosError::Disconnected)
        );
    }

    #[test]
    fn conservation_signs() {
        let net = line(4, 4.0, 7.0);
        let reqs = vec![
            Request::new(NodeId(0), NodeId(3), 3.0, 3).unwrap(),
            Request::new(NodeId(2), NodeId(1), 5.0, 3).unwrap(),
        ];
        let res = solve_load_lp(&net, &reqs, &Limits::default()).unwrap();
        for (k, r) in reqs.iter().enumerate() {
            for i in 0..4 {
                let out: f64 = (0..4).filter(|&j| j != i).map(|j| res.flow(k, i, j)).sum();
                let inn: f64 = (0..4).filter(|&j| j != i).map(|j| res.flow(k, j, i)).sum();
                let want = if i == r.source.0 {
                    r.demand
                } else if i == r.destination.0 {
                    -r.demand
                } else {
                    0.0
                };
                assert!((out - inn - want).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn invalid_endpoint_is_a_build_error() {
        let net = line(2, 1.0, 1.0);
        let bad = Request {
            source: NodeId(0),
            destination: NodeId(5),
            demand: 1.0,
            hop_bound: 1,
        };
        assert!(matches!(build_load_lp(&net, &[bad]), Err(QosError::InvalidRequest(_))));
    }
}
