//! Brute-force reference for single-request topology solves: enumerates
//! per-node power levels and simple paths. Shares no code with the MILP.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsn_qos::{EnergyLedger, NetworkModel, NodeId, Point, Request};

/// Simple s-d paths within the hop bound that respect bandwidth and, when
/// given, the threshold after charging the path's energy.
pub fn admissible_paths(net: &NetworkModel, req: &Request, ledger: &EnergyLedger, t: Option<f64>) -> Vec<Vec<usize>> {
    let n = net.len();
    let mut out = Vec::new();
    let mut stack = vec![vec![req.source.0]];
    while let Some(p) = stack.pop() {
        let last = *p.last().unwrap();
        if last == req.destination.0 {
            out.push(p);
            continue;
        }
        if p.len() > req.hop_bound {
            continue;
        }
        for j in 0..n {
            if !p.contains(&j) {
                let mut q = p.clone();
                q.push(j);
                stack.push(q);
            }
        }
    }
    out.retain(|p| {
        let relay_load = if p.len() > 2 { 2.0 } else { 1.0 };
        if relay_load * req.demand > net.bandwidth() + 1e-9 {
            return false;
        }
        let Some(t) = t else { return true };
        let mut energy = ledger.consumed().to_vec();
        for w in p.windows(2) {
            energy[w[0]] += req.demand * net.link_energy(NodeId(w[0]), NodeId(w[1])).unwrap();
        }
        let avg = energy.iter().sum::<f64>() / n as f64;
        energy.iter().all(|&e| e <= avg + t + 1e-9 * e.max(1.0))
    });
    out
}

/// Minimum E_max over every per-node power assignment whose induced links
/// are symmetric and contain some admissible path.
pub fn oracle(net: &NetworkModel, req: &Request, ledger: &EnergyLedger, t: Option<f64>) -> Option<f64> {
    let paths = admissible_paths(net, req, ledger, t);
    let levels = net.power_levels();
    let choices: Vec<&[f64]> = levels.iter().collect();
    let n = net.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let power: Vec<f64> = (0..n).map(|i| choices[i][idx[i]]).collect();
        let links = net.induced_links(&power).unwrap();
        let symmetric = links.iter().all(|&(i, j)| links.contains(&(j, i)));
        if symmetric {
            let e_max = links
                .iter()
                .map(|&(i, j)| net.link_energy(i, j).unwrap())
                .fold(0.0, f64::max);
            let usable = paths.iter().any(|p| {
                p.windows(2).all(|w| links.contains(&(NodeId(w[0]), NodeId(w[1]))))
            });
            if usable && best.map_or(true, |b| e_max < b) {
                best = Some(e_max);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub struct Instance {
    pub net: NetworkModel,
    pub req: Request,
    pub ledger: EnergyLedger,
    pub threshold: Option<f64>,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let mut pts: Vec<Point> = Vec::new();
    while pts.len() < n {
        // Integer grid so equal distances occur.
        let p = Point::new(rng.gen_range(0..8) as f64, rng.gen_range(0..8) as f64);
        if !pts.iter().any(|q| q.x == p.x && q.y == p.y) {
            pts.push(p);
        }
    }
    let a = if rng.gen_bool(0.5) { 2.0 } else { 3.0 };
    let cap = if a == 2.0 { rng.gen_range(10.0..100.0) } else { rng.gen_range(30.0..400.0) };
    let bandwidth = rng.gen_range(2.0..8.0);
    let net = NetworkModel::new(pts, a, cap, bandwidth).unwrap();
    let s = rng.gen_range(0..n);
    let mut d = rng.gen_range(0..n - 1);
    if d >= s {
        d += 1;
    }
    let demand = rng.gen_range(1..=3) as f64;
    let hop_bound = rng.gen_range(1..n);
    let req = Request::new(NodeId(s), NodeId(d), demand, hop_bound).unwrap();
    let (ledger, threshold) = if rng.gen_bool(0.4) {
        let values = (0..n).map(|_| rng.gen_range(0.0..60.0)).collect();
        (EnergyLedger::from_values(values).unwrap(), Some(rng.gen_range(0.0..150.0)))
    } else {
        (EnergyLedger::new(n), None)
    };
    Instance {
        net,
        req,
        ledger,
        threshold,
    }
}
