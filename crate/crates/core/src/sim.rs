//! Scenario generation and the sequential request simulation: Poisson request
//! arrivals, one topology solve per request against the live energy ledger,
//! and threshold / mean-demand sweeps over replicated seeds.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` split into four
//! streams: 0 node positions, 1 per-node request counts, 2 destinations,
//! 3 demands. Poisson variates use inversion by sequential search.

use milp::Limits;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QosError, SimError};
use crate::net::{NetworkModel, NodeId, Point};
use crate::qos::{solve_single_request, EnergyLedger, LostReason, Request, RouteOutcome};

const STREAM_POSITIONS: u64 = 0;
const STREAM_COUNTS: u64 = 1;
const STREAM_DESTINATIONS: u64 = 2;
const STREAM_DEMANDS: u64 = 3;

/// Largest Poisson mean sampled in one inversion; larger means are summed
/// from chunks so `exp(-mean)` never underflows.
const POISSON_CHUNK: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n: usize,
    /// Region width and height; nodes fall in `[0, w) x [0, h)`.
    pub region: (f64, f64),
    pub path_loss_exponent: f64,
    pub power_cap: f64,
    pub bandwidth: f64,
    /// Mean number of requests each node originates.
    pub request_rate: f64,
    /// Mean demand per request.
    pub lambda_m: f64,
    pub hop_bound: usize,
    /// `None` drops the consumed-energy threshold rows.
    pub threshold: Option<f64>,
    pub seed: u64,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidParams(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        let (w, h) = self.region;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return bad(format!("region must be positive, got {w} x {h}"));
        }
        for (name, v) in [
            ("path_loss_exponent", self.path_loss_exponent),
            ("power_cap", self.power_cap),
            ("bandwidth", self.bandwidth),
            ("request_rate", self.request_rate),
            ("lambda_m", self.lambda_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.hop_bound == 0 {
            return bad("hop_bound must be at least 1".into());
        }
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("threshold must be finite and non-negative, got {t}"));
            }
        }
        Ok(())
    }
}

/// Parameters plus optional fixed node positions and request list that
/// replace the random draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub positions: Option<Vec<Point>>,
    pub requests: Option<Vec<Request>>,
}

impl Scenario {
    pub fn random(params: ScenarioParams) -> Self {
        Scenario {
            params,
            positions: None,
            requests: None,
        }
    }

    /// Builds the network and request list, drawing whatever is not fixed.
    pub fn materialize(&self) -> Result<(NetworkModel, Vec<Request>), SimError> {
        let p = &self.params;
        p.validate()?;
        let positions = match &self.positions {
            Some(pts) => {
                if pts.len() != p.n {
                    return Err(SimError::InvalidParams(format!(
                        "expected {} node positions, got {}",
                        p.n,
                        pts.len()
                    )));
                }
                pts.clone()
            }
            None => draw_positions(p),
        };
        let net = NetworkModel::new(positions, p.path_loss_exponent, p.power_cap, p.bandwidth)?;
        let requests = match &self.requests {
            Some(reqs) => {
                for r in reqs {
                    r.validate(&net)?;
                }
                reqs.clone()
            }
            None => draw_requests(p),
        };
        Ok((net, requests))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Poisson variate by inversion with sequential search.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut remaining = mean;
    let mut total = 0;
    while remaining > POISSON_CHUNK {
        total += poisson_small(rng, POISSON_CHUNK);
        remaining -= POISSON_CHUNK;
    }
    total + poisson_small(rng, remaining)
}

fn poisson_small<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        let next = cdf + p;
        if next == cdf {
            // The tail no longer moves the sum in floating point.
            break;
        }
        cdf = next;
    }
    k
}

fn draw_positions(p: &ScenarioParams) -> Vec<Point> {
    let mut rng = stream(p.seed, STREAM_POSITIONS);
    let (w, h) = p.region;
    let mut pts: Vec<Point> = Vec::with_capacity(p.n);
    while pts.len() < p.n {
        let q = Point::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        if !pts.iter().any(|o| o.x == q.x && o.y == q.y) {
            pts.push(q);
        }
    }
    pts
}

fn draw_demand<R: Rng + ?Sized>(rng: &mut R, lambda_m: f64) -> f64 {
    if lambda_m >= 1.0 {
        1.0 + poisson(rng, lambda_m - 1.0) as f64
    } else {
        poisson(rng, lambda_m).max(1) as f64
    }
}

fn draw_requests(p: &ScenarioParams) -> Vec<Request> {
    let mut counts = stream(p.seed, STREAM_COUNTS);
    let mut dests = stream(p.seed, STREAM_DESTINATIONS);
    let mut demands = stream(p.seed, STREAM_DEMANDS);
    let mut out = Vec::new();
    for s in 0..p.n {
        let k = poisson(&mut counts, p.request_rate);
        for _ in 0..k {
            let mut d = dests.gen_range(0..p.n - 1);
            if d >= s {
                d += 1;
            }
            out.push(Request {
                source: NodeId(s),
                destination: NodeId(d),
                demand: draw_demand(&mut demands, p.lambda_m),
                hop_bound: p.hop_bound,
            });
        }
    }
    out
}

/// Random network and request list for `params`; a pure function of them.
pub fn generate_scenario(params: &ScenarioParams) -> Result<(NetworkModel, Vec<Request>), SimError> {
    Scenario::random(params.clone()).materialize()
}

/// Population variance of each node's share of the total consumed energy;
/// 0 when nothing was consumed.
pub fn variance_of(ledger: &EnergyLedger) -> f64 {
    let total = ledger.total();
    let n = ledger.len();
    if n == 0 || total <= 0.0 {
        return 0.0;
    }
    let mean = 1.0 / n as f64;
    ledger
        .consumed()
        .iter()
        .map(|e| {
            let d = e / total - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRow {
    /// 1-based position in the request sequence.
    pub index: usize,
    pub demand: f64,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub hop_bound: usize,
    pub outcome: RouteOutcome,
    /// Optimal maximum link energy of this request's solve.
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub params: ScenarioParams,
    pub positions: Vec<Point>,
    pub request_table: Vec<RequestRow>,
    pub lost_count: usize,
    /// Lost rows caused by solver limits rather than infeasibility.
    pub resource_limited: usize,
    pub variance: f64,
    pub total_energy: f64,
    pub final_ledger: EnergyLedger,
}

/// Routes `requests` one at a time against an evolving ledger.
pub fn run_requests(
    params: &ScenarioParams,
    net: &NetworkModel,
    requests: &[Request],
    limits: &Limits,
) -> Result<RunReport, SimError> {
    params.validate()?;
    let mut ledger = EnergyLedger::new(net.len());
    let mut rows = Vec::with_capacity(requests.len());
    let mut lost_count = 0;
    let mut resource_limited = 0;
    for (k, req) in requests.iter().enumerate() {
        let (outcome, e_max) = match solve_single_request(net, req, &ledger, params.threshold, limits) {
            Ok(sol) => {
                if !sol.routes[0].is_lost() {
                    ledger.commit(&sol.node_tx_energy);
                }
                (sol.routes[0].clone(), sol.e_max)
            }
            Err(QosError::ResourceLimit) => (RouteOutcome::Lost(LostReason::ResourceLimit), None),
            Err(e) => return Err(e.into()),
        };
        match &outcome {
            RouteOutcome::Lost(reason) => {
                lost_count += 1;
                if *reason == LostReason::ResourceLimit {
                    resource_limited += 1;
                }
            }
            RouteOutcome::Routed { .. } => {}
        }
        rows.push(RequestRow {
            index: k + 1,
            demand: req.demand,
            sender: req.source,
            receiver: req.destination,
            hop_bound: req.hop_bound,
            outcome,
            e_max,
        });
    }
    Ok(RunReport {
        params: params.clone(),
        positions: net.positions().to_vec(),
        request_table: rows,
        lost_count,
        resource_limited,
        variance: variance_of(&ledger),
        total_energy: ledger.total(),
        final_ledger: ledger,
    })
}

pub fn run_scenario(scenario: &Scenario, limits: &Limits) -> Result<RunReport, SimError> {
    let (net, requests) = scenario.materialize()?;
    run_requests(&scenario.params, &net, &requests, limits)
}

/// Fully random run determined by `params`.
pub fn run(params: &ScenarioParams) -> Result<RunReport, SimError> {
    run_scenario(&Scenario::random(params.clone()), &Limits::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Threshold,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Threshold or mean demand; `None` is the no-threshold baseline.
    pub axis_value: Option<f64>,
    pub variance_mean: f64,
    pub lost_mean: f64,
    pub total_energy_mean: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// Runs every point with seeds `seed .. seed + replications` and averages.
/// Points keep the order of `values`; duplicates are kept.
fn sweep(
    scenario: &Scenario,
    axis: SweepAxis,
    values: &[Option<f64>],
    replications: usize,
    limits: &Limits,
) -> Result<SweepResult, SimError> {
    if replications == 0 {
        return Err(SimError::InvalidParams("replications must be at least 1".into()));
    }
    if values.is_empty() {
        return Err(SimError::InvalidParams("a sweep needs at least one value".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..values.len())
        .flat_map(|p| (0..replications as u64).map(move |r| (p, r)))
        .collect();
    let reports: Vec<RunReport> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let mut sc = scenario.clone();
            sc.params.seed = scenario.params.seed.wrapping_add(r);
            match axis {
                SweepAxis::Threshold => sc.params.threshold = values[p],
                SweepAxis::Lambda => {
                    sc.params.lambda_m = values[p].ok_or_else(|| {
                        SimError::InvalidParams("lambda sweep values must be finite".into())
                    })?
                }
            }
            run_scenario(&sc, limits)
        })
        .collect::<Result<_, _>>()?;
    let points = values
        .iter()
        .enumerate()
        .map(|(p, &axis_value)| {
            let chunk = &reports[p * replications..(p + 1) * replications];
            let mean = |f: &dyn Fn(&RunReport) -> f64| chunk.iter().map(f).sum::<f64>() / replications as f64;
            SweepPoint {
                axis_value,
                variance_mean: mean(&|r| r.variance),
                lost_mean: mean(&|r| r.lost_count as f64),
                total_energy_mean: mean(&|r| r.total_energy),
                replications,
            }
        })
        .collect();
    Ok(SweepResult { axis, points })
}

pub fn sweep_threshold(
    scenario: &Scenario,
    thresholds: &[Option<f64>],
    replications: usize,
    limits: &Limits,
) -> Result<SweepResult, SimError> {
    sweep(scenario, SweepAxis::Threshold, thresholds, replications, limits)
}

pub fn sweep_lambda(
    scenario: &Scenario,
    lambdas: &[f64],
    replications: usize,
    limits: &Limits,
) -> Result<SweepResult, SimError> {
    let values: Vec<Option<f64>> = lambdas.iter().map(|&l| Some(l)).collect();
    sweep(scenario, SweepAxis::Lambda, &values, replications, limits)
}
