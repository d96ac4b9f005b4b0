use milp::Limits;
use proptest::prelude::*;
use wsn_qos::qos::{route_energy, RouteOutcome};
use wsn_qos::sim::{run, run_scenario, sweep_lambda, sweep_threshold, variance_of};
use wsn_qos::{EnergyLedger, NodeId, Point, Request, Scenario, ScenarioParams};

fn small(seed: u64) -> ScenarioParams {
    ScenarioParams {
        n: 7,
        region: (60.0, 60.0),
        path_loss_exponent: 2.0,
        power_cap: 60.0 * 60.0 * 2.0,
        bandwidth: 40.0,
        request_rate: 0.6,
        lambda_m: 4.0,
        hop_bound: 3,
        threshold: None,
        seed,
    }
}

fn scripted_line(threshold: Option<f64>) -> Scenario {
    let mut params = small(0);
    params.n = 3;
    params.threshold = threshold;
    Scenario {
        params,
        positions: Some(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]),
        requests: Some(vec![Request::new(NodeId(0), NodeId(2), 2.0, 2).unwrap()]),
    }
}

#[test]
fn scripted_relay_charges_both_senders() {
    let report = run_scenario(&scripted_line(None), &Limits::default()).unwrap();
    let row = &report.request_table[0];
    assert_eq!(row.index, 1);
    assert_eq!(row.outcome.path().unwrap(), &[NodeId(0), NodeId(1), NodeId(2)][..]);
    assert_eq!(report.final_ledger.consumed(), &[2.0, 2.0, 0.0]);
    assert_eq!(report.total_energy, 4.0);
    assert_eq!(report.lost_count, 0);
    // Shares (1/2, 1/2, 0) around mean 1/3.
    assert!((report.variance - 1.0 / 18.0).abs() < 1e-15);
}

#[test]
fn scripted_threshold_zero_loses_the_request() {
    // Any route leaves a sender above the average.
    let report = run_scenario(&scripted_line(Some(0.0)), &Limits::default()).unwrap();
    assert!(report.request_table[0].outcome.is_lost());
    assert_eq!(report.lost_count, 1);
    assert_eq!(report.total_energy, 0.0);
}

#[test]
fn ledger_matches_routed_paths() {
    for seed in 0..6 {
        let p = small(seed);
        let sc = Scenario::random(p);
        let (net, _) = sc.materialize().unwrap();
        let report = run_scenario(&sc, &Limits::default()).unwrap();
        let mut expected = EnergyLedger::new(net.len());
        for row in &report.request_table {
            if let RouteOutcome::Routed { path } = &row.outcome {
                let req = Request::new(row.sender, row.receiver, row.demand, row.hop_bound).unwrap();
                expected.commit(&route_energy(&net, &req, path).unwrap());
            }
        }
        for (a, b) in expected.consumed().iter().zip(report.final_ledger.consumed()) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "seed {seed}");
        }
        assert_eq!(report.variance, variance_of(&report.final_ledger));
        let lost = report.request_table.iter().filter(|r| r.outcome.is_lost()).count();
        assert_eq!(lost, report.lost_count);
    }
}

#[test]
fn runs_are_deterministic() {
    let mut p = small(5);
    p.threshold = Some(200.0);
    assert_eq!(run(&p).unwrap(), run(&p).unwrap());
}

#[test]
fn singleton_sweep_equals_run() {
    let mut p = small(2);
    let sweep = sweep_threshold(&Scenario::random(p.clone()), &[Some(150.0)], 1, &Limits::default()).unwrap();
    p.threshold = Some(150.0);
    let report = run(&p).unwrap();
    let point = &sweep.points[0];
    assert_eq!(point.axis_value, Some(150.0));
    assert_eq!(point.variance_mean, report.variance);
    assert_eq!(point.lost_mean, report.lost_count as f64);
    assert_eq!(point.total_energy_mean, report.total_energy);
    assert_eq!(point.replications, 1);
}

#[test]
fn sweep_replications_use_consecutive_seeds() {
    let p = small(10);
    let sweep = sweep_lambda(&Scenario::random(p.clone()), &[3.0], 2, &Limits::default()).unwrap();
    let mut total = 0.0;
    for seed in [10, 11] {
        let mut q = p.clone();
        q.seed = seed;
        q.lambda_m = 3.0;
        total += run(&q).unwrap().total_energy;
    }
    assert!((sweep.points[0].total_energy_mean - total / 2.0).abs() <= 1e-9 * total.max(1.0));
}

#[test]
fn light_demand_with_slack_resources_loses_nothing() {
    for seed in 0..4 {
        let mut p = small(seed);
        p.lambda_m = 0.5;
        p.bandwidth = 1e6;
        let report = run(&p).unwrap();
        assert_eq!(report.lost_count, 0, "seed {seed}");
    }
}

#[test]
fn sweep_rejects_empty_inputs() {
    let sc = Scenario::random(small(0));
    assert!(sweep_threshold(&sc, &[], 1, &Limits::default()).is_err());
    assert!(sweep_threshold(&sc, &[None], 0, &Limits::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn report_invariants(seed in 0u64..1_000, threshold in prop::option::of(0.0f64..3_000.0)) {
        let mut p = small(seed);
        p.threshold = threshold;
        let report = run(&p).unwrap();
        prop_assert!(report.lost_count <= report.request_table.len());
        prop_assert!(report.resource_limited <= report.lost_count);
        prop_assert!(report.variance >= 0.0 && report.variance < 1.0);
        prop_assert!(report.final_ledger.consumed().iter().all(|&e| e >= 0.0));
        prop_assert!((report.total_energy - report.final_ledger.total()).abs() <= 1e-9 * report.total_energy.max(1.0));
        for row in &report.request_table {
            if let Some(path) = row.outcome.path() {
                prop_assert!(path.len() - 1 <= p.hop_bound);
                prop_assert_eq!(path[0], row.sender);
                prop_assert_eq!(*path.last().unwrap(), row.receiver);
            }
        }
    }
}
