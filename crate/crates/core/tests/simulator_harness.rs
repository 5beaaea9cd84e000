mod common;

use common::arb_graph;
use fiedler_core::harness::{self, ExperimentConfig, MetricSeries, SampleTimes, Topology};
use fiedler_core::kernel::KernelKind;
use fiedler_core::rng::run_stream;
use fiedler_core::simulator::{self, EventKind, Placement, RunOptions, SimParams, Simulation, WalkerType};
use fiedler_core::Kernel;
use proptest::prelude::*;
use std::collections::HashSet;

fn start(g: &fiedler_core::Graph, n: u64, kappa: f64, seed: u64) -> (Kernel, Simulation) {
    let k = KernelKind::RandomWalk.build(g).unwrap();
    let mut rng = run_stream(seed, 0);
    let (x, y) = simulator::init_counts(g.node_count(), n, &Placement::Uniform, &mut rng).unwrap();
    let sim = Simulation::new(&k, SimParams { n, kappa }, x, y, rng).unwrap();
    (k, sim)
}

/// Total event rate recomputed from the counts.
fn rate_oracle(k: &Kernel, x: &[u64], y: &[u64], n: u64, kappa: f64) -> f64 {
    let q = k.rates();
    let walk: f64 = (0..x.len()).map(|j| -q[[j, j]] * (x[j] + y[j]) as f64).sum();
    let pairs: f64 = x.iter().zip(y).map(|(a, b)| (a * b) as f64).sum();
    walk + 2.0 * kappa / n as f64 * pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn events_move_exactly_one_walker(g in arb_graph(8), n in 1u64..40, kappa in 0.0f64..30.0, seed in any::<u64>()) {
        let (k, mut sim) = start(&g, n, kappa, seed);
        for _ in 0..300 {
            let rate = rate_oracle(&k, sim.counts_x(), sim.counts_y(), n, kappa);
            prop_assert!((sim.total_rate() - rate).abs() <= 1e-9 * rate.max(1.0));
            let (dt, ev) = sim.draw().unwrap();
            prop_assert!(dt > 0.0);
            let (x0, y0) = (sim.counts_x().to_vec(), sim.counts_y().to_vec());
            match ev.kind {
                EventKind::Walk => prop_assert!(k.rates()[[ev.from, ev.to]] > 0.0),
                EventKind::Kill => {
                    prop_assert!(x0[ev.from] > 0 && y0[ev.from] > 0);
                    let own = if ev.walker == WalkerType::X { &x0 } else { &y0 };
                    prop_assert!(own[ev.to] > 0);
                }
                EventKind::Relocate => prop_assert!(false, "relocation outside a removal"),
            }
            sim.apply(&ev).unwrap();
            let (mut x1, mut y1) = (x0.clone(), y0.clone());
            let moved = if ev.walker == WalkerType::X { &mut x1 } else { &mut y1 };
            moved[ev.from] -= 1;
            moved[ev.to] += 1;
            prop_assert_eq!(sim.counts_x(), &x1[..]);
            prop_assert_eq!(sim.counts_y(), &y1[..]);
            prop_assert_eq!(sim.counts_x().iter().sum::<u64>(), n);
            prop_assert_eq!(sim.counts_y().iter().sum::<u64>(), n);
            prop_assert_eq!(sim.clock(), ev.time);
        }
        let pairs: u64 = sim.counts_x().iter().zip(sim.counts_y()).map(|(a, b)| a * b).sum();
        prop_assert!((sim.kill_rate() - 2.0 * kappa / n as f64 * pairs as f64).abs() < 1e-9 * (1.0 + sim.kill_rate()));
        let per_node: f64 = (0..g.node_count()).map(|j| sim.node_kill_rate(j)).sum();
        prop_assert!((2.0 * per_node - sim.kill_rate()).abs() < 1e-9 * (1.0 + per_node));
    }

    #[test]
    fn time_averages_are_distributions(g in arb_graph(8), n in 1u64..30, kappa in 0.0f64..30.0, seed in any::<u64>()) {
        let (_, mut sim) = start(&g, n, kappa, seed);
        sim.advance_until(1.5, None).unwrap();
        prop_assert_eq!(sim.clock(), 1.5);
        let (xh, yh) = sim.time_averages().unwrap();
        prop_assert!((xh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((yh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(xh.iter().chain(&yh).all(|&v| v >= 0.0));
        let (ix, _) = sim.integrals();
        prop_assert!((ix.iter().sum::<f64>() - n as f64 * 1.5).abs() < 1e-9 * n as f64);
    }

    #[test]
    fn runs_replay_from_their_seed(g in arb_graph(6), seed in any::<u64>()) {
        let k = KernelKind::Combinatorial.build(&g).unwrap();
        let epochs = simulator::static_epochs(k, Some(g.clone()));
        let opts = RunOptions { horizon: 2.0, sample_times: vec![0.5, 1.0, 2.0], record_events: true };
        let params = SimParams { n: 10, kappa: 5.0 };
        let run = |r| simulator::run(&epochs, &params, &Placement::Uniform, &opts, run_stream(seed, r)).unwrap();
        let (a, b) = (run(0), run(0));
        prop_assert_eq!(&a.events, &b.events);
        prop_assert_eq!(&a.snapshots, &b.snapshots);
        prop_assert_eq!(a.snapshots.len(), 3);
        prop_assert_eq!(a.event_count as usize, a.events.as_ref().unwrap().len());
        let other = run(1);
        prop_assert!(other.events != a.events || a.events.as_ref().unwrap().is_empty());
    }

    #[test]
    fn step_grid_ends_at_horizon(step in 0.01f64..2.0, k in 1u32..200) {
        let horizon = step * k as f64;
        let times = SampleTimes::Step(step).resolve(horizon).unwrap();
        prop_assert_eq!(times.len(), k as usize);
        prop_assert_eq!(*times.last().unwrap(), horizon);
        prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_json_round_trip(n in 1u64..1000, kappa in 0.0f64..100.0, horizon in 0.1f64..100.0,
                              runs in 1usize..50, seed in any::<u64>(), inst in any::<bool>()) {
        let text = format!(
            r#"{{"graph_path": "g.txt", "n": {n}, "kappa": {kappa:?}, "T": {horizon:?}, "runs": {runs},
                "master_seed": {seed}, "sample_times": {{"grid": [{horizon:?}]}}, "instantaneous": {inst}}}"#
        );
        let cfg = ExperimentConfig::from_json_str(&text).unwrap();
        cfg.validate().unwrap();
        prop_assert_eq!(cfg.kappa, kappa);
        let back = ExperimentConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn run_streams_are_distinct() {
    use rand::Rng;
    let mut seen = HashSet::new();
    for seed in 0..20u64 {
        for r in 0..50u64 {
            let mut rng = run_stream(seed, r);
            let first: [u64; 2] = [rng.random(), rng.random()];
            assert!(seen.insert(first), "stream ({seed}, {r}) repeats another");
        }
    }
}

#[test]
fn kill_free_process_matches_walk_rates() {
    // With kappa = 0 only walks fire; on a 4-cycle every walker leaves at rate 2.
    let g = fiedler_core::Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
    let k = KernelKind::Combinatorial.build(&g).unwrap();
    let mut rng = run_stream(3, 0);
    let (x, y) = simulator::init_counts(4, 25, &Placement::Uniform, &mut rng).unwrap();
    let mut sim = Simulation::new(&k, SimParams { n: 25, kappa: 0.0 }, x, y, rng).unwrap();
    assert_eq!(sim.total_rate(), 100.0);
    assert_eq!(sim.walk_rate(WalkerType::X), 50.0);
    let mut events = Vec::new();
    sim.advance_until(20.0, Some(&mut events)).unwrap();
    assert!(events.iter().all(|e| e.kind == EventKind::Walk));
    // Poisson count with mean 2000.
    let c = events.len() as f64;
    assert!((c - 2000.0).abs() < 5.0 * 2000f64.sqrt(), "{c} events");
}

#[test]
fn metric_csv_round_trips() {
    let g = fiedler_core::Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
    let topo = Topology::from_graph(g, KernelKind::Combinatorial).unwrap();
    for inst in [false, true] {
        let cfg = ExperimentConfig::from_json_str(&format!(
            r#"{{"graph_path": "c5.txt", "n": 8, "kappa": 3.0, "T": 2.0, "runs": 3, "master_seed": 9,
                "sample_times": {{"step": 0.5}}, "instantaneous": {inst}}}"#
        ))
        .unwrap();
        let series = harness::run_experiment(&cfg, &topo, 1).unwrap();
        assert_eq!(series.rows.len(), 4);
        let mut first = Vec::new();
        series.write_csv(&mut first).unwrap();
        let back = MetricSeries::read_csv(&first[..]).unwrap();
        assert_eq!(back.header, series.header);
        let mut second = Vec::new();
        back.write_csv(&mut second).unwrap();
        assert_eq!(String::from_utf8(first).unwrap(), String::from_utf8(second).unwrap());
        for (a, b) in series.rows.iter().zip(&back.rows) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.estimator.rq_mean.to_bits(), b.estimator.rq_mean.to_bits());
        }
    }
}
