//! Simulated replanning runs on small and synthetic networks.

use risk_submod::streetnet::ota::random_placement;
use risk_submod::streetnet::{ota_run, synth_city, Edge, Node, OtaConfig, OtaMode, StreetNetwork};

fn line(t_max_factor: f64) -> StreetNetwork {
    let nodes = (0..3).map(|i| Node { id: i, x: i as f64 * 100.0, y: 0.0 }).collect();
    let mut edges = Vec::new();
    for (a, b, len, v) in [(0, 1, 100.0, 10.0), (1, 2, 200.0, 20.0)] {
        edges.push(Edge { from: a, to: b, len_m: len, maxv_mps: v });
        edges.push(Edge { from: b, to: a, len_m: len, maxv_mps: v });
    }
    StreetNetwork::new(nodes, edges, 1.0, 1.0, t_max_factor).unwrap()
}

#[test]
fn worked_episode_without_waits() {
    // one vehicle at 0, one demand at 2: two 10 s edges, no intersection delay
    let net = line(0.0);
    for mode in OtaMode::ALL {
        let run = ota_run(&net, &[0], &[2], &OtaConfig::default(), 1, mode).unwrap();
        assert!((run.arrival_time - 20.0).abs() < 1e-9, "{mode}: {}", run.arrival_time);
        assert_eq!(run.reached_at.len(), 1);
        assert_eq!(run.assignment_count, 1);
        assert_eq!(run.assignments[0].assignment, vec![Some(0)]);
    }
}

#[test]
fn waits_only_delay_arrival() {
    let net = line(3.0);
    let run = ota_run(&net, &[0], &[2], &OtaConfig::default(), 5, OtaMode::Offline).unwrap();
    assert!(run.arrival_time >= 20.0);
    // at most one wait of 3·deg at each node passed, at most two
    assert!(run.arrival_time <= 20.0 + 3.0 * 2.0 * 2.0 + 3.0 * 4.0);
}

#[test]
fn runs_are_consistent_and_replayable() {
    let net = synth_city(5, 5, 7).unwrap();
    let cfg = OtaConfig { n_s: 50, ..OtaConfig::default() };
    for seed in 0..3 {
        let (v, d) = random_placement(&net, 6, 4, seed).unwrap();
        for mode in OtaMode::ALL {
            let run = ota_run(&net, &v, &d, &cfg, seed, mode).unwrap();
            let again = ota_run(&net, &v, &d, &cfg, seed, mode).unwrap();
            assert_eq!(run.to_ndjson(), again.to_ndjson(), "{mode} seed {seed}");

            assert_eq!(run.assignment_count, 1 + run.trigger_steps.len() + run.recovery_steps.len());
            let last = run.reached_at.iter().copied().fold(0.0, f64::max);
            assert_eq!(run.arrival_time, last);
            assert!(run.events.windows(2).all(|w| w[1].clock >= w[0].clock));
            assert!(run.events.last().unwrap().reached.iter().all(|&r| r));
            let total: f64 = run.step_intervals.iter().sum();
            assert!((total - run.arrival_time).abs() < 1e-6 * run.arrival_time.max(1.0));
            if mode == OtaMode::Offline {
                assert!(run.trigger_steps.is_empty());
            }
        }
    }
}

#[test]
fn placement_uses_distinct_nodes() {
    let net = synth_city(4, 4, 2).unwrap();
    let (v, d) = random_placement(&net, 10, 5, 3).unwrap();
    let mut all: Vec<usize> = v.iter().chain(&d).copied().collect();
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), 15);
    assert!(random_placement(&net, 12, 5, 3).is_err());
}
