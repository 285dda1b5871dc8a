use std::sync::Arc;

use phonodrift::rng;
use phonodrift::schemes::{AdaptiveCentralTendency, SurprisalSource};
use phonodrift::{run_ensemble, step, PhonemeDistribution, SimulationConfig, TypeScheme};

#[test]
fn single_steps_follow_the_type_probabilities() {
    let cfg = SimulationConfig::naive(0);
    let start = PhonemeDistribution::uniform(34).unwrap();
    let mut stream = rng::seeded(77);
    let mut counts = [0usize; 3];
    let n = 30_000;
    for _ in 0..n {
        let (next, _) = step(&start, &cfg, &mut stream).unwrap();
        counts[next.len() + 1 - start.len()] += 1;
    }
    for c in counts {
        let f = c as f64 / n as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn adaptive_policy_pulls_toward_mu() {
    let policy = AdaptiveCentralTendency::new(34).unwrap();
    for v in 2..=200usize {
        let p = policy.probabilities(v).unwrap();
        let drift = p.secondary - p.merger;
        match v.cmp(&34) {
            std::cmp::Ordering::Less => assert!(drift > 0.0, "V={v}"),
            std::cmp::Ordering::Equal => assert_eq!(drift, 0.0),
            std::cmp::Ordering::Greater => assert!(drift < 0.0, "V={v}"),
        }
    }

    let run_from = |start: usize, steps: usize| {
        let mut cfg = SimulationConfig::naive(9);
        cfg.type_policy = Arc::new(policy);
        cfg.source_policy = Arc::new(SurprisalSource);
        cfg.initial_inventory_size = start;
        cfg.n_languages = 100;
        cfg.n_steps = steps;
        let records = run_ensemble(&cfg).unwrap();
        records
            .iter()
            .map(|r| *r.pis_series.last().unwrap() as f64)
            .sum::<f64>()
            / 100.0
    };
    // About +0.44 per step at V=10 and -0.60 at V=70.
    let low = run_from(10, 30);
    let high = run_from(70, 30);
    assert!(low > 15.0 && low < 34.0, "{low}");
    assert!(high < 60.0 && high > 34.0, "{high}");
    for start in [10, 70] {
        let settled = run_from(start, 400);
        assert!((settled - 34.0).abs() < 3.0, "{start}: {settled}");
    }
}

#[test]
fn no_preset_breaches_the_floor_or_jumps() {
    for preset in phonodrift::engine::PRESETS {
        for seed in 0..3 {
            let mut cfg = SimulationConfig::preset(preset, seed).unwrap();
            cfg.n_languages = 60;
            cfg.n_steps = 1500;
            for r in run_ensemble(&cfg).unwrap() {
                assert!(r.pis_series.iter().all(|&v| v >= 2));
                assert!(r.pis_series.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
            }
        }
    }
}
