use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tmdecomp::simulator::{
    deterministic_matrix, generate, gravity_means, gravity_means_from_weights, inject_anomalies,
    noise_matrix, AnomalyKind, Scenario, Shape,
};
use tmdecomp::TrafficMatrix;

fn rank(m: &TrafficMatrix) -> usize {
    let s = m.clone().svd(false, false).singular_values;
    let top = s.max();
    s.iter().filter(|v| **v > 1e-8 * top).count()
}

fn scenario(kind: AnomalyKind, seed: u64) -> Scenario {
    Scenario {
        anomaly: kind,
        seed,
        ..Scenario::default()
    }
}

#[test]
fn means_are_positive_and_normalised() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 5, 12] {
        let means = gravity_means(n, 1e6, &mut rng).unwrap();
        assert_eq!(means.len(), n * n);
        assert!(means.iter().all(|m| *m > 0.0));
        let total: f64 = means.iter().sum();
        assert!((total - 1e6).abs() <= 1e-9 * 1e6);
    }
    assert!(gravity_means(1, 1e6, &mut rng).is_err());
}

#[test]
fn gravity_structure_shows_in_flow_means() {
    // Flows out of the same node share that node's weight, so their means move together:
    // across draws, rank correlation of means of flows (i, a) and (i, b) is positive.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 12;
    let draws = 1000;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..draws {
        let m = gravity_means(n, 1e6, &mut rng).unwrap();
        xs.push(m[1]); // flow (0, 1)
        ys.push(m[2]); // flow (0, 2)
    }
    let ranks = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|a, b| v[*a].partial_cmp(&v[*b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (k, i) in idx.into_iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let (rx, ry) = (ranks(&xs), ranks(&ys));
    let mean = (draws - 1) as f64 / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let var: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let spearman = cov / var;
    assert!(spearman > 0.2, "{spearman}");
}

#[test]
fn deterministic_traffic_has_rank_at_most_eleven() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let means = gravity_means(12, 1e6, &mut rng).unwrap();
        let (a, clamped) = deterministic_matrix(&means, 2016, 0.5, &mut rng);
        assert_eq!(clamped, 0);
        assert!(a.iter().all(|v| *v >= 0.0));
        assert!(rank(&a) <= 11);
        for (p, mean) in means.iter().enumerate() {
            let col_mean = a.column(p).mean();
            assert!((col_mean - mean).abs() <= 0.02 * mean);
        }
    }
}

#[test]
fn zero_amplitude_is_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let means = gravity_means(4, 1e6, &mut rng).unwrap();
    let (a, _) = deterministic_matrix(&means, 256, 0.0, &mut rng);
    assert_eq!(rank(&a), 1);
}

#[test]
fn noise_has_requested_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let means = vec![100.0; 50];
    let n = noise_matrix(&means, 0.05, 2016, &mut rng);
    let sigma = 5.0;
    let bound = 3.0 * sigma / (2016f64).sqrt();
    let mut inside = 0;
    for p in 0..50 {
        let col = n.column(p);
        let mean = col.mean();
        assert!(mean.abs() <= 1.5 * bound, "column mean {mean}");
        let std = col.variance().sqrt();
        if (4.7..=5.3).contains(&std) {
            inside += 1;
        }
    }
    assert_eq!(inside, 50);
    assert_eq!(noise_matrix(&means, 0.0, 16, &mut rng), TrafficMatrix::zeros(16, 50));
}

#[test]
fn one_alpha_event_is_a_step() {
    let s = Scenario {
        n_nodes: 2,
        periods: 64,
        anomaly: AnomalyKind::Alpha { count: 1 },
        ..Scenario::default()
    };
    let means = vec![100.0; 4];
    let a = TrafficMatrix::from_element(64, 4, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (e, events) = inject_anomalies(&s, &a, &means, &mut rng).unwrap();
    assert_eq!(events.len(), 1);
    let ev = &events[0];
    assert_eq!((ev.duration, ev.shape), (6, Shape::Step));
    let nonzero: Vec<(usize, usize, f64)> = (0..64)
        .flat_map(|t| (0..4).map(move |p| (t, p)))
        .filter(|&(t, p)| e[(t, p)] != 0.0)
        .map(|(t, p)| (t, p, e[(t, p)]))
        .collect();
    assert_eq!(nonzero.len(), 6);
    assert!(nonzero.iter().all(|&(_, p, v)| p == ev.flows[0] && v == 50.0));
    assert!(nonzero.windows(2).all(|w| w[1].0 == w[0].0 + 1));
}

#[test]
fn no_anomalies_give_zero_matrix() {
    let gt = generate(&Scenario {
        n_nodes: 3,
        periods: 64,
        anomaly: AnomalyKind::None,
        ..Scenario::default()
    })
    .unwrap();
    assert!(gt.events.is_empty());
    assert_eq!(gt.anomaly, TrafficMatrix::zeros(64, 9));
}

#[test]
fn reference_event_counts_and_composition() {
    for kind in AnomalyKind::reference_battery() {
        let s = scenario(kind.clone(), 11);
        let gt = generate(&s).unwrap();
        let expected = match kind {
            AnomalyKind::RandomPoint { .. } => 2903, // floor(0.01 * 2016 * 144)
            AnomalyKind::Alpha { .. } | AnomalyKind::Dos { .. } => 500,
            AnomalyKind::Ddos { .. } => 100,
            AnomalyKind::FlashCrowd { .. } => 50,
            AnomalyKind::Shift { .. } => 10,
            AnomalyKind::None => 0,
        };
        assert_eq!(gt.events.len(), expected, "{}", s.name());
        for e in &gt.events {
            assert!(e.duration >= 1 && e.end() <= s.periods);
        }
        // bit-level composition
        for t in 0..s.periods {
            for p in 0..s.flows() {
                let v = (gt.deterministic[(t, p)] + gt.anomaly[(t, p)]) + gt.noise[(t, p)];
                assert_eq!(gt.total[(t, p)], v);
            }
        }
        // sparsity bound
        let budget: usize = gt.events.iter().map(|e| e.duration * e.flows.len()).sum();
        let nnz = gt.anomaly.iter().filter(|v| **v != 0.0).count();
        assert!(nnz <= budget);
    }
}

#[test]
fn ddos_events_share_a_destination() {
    let s = Scenario {
        anomaly: AnomalyKind::Ddos { count: 100, fan_in: 5 },
        ..Scenario::default()
    };
    let gt = generate(&s).unwrap();
    assert_eq!(gt.events.len(), 100);
    for e in &gt.events {
        assert_eq!(e.flows.len(), 5);
        let dest = e.flows[0] % 12;
        assert!(e.flows.iter().all(|f| f % 12 == dest));
        let mut sources: Vec<usize> = e.flows.iter().map(|f| f / 12).collect();
        sources.sort();
        sources.dedup();
        assert_eq!(sources.len(), 5);
        assert!(!sources.contains(&dest));
        assert_eq!((e.duration, e.shape), (6, Shape::SymmetricTriangle));
    }
}

#[test]
fn flash_crowds_rise_then_decay() {
    let s = Scenario {
        n_nodes: 6,
        periods: 256,
        anomaly: AnomalyKind::FlashCrowd { count: 1, fan_in: 3 },
        ..Scenario::default()
    };
    let gt = generate(&s).unwrap();
    let e = &gt.events[0];
    assert_eq!((e.duration, e.shape), (30, Shape::AsymmetricTriangle));
    let col: Vec<f64> = (e.start..e.end()).map(|t| gt.anomaly[(t, e.flows[0])]).collect();
    let peak = col.iter().cloned().fold(0.0, f64::max);
    assert!((peak - e.peaks[0]).abs() <= 1e-12 * peak);
    assert_eq!(col.iter().position(|v| *v == peak), Some(9));
}

#[test]
fn shifts_conserve_traffic() {
    let s = Scenario {
        n_nodes: 12,
        anomaly: AnomalyKind::Shift { count: 1 },
        ..Scenario::default()
    };
    for seed in 0..10 {
        let gt = generate(&Scenario { seed, ..s.clone() }).unwrap();
        let e = &gt.events[0];
        let (donor, recipient) = (e.flows[0], e.flows[1]);
        assert_ne!(donor / 12, recipient / 12);
        assert_ne!(donor % 12, recipient % 12);
        assert_eq!(e.duration, 120);
        let loss: f64 = (e.start..e.end()).map(|t| gt.anomaly[(t, donor)]).sum();
        let gain: f64 = (e.start..e.end()).map(|t| gt.anomaly[(t, recipient)]).sum();
        assert_eq!(gain + loss, 0.0);
        // the rows of A + E keep their totals
        for t in e.start..e.end() {
            let before: f64 = gt.deterministic.row(t).sum();
            let after: f64 = (&gt.deterministic + &gt.anomaly).row(t).sum();
            assert!((before - after).abs() <= 1e-9 * before);
        }
    }
}

#[test]
fn infeasible_topology_is_rejected() {
    let s = Scenario {
        n_nodes: 4,
        periods: 64,
        anomaly: AnomalyKind::Ddos { count: 1, fan_in: 5 },
        ..Scenario::default()
    };
    assert!(matches!(generate(&s), Err(tmdecomp::Error::Topology(_))));
}

#[test]
fn generation_is_deterministic() {
    let s = scenario(AnomalyKind::Dos { count: 50 }, 99);
    assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    let other = generate(&Scenario { seed: 100, ..s.clone() }).unwrap();
    assert_ne!(other.total, generate(&s).unwrap().total);
}

#[test]
fn equal_weights_split_evenly() {
    assert_eq!(gravity_means_from_weights(&[1.0, 1.0], 1e6), vec![250_000.0; 4]);
}
