mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmdecomp::simulator::{generate, AnomalyKind, Scenario};
use tmdecomp::solver::{
    decompose_pca, decompose_pcp, decompose_spcp, decompose_spcp_mrc, default_lambda,
    spectral_norm, Decomposition, SolverConfig,
};
use tmdecomp::wavelet::{max_detail_magnitude, WaveletSpec};
use tmdecomp::{Error, TrafficMatrix};

fn rel(a: &TrafficMatrix, b: &TrafficMatrix) -> f64 {
    (a - b).norm() / a.norm()
}

fn blocks(d: &Decomposition) -> [TrafficMatrix; 3] {
    [
        d.deterministic.clone(),
        d.anomaly().unwrap().clone(),
        d.noise().unwrap().clone(),
    ]
}

/// Smooth rank-one matrix `u v^T` with a slowly varying `u`.
fn smooth_rank_one(rows: usize, cols: usize) -> TrafficMatrix {
    TrafficMatrix::from_fn(rows, cols, |t, p| {
        let u = 10.0 + 3.0 * (2.0 * std::f64::consts::PI * t as f64 / rows as f64).sin();
        u * (1.0 + p as f64)
    })
}

#[test]
fn recovers_smooth_rank_one_matrix() {
    let a = smooth_rank_one(256, 6);
    let (d, trace) = decompose_spcp_mrc(&a, &SolverConfig::default()).unwrap();
    assert!(rel(&a, &d.deterministic) < 1e-2, "{}", rel(&a, &d.deterministic));
    assert!(d.anomaly().unwrap().norm() < 1e-2 * a.norm());
    assert!(trace.final_residual() < 1e-4);
}

#[test]
fn pcp_separates_low_rank_and_sparse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, r) = (80, 2);
    let u = gaussian_matrix(&mut rng, n, r);
    let v = gaussian_matrix(&mut rng, n, r);
    let low = &u * v.transpose();
    let mut sparse = TrafficMatrix::zeros(n, n);
    for _ in 0..(n * n / 20) {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        sparse[(i, j)] = if rng.random::<bool>() { 5.0 } else { -5.0 };
    }
    let x = &low + &sparse;
    let config = SolverConfig {
        max_iters: 2000,
        ..SolverConfig::default()
    };
    let (d, _) = decompose_pcp(&x, default_lambda(n, n), &config).unwrap();
    assert!(rel(&low, &d.deterministic) < 1e-2, "{}", rel(&low, &d.deterministic));
    assert!(rel(&sparse, d.anomaly().unwrap()) < 1e-2);
    assert!(d.noise().is_none());
}

#[test]
fn spcp_absorbs_noise_that_pcp_cannot() {
    let gt = generate(&Scenario {
        n_nodes: 4,
        periods: 512,
        anomaly: AnomalyKind::Alpha { count: 20 },
        ..Scenario::default()
    })
    .unwrap();
    let config = SolverConfig {
        max_iters: 300,
        ..SolverConfig::default()
    };
    let lambda = config.lambda_for(512, 16);
    let (pcp, _) = decompose_pcp(&gt.total, lambda, &config).unwrap();
    let (spcp, _) = decompose_spcp(&gt.total, lambda, &config).unwrap();
    assert!(rel(&gt.anomaly, spcp.anomaly().unwrap()) < rel(&gt.anomaly, pcp.anomaly().unwrap()));
    let n = spcp.noise().unwrap();
    assert_eq!(*n, &gt.total - &spcp.deterministic - spcp.anomaly().unwrap());
}

#[test]
fn pca_rank_and_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = gaussian_matrix(&mut rng, 40, 10);
    let d = decompose_pca(&x, 3).unwrap();
    let s = d.deterministic.clone().svd(false, false).singular_values;
    assert_eq!(s.iter().filter(|v| **v > 1e-8 * s.max()).count(), 3);
    assert_eq!(d.total(), &d.deterministic + d.residual().unwrap());
    assert!((d.total() - &x).norm() < 1e-12 * x.norm());
    assert!(matches!(decompose_pca(&x, 11), Err(Error::RankOutOfRange { .. })));
    assert!(matches!(decompose_pca(&x, 0), Err(Error::RankOutOfRange { .. })));
}

#[test]
fn iterates_respect_constraints() {
    let gt = generate(&Scenario {
        n_nodes: 4,
        periods: 256,
        anomaly: AnomalyKind::Dos { count: 10 },
        ..Scenario::default()
    })
    .unwrap();
    let config = SolverConfig {
        check_invariants: true,
        max_iters: 300,
        ..SolverConfig::default()
    };
    let (d, trace) = decompose_spcp_mrc(&gt.total, &config).unwrap();
    let scale = gt.total.amax();
    for r in &trace.records {
        assert!(r.smooth_violation.unwrap() <= 1e-9 * scale);
        assert!(r.box_violation.unwrap() <= 1e-9 * scale);
    }
    let spec = WaveletSpec::new(config.wavelet);
    assert!(max_detail_magnitude(&d.deterministic, &spec, config.q).unwrap() <= 1e-9 * scale);
    // continuation: mu decreases geometrically to its floor
    let mus: Vec<f64> = trace.records.iter().map(|r| r.mu).collect();
    assert!(mus.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*mus.last().unwrap(), trace.mu_floor);
    assert!((trace.mu0 - 0.99 * spectral_norm(&gt.total)).abs() <= 1e-12 * trace.mu0);
}

#[test]
fn scaling_is_covariant() {
    let gt = generate(&Scenario {
        n_nodes: 3,
        periods: 128,
        anomaly: AnomalyKind::Alpha { count: 4 },
        seed: 2,
        ..Scenario::default()
    })
    .unwrap();
    let config = SolverConfig::default();
    let (base, _) = decompose_spcp_mrc(&gt.total, &config).unwrap();
    let (scaled, _) = decompose_spcp_mrc(&(&gt.total * 10.0), &config).unwrap();
    for (a, b) in blocks(&base).iter().zip(blocks(&scaled).iter()) {
        let expected = a * 10.0;
        assert!((b - &expected).norm() <= 1e-3 * expected.norm().max(1e-12));
    }
}

#[test]
fn zero_input_gives_zero_output() {
    let x = TrafficMatrix::zeros(64, 4);
    let (d, trace) = decompose_spcp_mrc(&x, &SolverConfig::default()).unwrap();
    assert_eq!(d.total(), x);
    assert!((1..=2).contains(&trace.iterations()));
    assert!(trace.converged);
}

#[test]
fn rejects_bad_inputs() {
    let config = SolverConfig::default();
    assert!(matches!(
        decompose_spcp_mrc(&TrafficMatrix::zeros(100, 4), &config),
        Err(Error::NotDivisible { .. })
    ));
    let mut x = TrafficMatrix::zeros(64, 4);
    x[(3, 1)] = f64::NAN;
    assert!(matches!(decompose_spcp_mrc(&x, &config), Err(Error::NonFinite)));
    assert!(decompose_spcp_mrc(&TrafficMatrix::zeros(64, 1), &config).is_err());
    let bad = SolverConfig {
        eta: 1.0,
        ..SolverConfig::default()
    };
    assert!(matches!(decompose_spcp_mrc(&TrafficMatrix::zeros(64, 4), &bad), Err(Error::Parameter(_))));
}

#[test]
fn objective_gap_follows_accelerated_rate() {
    // Gap after continuation against 2L ||Z_k0 - Z*||^2 / (k - k0 + 1)^2,
    // with Z* and F* from a long run.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let smooth = smooth_rank_one(64, 8);
    let x = &smooth + gaussian_matrix(&mut rng, 64, 8) * 0.5;
    let long = SolverConfig {
        max_iters: 20_000,
        tol: 1e-300,
        ..SolverConfig::default()
    };
    let (end, trace) = decompose_spcp_mrc(&x, &long).unwrap();
    let k0 = trace.records.iter().position(|r| r.mu <= trace.mu_floor).unwrap();
    let (start, _) = decompose_spcp_mrc(&x, &SolverConfig { max_iters: k0, ..long.clone() }).unwrap();
    let c: f64 = 6.0
        * blocks(&start)
            .iter()
            .zip(blocks(&end).iter())
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>();
    let f: Vec<f64> = trace.records.iter().map(|r| r.objective).collect();
    assert!(f.len() > k0 + 50, "only {} iterations after k0 {k0}", f.len());
    let f_star = f.iter().cloned().fold(f64::INFINITY, f64::min);
    for (k, v) in f.iter().enumerate().skip(k0 + 10) {
        let envelope = c / ((k - k0 + 1) as f64).powi(2);
        assert!(v - f_star <= envelope, "k {k}: gap {} > {envelope}", v - f_star);
    }
}
