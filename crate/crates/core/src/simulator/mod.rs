//! Labelled synthetic traffic matrices: gravity-model flow means, sinusoidal
//! deterministic traffic, injected anomalies and Gaussian noise.

mod anomaly;

pub use anomaly::{inject_anomalies, AnomalyEvent, Shape};

use crate::error::{Error, Result};
use crate::TrafficMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Cycles per observation window of the five deterministic sinusoids
/// (24, 12, 6, 3 and 1.5 hour periods over a one-week window).
pub const SINUSOID_CYCLES: [f64; 5] = [7.0, 14.0, 28.0, 56.0, 112.0];

/// Each sinusoid's amplitude relative to the previous one.
pub const AMPLITUDE_DECAY: f64 = 0.5;

/// Phases are drawn uniformly from `[-PHASE_SPREAD, PHASE_SPREAD]`.
pub const PHASE_SPREAD: f64 = PI / 5.0;

/// Anomaly type and its count parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnomalyKind {
    None,
    /// Single-period impulses on a `ratio` fraction of all cells.
    RandomPoint { ratio: f64 },
    Alpha { count: usize },
    Dos { count: usize },
    Ddos { count: usize, fan_in: usize },
    FlashCrowd { count: usize, fan_in: usize },
    /// Ingress/egress shift between two flows with distinct endpoints.
    Shift { count: usize },
}

impl AnomalyKind {
    pub fn label(&self) -> &'static str {
        match self {
            AnomalyKind::None => "none",
            AnomalyKind::RandomPoint { .. } => "random",
            AnomalyKind::Alpha { .. } => "alpha",
            AnomalyKind::Dos { .. } => "dos",
            AnomalyKind::Ddos { .. } => "ddos",
            AnomalyKind::FlashCrowd { .. } => "flash",
            AnomalyKind::Shift { .. } => "shift",
        }
    }

    /// The six anomaly settings of the reference experiment battery.
    pub fn reference_battery() -> Vec<AnomalyKind> {
        vec![
            AnomalyKind::RandomPoint { ratio: 0.01 },
            AnomalyKind::Alpha { count: 500 },
            AnomalyKind::Dos { count: 500 },
            AnomalyKind::Ddos { count: 100, fan_in: 5 },
            AnomalyKind::FlashCrowd { count: 50, fan_in: 3 },
            AnomalyKind::Shift { count: 10 },
        ]
    }

    /// Reference setting for the anomaly type named `label`.
    pub fn reference(label: &str) -> Option<AnomalyKind> {
        Self::reference_battery()
            .into_iter()
            .find(|k| k.label() == label)
    }

    fn count_parameter(&self) -> String {
        match self {
            AnomalyKind::None => "0".into(),
            AnomalyKind::RandomPoint { ratio } => format!("{ratio}"),
            AnomalyKind::Alpha { count }
            | AnomalyKind::Dos { count }
            | AnomalyKind::Ddos { count, .. }
            | AnomalyKind::FlashCrowd { count, .. }
            | AnomalyKind::Shift { count } => format!("{count}"),
        }
    }
}

/// Simulation parameters for one traffic matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub n_nodes: usize,
    pub periods: usize,
    pub dt_minutes: f64,
    pub total_traffic: f64,
    /// Amplitude of the slowest sinusoid relative to the flow mean.
    pub amplitude_scale: f64,
    pub anomaly: AnomalyKind,
    /// Anomaly magnitude as a multiple of the affected flow's mean
    /// (fraction of donor traffic for shifts).
    pub anomaly_delta: f64,
    /// Noise standard deviation as a multiple of the flow mean.
    pub noise_alpha: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            n_nodes: 12,
            periods: 2016,
            dt_minutes: 5.0,
            total_traffic: 1e6,
            amplitude_scale: 0.5,
            anomaly: AnomalyKind::RandomPoint { ratio: 0.01 },
            anomaly_delta: 0.5,
            noise_alpha: 0.05,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn flows(&self) -> usize {
        self.n_nodes * self.n_nodes
    }

    /// Short label such as `X_ddos(0.5,100,0.05)`.
    pub fn name(&self) -> String {
        format!(
            "X_{}({},{},{})",
            self.anomaly.label(),
            self.anomaly_delta,
            self.anomaly.count_parameter(),
            self.noise_alpha
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.n_nodes < 2 {
            return bad(format!("n_nodes must be at least 2, got {}", self.n_nodes));
        }
        if self.periods < 2 || self.periods % 2 != 0 {
            return bad(format!("periods must be even and at least 2, got {}", self.periods));
        }
        if !(self.dt_minutes > 0.0) {
            return bad(format!("dt_minutes must be positive, got {}", self.dt_minutes));
        }
        if !(self.total_traffic > 0.0 && self.total_traffic.is_finite()) {
            return bad(format!("total_traffic must be positive, got {}", self.total_traffic));
        }
        if !(self.amplitude_scale >= 0.0) {
            return bad(format!("amplitude_scale must be nonnegative, got {}", self.amplitude_scale));
        }
        if !(self.noise_alpha >= 0.0) {
            return bad(format!("noise_alpha must be nonnegative, got {}", self.noise_alpha));
        }
        if !(self.anomaly_delta > 0.0) && self.anomaly != AnomalyKind::None {
            return bad(format!("anomaly_delta must be positive, got {}", self.anomaly_delta));
        }
        Ok(())
    }
}

/// A simulated matrix together with its components.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub deterministic: TrafficMatrix,
    pub anomaly: TrafficMatrix,
    pub noise: TrafficMatrix,
    /// `(deterministic + anomaly) + noise`, entry by entry.
    pub total: TrafficMatrix,
    pub events: Vec<AnomalyEvent>,
    pub means: Vec<f64>,
    pub sigmas: Vec<f64>,
}

/// Flow means from fixed node weights: flow `(i, j)` (column `i * n + j`) gets
/// `w_i w_j`, rescaled so all means sum to `total`.
pub fn gravity_means_from_weights(weights: &[f64], total: f64) -> Vec<f64> {
    let mass: f64 = weights.iter().sum();
    let norm = total / (mass * mass);
    weights
        .iter()
        .flat_map(|wi| weights.iter().map(move |wj| wi * wj * norm))
        .collect()
}

/// Gravity-model flow means with node weights drawn i.i.d. exponential(1).
pub fn gravity_means<R: Rng + ?Sized>(n_nodes: usize, total: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n_nodes < 2 {
        return Err(Error::Parameter(format!("need at least 2 nodes, got {n_nodes}")));
    }
    let weights: Vec<f64> = (0..n_nodes)
        .map(|_| {
            // an all-zero draw has probability zero, but keep weights strictly positive
            let w: f64 = rng.sample(Exp1);
            w.max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(gravity_means_from_weights(&weights, total))
}

/// Sum of five random-phase sinusoids on top of each flow mean.
///
/// Returns the matrix and the number of entries clamped at zero.
pub fn deterministic_matrix<R: Rng + ?Sized>(
    means: &[f64],
    periods: usize,
    amplitude_scale: f64,
    rng: &mut R,
) -> (TrafficMatrix, usize) {
    let mut out = TrafficMatrix::zeros(periods, means.len());
    let mut clamped = 0;
    for (p, &mean) in means.iter().enumerate() {
        let mut amplitude = amplitude_scale * mean;
        let mut terms = Vec::with_capacity(SINUSOID_CYCLES.len());
        for cycles in SINUSOID_CYCLES {
            let phase = rng.random_range(-PHASE_SPREAD..=PHASE_SPREAD);
            terms.push((amplitude, cycles, phase));
            amplitude *= AMPLITUDE_DECAY;
        }
        for row in 0..periods {
            let t = (row + 1) as f64;
            let mut value = mean;
            for &(a, cycles, phase) in &terms {
                value += a * (2.0 * PI * cycles * t / periods as f64 + phase).sin();
            }
            if value < 0.0 {
                clamped += 1;
                value = 0.0;
            }
            out[(row, p)] = value;
        }
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} negative deterministic entries to zero");
    }
    (out, clamped)
}

/// Gaussian white noise with standard deviation `alpha * mean` per flow.
pub fn noise_matrix<R: Rng + ?Sized>(
    means: &[f64],
    alpha: f64,
    periods: usize,
    rng: &mut R,
) -> TrafficMatrix {
    let mut out = TrafficMatrix::zeros(periods, means.len());
    if alpha == 0.0 {
        return out;
    }
    for (p, mean) in means.iter().enumerate() {
        let sigma = alpha * mean;
        for row in 0..periods {
            let z: f64 = rng.sample(StandardNormal);
            out[(row, p)] = sigma * z;
        }
    }
    out
}

/// Generates the labelled matrix for `scenario`; a pure function of the scenario and its seed.
pub fn generate(scenario: &Scenario) -> Result<GroundTruth> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let means = gravity_means(scenario.n_nodes, scenario.total_traffic, &mut rng)?;
    let (deterministic, _) =
        deterministic_matrix(&means, scenario.periods, scenario.amplitude_scale, &mut rng);
    let (anomaly, events) = inject_anomalies(scenario, &deterministic, &means, &mut rng)?;
    let noise = noise_matrix(&means, scenario.noise_alpha, scenario.periods, &mut rng);
    let total = TrafficMatrix::from_fn(scenario.periods, means.len(), |t, p| {
        (deterministic[(t, p)] + anomaly[(t, p)]) + noise[(t, p)]
    });
    let sigmas = means.iter().map(|m| scenario.noise_alpha * m).collect();
    Ok(GroundTruth {
        deterministic,
        anomaly,
        noise,
        total,
        events,
        means,
        sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_give_equal_means() {
        let means = gravity_means_from_weights(&[1.0, 1.0], 1e6);
        assert_eq!(means, vec![250_000.0; 4]);
    }

    #[test]
    fn zero_amplitude_gives_constant_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, clamped) = deterministic_matrix(&[5.0, 2.0, 9.0], 64, 0.0, &mut rng);
        assert_eq!(clamped, 0);
        for p in 0..3 {
            assert!(a.column(p).iter().all(|v| *v == [5.0, 2.0, 9.0][p]));
        }
    }

    #[test]
    fn zero_alpha_gives_zero_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(noise_matrix(&[1.0, 2.0], 0.0, 16, &mut rng).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn names() {
        let s = Scenario {
            anomaly: AnomalyKind::Ddos { count: 100, fan_in: 5 },
            ..Scenario::default()
        };
        assert_eq!(s.name(), "X_ddos(0.5,100,0.05)");
        assert_eq!(AnomalyKind::reference("shift"), Some(AnomalyKind::Shift { count: 10 }));
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::default().validate().is_ok());
        assert!(Scenario { n_nodes: 1, ..Default::default() }.validate().is_err());
        assert!(Scenario { periods: 2017, ..Default::default() }.validate().is_err());
        assert!(Scenario { noise_alpha: -0.1, ..Default::default() }.validate().is_err());
    }
}
