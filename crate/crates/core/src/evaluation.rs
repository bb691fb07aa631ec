//! Relative-error scoring of decompositions and multi-sample experiment batteries.

use crate::error::{Error, Result};
use crate::simulator::{generate, GroundTruth, Scenario};
use crate::solver::{
    decompose_pca, decompose_pcp, decompose_spcp, decompose_spcp_mrc, Decomposition, Remainder,
    SolverConfig, SolverTrace,
};
use crate::TrafficMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Rank used by the PCA baseline when none is given.
pub const DEFAULT_PCA_RANK: usize = 11;

/// A decomposition method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Pca { k: usize },
    Pcp,
    Spcp,
    SpcpMrc,
}

impl Method {
    /// The four methods of the reference battery, in report order.
    pub fn reference_set() -> Vec<Method> {
        vec![
            Method::SpcpMrc,
            Method::Spcp,
            Method::Pcp,
            Method::Pca { k: DEFAULT_PCA_RANK },
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Pca { .. } => "pca",
            Method::Pcp => "pcp",
            Method::Spcp => "spcp",
            Method::SpcpMrc => "spcp_mrc",
        }
    }

    /// Whether the method produces a separate noise estimate.
    pub fn has_noise(&self) -> bool {
        !matches!(self, Method::Pcp)
    }

    /// Runs the method on `x`. PCA has no iteration trace.
    pub fn run(
        &self,
        x: &TrafficMatrix,
        config: &SolverConfig,
    ) -> Result<(Decomposition, Option<SolverTrace>)> {
        let lambda = config.lambda_for(x.nrows(), x.ncols());
        match self {
            Method::Pca { k } => decompose_pca(x, *k).map(|d| (d, None)),
            Method::Pcp => decompose_pcp(x, lambda, config).map(|(d, t)| (d, Some(t))),
            Method::Spcp => decompose_spcp(x, lambda, config).map(|(d, t)| (d, Some(t))),
            Method::SpcpMrc => decompose_spcp_mrc(x, config).map(|(d, t)| (d, Some(t))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Pca { k } if *k != DEFAULT_PCA_RANK => write!(f, "pca:{k}"),
            _ => f.write_str(self.label()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `pca`, `pca:K`, `pcp`, `spcp`, `spcp_mrc` (also `spcp-mrc`, `mrc`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let method = match name {
            "pca" => {
                let k = match arg {
                    Some(a) => a
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid PCA rank in {s:?}")))?,
                    None => DEFAULT_PCA_RANK,
                };
                return Ok(Method::Pca { k });
            }
            "pcp" => Method::Pcp,
            "spcp" => Method::Spcp,
            "spcp_mrc" | "spcp-mrc" | "mrc" => Method::SpcpMrc,
            _ => return Err(Error::Config(format!("unknown method {s:?}"))),
        };
        if arg.is_some() {
            return Err(Error::Config(format!("method {name} takes no argument")));
        }
        Ok(method)
    }
}

impl TryFrom<String> for Method {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// Relative Frobenius errors of one decomposition. `noise` is `None` when the
/// method has no noise output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accuracy {
    pub deterministic: f64,
    pub anomaly: f64,
    pub noise: Option<f64>,
}

fn relative_error(truth: &TrafficMatrix, estimate: &TrafficMatrix, name: &'static str) -> Result<f64> {
    if truth.shape() != estimate.shape() {
        return Err(Error::Dimension(format!(
            "{name}: truth is {}x{}, estimate is {}x{}",
            truth.nrows(),
            truth.ncols(),
            estimate.nrows(),
            estimate.ncols()
        )));
    }
    let denom = truth.norm();
    if denom == 0.0 {
        return Err(Error::ZeroDenominator(name));
    }
    Ok((truth - estimate).norm() / denom)
}

/// Scores `estimate` against the ground truth components.
///
/// A residual-only decomposition (PCA) compares its residual against both the
/// anomaly and the noise truth; an anomaly-only one (PCP) has no noise score.
pub fn accuracy(
    truth_deterministic: &TrafficMatrix,
    truth_anomaly: &TrafficMatrix,
    truth_noise: &TrafficMatrix,
    estimate: &Decomposition,
) -> Result<Accuracy> {
    let deterministic = relative_error(truth_deterministic, &estimate.deterministic, "A")?;
    let (anomaly, noise) = match &estimate.remainder {
        Remainder::AnomalyNoise { anomaly, noise } => (
            relative_error(truth_anomaly, anomaly, "E")?,
            Some(relative_error(truth_noise, noise, "N")?),
        ),
        Remainder::Anomaly(anomaly) => (relative_error(truth_anomaly, anomaly, "E")?, None),
        Remainder::Residual(r) => (
            relative_error(truth_anomaly, r, "E")?,
            Some(relative_error(truth_noise, r, "N")?),
        ),
    };
    Ok(Accuracy {
        deterministic,
        anomaly,
        noise,
    })
}

/// [`accuracy`] against a simulated ground truth.
pub fn score(truth: &GroundTruth, estimate: &Decomposition) -> Result<Accuracy> {
    accuracy(&truth.deterministic, &truth.anomaly, &truth.noise, estimate)
}

/// Seed of sample `index` in a battery with base seed `base`.
pub fn sample_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// A flow whose truth and estimates are exported as time series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayRequest {
    /// Anomaly label of the scenario (`alpha`, `shift`, ...).
    pub scenario: String,
    pub flow: usize,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    pub n_samples: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
    /// Worker cap; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Series taken from the first sample of each matching scenario.
    pub overlays: Vec<OverlayRequest>,
}

/// Outcome of one method on one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub scenario: usize,
    pub sample: usize,
    pub seed: u64,
    pub method: Method,
    pub outcome: std::result::Result<Accuracy, String>,
    pub iterations: Option<usize>,
}

/// Mean and sample standard deviation over the completed samples of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub std: Option<f64>,
}

impl Summary {
    /// Sums in the given order so repeated runs agree bit for bit.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        });
        Some(Summary { mean, std })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub anomaly: String,
    pub alpha: f64,
    pub method: Method,
    pub n_samples: usize,
    pub n_failed: usize,
    pub deterministic: Option<Summary>,
    pub anomaly_error: Option<Summary>,
    /// `None` when every sample lacked a noise score or none completed.
    pub noise: Option<Summary>,
}

impl ReportRow {
    /// Whether the noise column is structurally absent for this method.
    pub fn noise_not_applicable(&self) -> bool {
        !self.method.has_noise()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlaySeries {
    pub scenario: String,
    pub method: Method,
    pub flow: usize,
    /// Rows of `(period, component, truth, estimate)`.
    pub points: Vec<(usize, &'static str, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    pub rows: Vec<ReportRow>,
    pub samples: Vec<SampleRecord>,
    pub overlays: Vec<OverlaySeries>,
}

impl AccuracyReport {
    pub fn row(&self, scenario: &str, method: Method) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.method == method)
    }
}

struct SampleOutput {
    records: Vec<SampleRecord>,
    overlays: Vec<OverlaySeries>,
}

fn overlay_points(truth: &GroundTruth, estimate: &Decomposition, flow: usize) -> Vec<(usize, &'static str, f64, f64)> {
    let mut points = Vec::new();
    let mut push = |name: &'static str, t: &TrafficMatrix, e: &TrafficMatrix| {
        for row in 0..t.nrows() {
            points.push((row, name, t[(row, flow)], e[(row, flow)]));
        }
    };
    push("A", &truth.deterministic, &estimate.deterministic);
    match &estimate.remainder {
        Remainder::AnomalyNoise { anomaly, noise } => {
            push("E", &truth.anomaly, anomaly);
            push("N", &truth.noise, noise);
        }
        Remainder::Anomaly(anomaly) => push("E", &truth.anomaly, anomaly),
        Remainder::Residual(r) => {
            let truth_rest = &truth.anomaly + &truth.noise;
            push("R", &truth_rest, r);
        }
    }
    points
}

fn run_sample(experiment: &Experiment, scenario_index: usize, sample: usize) -> SampleOutput {
    let seed = sample_seed(experiment.base_seed, sample);
    let scenario = Scenario {
        seed,
        ..experiment.scenarios[scenario_index].clone()
    };
    let mut records = Vec::with_capacity(experiment.methods.len());
    let mut overlays = Vec::new();
    let truth = match generate(&scenario) {
        Ok(t) => t,
        Err(e) => {
            for &method in &experiment.methods {
                records.push(SampleRecord {
                    scenario: scenario_index,
                    sample,
                    seed,
                    method,
                    outcome: Err(e.to_string()),
                    iterations: None,
                });
            }
            return SampleOutput { records, overlays };
        }
    };
    let wanted: Vec<usize> = if sample == 0 {
        experiment
            .overlays
            .iter()
            .filter(|o| o.scenario == scenario.anomaly.label() && o.flow < scenario.flows())
            .map(|o| o.flow)
            .collect()
    } else {
        Vec::new()
    };
    for &method in &experiment.methods {
        let run = method.run(&truth.total, &experiment.solver);
        let (outcome, iterations) = match run {
            Ok((estimate, trace)) => {
                for &flow in &wanted {
                    overlays.push(OverlaySeries {
                        scenario: scenario.name(),
                        method,
                        flow,
                        points: overlay_points(&truth, &estimate, flow),
                    });
                }
                (
                    score(&truth, &estimate).map_err(|e| e.to_string()),
                    trace.map(|t| t.iterations()),
                )
            }
            Err(e) => (Err(e.to_string()), None),
        };
        if let Err(msg) = &outcome {
            log::warn!("{} sample {sample} ({method}): {msg}", scenario.name());
        }
        records.push(SampleRecord {
            scenario: scenario_index,
            sample,
            seed,
            method,
            outcome,
            iterations,
        });
    }
    SampleOutput { records, overlays }
}

/// Runs every method on `n_samples` simulated instances of every scenario.
///
/// Sample `i` of every scenario uses seed `base_seed + i`. Failures are kept
/// in the per-sample records and the battery carries on.
pub fn run_experiment(experiment: &Experiment) -> Result<AccuracyReport> {
    if experiment.n_samples == 0 {
        return Err(Error::Parameter("n_samples must be at least 1".into()));
    }
    if experiment.methods.is_empty() {
        return Err(Error::Parameter("no methods selected".into()));
    }
    experiment.solver.validate()?;
    for s in &experiment.scenarios {
        s.validate()?;
    }
    let tasks: Vec<(usize, usize)> = (0..experiment.scenarios.len())
        .flat_map(|s| (0..experiment.n_samples).map(move |i| (s, i)))
        .collect();
    let work = || -> Vec<SampleOutput> {
        tasks
            .par_iter()
            .map(|&(s, i)| run_sample(experiment, s, i))
            .collect()
    };
    let outputs = match experiment.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Parameter(format!("cannot start {jobs} workers: {e}")))?
            .install(work),
        None => work(),
    };

    let mut samples = Vec::new();
    let mut overlays = Vec::new();
    for out in outputs {
        samples.extend(out.records);
        overlays.extend(out.overlays);
    }
    let rows = aggregate(experiment, &samples);
    Ok(AccuracyReport {
        rows,
        samples,
        overlays,
    })
}

fn aggregate(experiment: &Experiment, samples: &[SampleRecord]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (si, scenario) in experiment.scenarios.iter().enumerate() {
        for &method in &experiment.methods {
            let cell: Vec<&SampleRecord> = samples
                .iter()
                .filter(|r| r.scenario == si && r.method == method)
                .collect();
            let done: Vec<&Accuracy> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let a: Vec<f64> = done.iter().map(|x| x.deterministic).collect();
            let e: Vec<f64> = done.iter().map(|x| x.anomaly).collect();
            let n: Vec<f64> = done.iter().filter_map(|x| x.noise).collect();
            rows.push(ReportRow {
                scenario: scenario.name(),
                anomaly: scenario.anomaly.label().to_string(),
                alpha: scenario.noise_alpha,
                method,
                n_samples: done.len(),
                n_failed: cell.len() - done.len(),
                deterministic: Summary::of(&a),
                anomaly_error: Summary::of(&e),
                noise: Summary::of(&n),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> TrafficMatrix {
        TrafficMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn perfect_estimate_scores_zero() {
        let a = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let e = m(2, 2, &[0.0, 5.0, 0.0, 0.0]);
        let n = m(2, 2, &[0.1, -0.1, 0.2, 0.0]);
        let est = Decomposition {
            deterministic: a.clone(),
            remainder: Remainder::AnomalyNoise {
                anomaly: e.clone(),
                noise: n.clone(),
            },
        };
        let acc = accuracy(&a, &e, &n, &est).unwrap();
        assert_eq!(acc.deterministic, 0.0);
        assert_eq!(acc.anomaly, 0.0);
        assert_eq!(acc.noise, Some(0.0));
    }

    #[test]
    fn hand_computed_cases() {
        let a = m(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let e = m(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let n = m(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let half = Decomposition {
            deterministic: m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            remainder: Remainder::Anomaly(TrafficMatrix::zeros(2, 2)),
        };
        let acc = accuracy(&a, &e, &n, &half).unwrap();
        assert!((acc.deterministic - 0.5_f64.sqrt()).abs() < 1e-15);
        assert_eq!(acc.anomaly, 1.0);
        assert_eq!(acc.noise, None);

        // residual compared against both E and N
        let pca = Decomposition {
            deterministic: TrafficMatrix::zeros(2, 2),
            remainder: Remainder::Residual(&e + &n),
        };
        let acc = accuracy(&a, &e, &n, &pca).unwrap();
        assert_eq!(acc.deterministic, 1.0);
        assert_eq!(acc.anomaly, 1.0);
        assert_eq!(acc.noise, Some(1.0));
    }

    #[test]
    fn zero_truth_names_component() {
        let a = m(1, 2, &[1.0, 1.0]);
        let z = TrafficMatrix::zeros(1, 2);
        let est = Decomposition {
            deterministic: a.clone(),
            remainder: Remainder::AnomalyNoise {
                anomaly: z.clone(),
                noise: z.clone(),
            },
        };
        match accuracy(&a, &z, &a, &est) {
            Err(Error::ZeroDenominator(c)) => assert_eq!(c, "E"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::reference_set().into_iter().chain([Method::Pca { k: 3 }]) {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!("SPCP-MRC".parse::<Method>().unwrap(), Method::SpcpMrc);
        assert!("ica".parse::<Method>().is_err());
        assert!("pcp:3".parse::<Method>().is_err());
        assert!("pca:x".parse::<Method>().is_err());
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(Summary::of(&[]), None);
        let one = Summary::of(&[2.0]).unwrap();
        assert_eq!((one.mean, one.std), (2.0, None));
        let s = Summary::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeds_follow_sample_index() {
        assert_eq!(sample_seed(10, 0), 10);
        assert_eq!(sample_seed(10, 3), 13);
        assert_eq!(sample_seed(u64::MAX, 1), 0);
    }
}
