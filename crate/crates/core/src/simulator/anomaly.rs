use super::{AnomalyKind, Scenario};
use crate::error::{Error, Result};
use crate::TrafficMatrix;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Temporal profile of an anomaly, scaled so its maximum is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Impulse,
    Step,
    SymmetricTriangle,
    /// Rises over the first third of the window, decays over the rest.
    AsymmetricTriangle,
}

impl Shape {
    /// Profile values for a window of `duration` periods.
    pub fn profile(self, duration: usize) -> Vec<f64> {
        match self {
            Shape::Impulse => {
                let mut v = vec![0.0; duration];
                if let Some(first) = v.first_mut() {
                    *first = 1.0;
                }
                v
            }
            Shape::Step => vec![1.0; duration],
            Shape::SymmetricTriangle => {
                let half = duration.div_ceil(2) as f64;
                (0..duration)
                    .map(|i| (i + 1).min(duration - i) as f64 / half)
                    .collect()
            }
            Shape::AsymmetricTriangle => {
                let rise = (duration / 3).max(1);
                let fall = (duration - rise + 1) as f64;
                (0..duration)
                    .map(|i| {
                        if i < rise {
                            (i + 1) as f64 / rise as f64
                        } else {
                            1.0 - (i + 1 - rise) as f64 / fall
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Impulse => "impulse",
            Shape::Step => "step",
            Shape::SymmetricTriangle => "symmetric_triangle",
            Shape::AsymmetricTriangle => "asymmetric_triangle",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One injected anomaly.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyEvent {
    /// Anomaly type label (`alpha`, `ddos`, ...).
    pub kind: &'static str,
    /// Affected flow columns. For shifts: `[donor, recipient]`.
    pub flows: Vec<usize>,
    pub start: usize,
    pub duration: usize,
    pub shape: Shape,
    pub delta: f64,
    /// Peak magnitude per affected flow.
    pub peaks: Vec<f64>,
    /// Volume moved from donor to recipient in each period (shifts only).
    pub moved: Option<Vec<f64>>,
}

impl AnomalyEvent {
    pub fn end(&self) -> usize {
        self.start + self.duration
    }
}

/// Number of periods covering `minutes`, at least one.
pub(crate) fn periods_for(minutes: f64, dt_minutes: f64) -> usize {
    ((minutes / dt_minutes).round() as usize).max(1)
}

fn random_start<R: Rng + ?Sized>(rng: &mut R, periods: usize, duration: usize) -> usize {
    rng.random_range(0..=periods - duration)
}

fn check_window(duration: usize, periods: usize) -> Result<()> {
    if duration > periods {
        return Err(Error::Topology(format!(
            "anomaly lasting {duration} periods does not fit in {periods}"
        )));
    }
    Ok(())
}

/// Builds the anomaly matrix and event list for `scenario`.
///
/// `deterministic` is needed by shift anomalies, which move a fraction of the
/// donor's deterministic traffic; `means` scale every other anomaly type.
pub fn inject_anomalies<R: Rng + ?Sized>(
    scenario: &Scenario,
    deterministic: &TrafficMatrix,
    means: &[f64],
    rng: &mut R,
) -> Result<(TrafficMatrix, Vec<AnomalyEvent>)> {
    let n = scenario.n_nodes;
    let periods = scenario.periods;
    let flows = n * n;
    if deterministic.shape() != (periods, flows) || means.len() != flows {
        return Err(Error::Dimension(format!(
            "expected a {periods}x{flows} deterministic matrix and {flows} means"
        )));
    }
    let delta = scenario.anomaly_delta;
    let dt = scenario.dt_minutes;
    let mut anomaly = TrafficMatrix::zeros(periods, flows);
    let mut events = Vec::new();

    let single_flow = |kind: &'static str,
                           count: usize,
                           minutes: f64,
                           shape: Shape,
                           anomaly: &mut TrafficMatrix,
                           events: &mut Vec<AnomalyEvent>,
                           rng: &mut R|
     -> Result<()> {
        let duration = periods_for(minutes, dt);
        check_window(duration, periods)?;
        let profile = shape.profile(duration);
        for _ in 0..count {
            let flow = rng.random_range(0..flows);
            let start = random_start(rng, periods, duration);
            let peak = delta * means[flow];
            for (i, s) in profile.iter().enumerate() {
                anomaly[(start + i, flow)] += peak * s;
            }
            events.push(AnomalyEvent {
                kind,
                flows: vec![flow],
                start,
                duration,
                shape,
                delta,
                peaks: vec![peak],
                moved: None,
            });
        }
        Ok(())
    };

    let fan_in_events = |kind: &'static str,
                             count: usize,
                             fan_in: usize,
                             minutes: f64,
                             shape: Shape,
                             anomaly: &mut TrafficMatrix,
                             events: &mut Vec<AnomalyEvent>,
                             rng: &mut R|
     -> Result<()> {
        if fan_in == 0 || fan_in + 1 > n {
            return Err(Error::Topology(format!(
                "{kind} needs {fan_in} sources distinct from the destination, network has {n} nodes"
            )));
        }
        let duration = periods_for(minutes, dt);
        check_window(duration, periods)?;
        let profile = shape.profile(duration);
        for _ in 0..count {
            let destination = rng.random_range(0..n);
            let start = random_start(rng, periods, duration);
            let sources: Vec<usize> = index::sample(rng, n - 1, fan_in)
                .into_iter()
                .map(|s| if s >= destination { s + 1 } else { s })
                .collect();
            let affected: Vec<usize> = sources.iter().map(|s| s * n + destination).collect();
            let mut peaks = Vec::with_capacity(fan_in);
            for &flow in &affected {
                let peak = delta * means[flow];
                for (i, s) in profile.iter().enumerate() {
                    anomaly[(start + i, flow)] += peak * s;
                }
                peaks.push(peak);
            }
            events.push(AnomalyEvent {
                kind,
                flows: affected,
                start,
                duration,
                shape,
                delta,
                peaks,
                moved: None,
            });
        }
        Ok(())
    };

    match &scenario.anomaly {
        AnomalyKind::None => {}
        AnomalyKind::RandomPoint { ratio } => {
            if !(0.0..=1.0).contains(ratio) {
                return Err(Error::Parameter(format!("random point ratio {ratio} outside [0, 1]")));
            }
            let count = (ratio * (periods * flows) as f64).floor() as usize;
            single_flow("random", count, dt, Shape::Impulse, &mut anomaly, &mut events, rng)?;
        }
        AnomalyKind::Alpha { count } => {
            single_flow("alpha", *count, 30.0, Shape::Step, &mut anomaly, &mut events, rng)?;
        }
        AnomalyKind::Dos { count } => {
            single_flow(
                "dos",
                *count,
                30.0,
                Shape::SymmetricTriangle,
                &mut anomaly,
                &mut events,
                rng,
            )?;
        }
        AnomalyKind::Ddos { count, fan_in } => {
            fan_in_events(
                "ddos",
                *count,
                *fan_in,
                30.0,
                Shape::SymmetricTriangle,
                &mut anomaly,
                &mut events,
                rng,
            )?;
        }
        AnomalyKind::FlashCrowd { count, fan_in } => {
            fan_in_events(
                "flash",
                *count,
                *fan_in,
                150.0,
                Shape::AsymmetricTriangle,
                &mut anomaly,
                &mut events,
                rng,
            )?;
        }
        AnomalyKind::Shift { count } => {
            if n < 2 {
                return Err(Error::Topology("shift anomalies need at least 2 nodes".into()));
            }
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Parameter(format!(
                    "shift fraction must lie in (0, 1), got {delta}"
                )));
            }
            let duration = periods_for(600.0, dt);
            check_window(duration, periods)?;
            for _ in 0..*count {
                let (src1, dst1) = (rng.random_range(0..n), rng.random_range(0..n));
                let src2 = (src1 + rng.random_range(1..n)) % n;
                let dst2 = (dst1 + rng.random_range(1..n)) % n;
                let donor = src1 * n + dst1;
                let recipient = src2 * n + dst2;
                let start = random_start(rng, periods, duration);
                let moved: Vec<f64> = (start..start + duration)
                    .map(|t| delta * deterministic[(t, donor)])
                    .collect();
                for (i, v) in moved.iter().enumerate() {
                    anomaly[(start + i, recipient)] += v;
                    anomaly[(start + i, donor)] -= v;
                }
                let peak = moved.iter().cloned().fold(0.0, f64::max);
                events.push(AnomalyEvent {
                    kind: "shift",
                    flows: vec![donor, recipient],
                    start,
                    duration,
                    shape: Shape::Step,
                    delta,
                    peaks: vec![peak, peak],
                    moved: Some(moved),
                });
            }
        }
    }
    Ok((anomaly, events))
}
