//! Traffic matrix decomposers: the multiresolution-constrained stable PCP and
//! the PCA, PCP and SPCP baselines it is compared against.

mod apg;
mod baselines;
mod mrc;

pub use apg::spectral_norm;
pub use baselines::{decompose_pca, decompose_pcp, decompose_spcp, spcp_final_penalty};
pub use mrc::decompose_spcp_mrc;

use crate::error::{Error, Result};
use crate::wavelet::{WaveletFamily, WaveletSpec};
use crate::TrafficMatrix;
use serde::{Deserialize, Serialize};

/// Sparsity weight `1 / sqrt(max(T, P))`.
pub fn default_lambda(periods: usize, flows: usize) -> f64 {
    1.0 / (periods.max(flows).max(1) as f64).sqrt()
}

/// Parameters shared by the iterative decomposers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sparsity weight; `None` selects [`default_lambda`].
    pub lambda: Option<f64>,
    /// Box half-width in units of the per-flow noise scale.
    pub delta: f64,
    /// Depth of the smooth subspace holding the deterministic component.
    pub q: usize,
    /// Wavelet depth at which the noise box is imposed.
    pub box_depth: usize,
    pub wavelet: WaveletFamily,
    /// Continuation factor for the relaxation parameter.
    pub eta: f64,
    /// Floor of the relaxation parameter relative to its starting value.
    pub mu_floor_factor: f64,
    pub max_iters: usize,
    /// Relative iterate change below which the run stops once the floor is reached.
    pub tol: f64,
    /// Record smooth-subspace and box violations for every iterate.
    pub check_invariants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: None,
            delta: 1.96,
            q: 2,
            box_depth: 5,
            wavelet: WaveletFamily::Db4,
            eta: 0.9,
            mu_floor_factor: 1e-5,
            max_iters: 1000,
            tol: 1e-6,
            check_invariants: false,
        }
    }
}

impl SolverConfig {
    pub fn wavelet_spec(&self) -> WaveletSpec {
        WaveletSpec::new(self.wavelet)
    }

    pub fn lambda_for(&self, periods: usize, flows: usize) -> f64 {
        self.lambda
            .unwrap_or_else(|| default_lambda(periods, flows))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if !(self.mu_floor_factor > 0.0 && self.mu_floor_factor <= 1.0) {
            return bad(format!(
                "mu_floor_factor must lie in (0, 1], got {}",
                self.mu_floor_factor
            ));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        let max = self.wavelet_spec().max_levels();
        for (name, depth) in [("q", self.q), ("box_depth", self.box_depth)] {
            if depth == 0 || depth > max {
                return bad(format!("{name} must lie in 1..={max}, got {depth}"));
            }
        }
        Ok(())
    }

    /// Deepest wavelet level the decomposition needs; `T` must be divisible by `2^depth`.
    pub fn required_depth(&self) -> usize {
        self.q.max(self.box_depth)
    }
}

/// What remains of `X` after the deterministic part is removed.
#[derive(Clone, Debug, PartialEq)]
pub enum Remainder {
    /// Separate anomaly and noise estimates.
    AnomalyNoise {
        anomaly: TrafficMatrix,
        noise: TrafficMatrix,
    },
    /// Anomaly estimate only; the method has no noise component.
    Anomaly(TrafficMatrix),
    /// Undifferentiated residual `X - A`.
    Residual(TrafficMatrix),
}

/// A split of a traffic matrix into deterministic traffic and the remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub deterministic: TrafficMatrix,
    pub remainder: Remainder,
}

impl Decomposition {
    pub fn anomaly(&self) -> Option<&TrafficMatrix> {
        match &self.remainder {
            Remainder::AnomalyNoise { anomaly, .. } | Remainder::Anomaly(anomaly) => Some(anomaly),
            Remainder::Residual(_) => None,
        }
    }

    pub fn noise(&self) -> Option<&TrafficMatrix> {
        match &self.remainder {
            Remainder::AnomalyNoise { noise, .. } => Some(noise),
            _ => None,
        }
    }

    pub fn residual(&self) -> Option<&TrafficMatrix> {
        match &self.remainder {
            Remainder::Residual(r) => Some(r),
            _ => None,
        }
    }

    /// Sum of all components.
    pub fn total(&self) -> TrafficMatrix {
        let mut sum = self.deterministic.clone();
        match &self.remainder {
            Remainder::AnomalyNoise { anomaly, noise } => {
                sum += anomaly;
                sum += noise;
            }
            Remainder::Anomaly(m) | Remainder::Residual(m) => sum += m,
        }
        sum
    }
}

/// One completed iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `mu * g + f` at the new iterate.
    pub objective: f64,
    /// `||X - sum of blocks||_F / ||X||_F`.
    pub residual: f64,
    pub mu: f64,
    pub rank: usize,
    pub nnz: usize,
    /// Largest detail coefficient of the deterministic block at levels `1..=q`.
    pub smooth_violation: Option<f64>,
    /// Largest excess of a noise coefficient over its box half-width.
    pub box_violation: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub mu0: f64,
    pub mu_floor: f64,
    pub lambda: f64,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.residual)
    }
}

pub(crate) fn check_finite(x: &TrafficMatrix) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}
