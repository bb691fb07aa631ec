use super::{dwt_forward, WaveletSpec};
use crate::error::{Error, Result};

/// Gaussian consistency constant for the median absolute deviation.
pub const MAD_TO_SIGMA: f64 = 0.6745;

/// Median; even-length samples use the mean of the two central order statistics.
///
/// Returns `None` for an empty sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Median absolute deviation about the median.
pub fn mad(values: &[f64]) -> Option<f64> {
    let center = median(values)?;
    let deviations: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    median(&deviations)
}

/// Robust noise standard deviation of one flow from its finest-level detail coefficients.
pub fn estimate_noise_sigma(signal: &[f64], spec: &WaveletSpec) -> Result<f64> {
    let len = signal.len();
    if len < 4 || len % 2 != 0 {
        return Err(Error::TooShort { len, min: 4 });
    }
    let coeffs = dwt_forward(signal, spec, 1)?;
    let finest = coeffs.detail(1).expect("depth-1 pyramid has a level-1 detail");
    Ok(mad(finest).unwrap_or(0.0) / MAD_TO_SIGMA)
}

/// Per-flow noise scales and the box half-width multiplier.
///
/// Every wavelet level of flow `p` is weighted by `1 / sigma[p]`, so the box
/// constraint reduces to clamping raw coefficients into `[-delta*sigma[p], delta*sigma[p]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseScale {
    sigma: Vec<f64>,
    delta: f64,
}

impl NoiseScale {
    pub fn new(sigma: Vec<f64>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("box multiplier must be positive, got {delta}")));
        }
        if let Some(bad) = sigma.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::Parameter(format!("noise scale must be nonnegative, got {bad}")));
        }
        Ok(NoiseScale { sigma, delta })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Clamp half-width `delta * sigma[p]` for flow `p`.
    pub fn half_width(&self, p: usize) -> f64 {
        self.delta * self.sigma[p]
    }
}
