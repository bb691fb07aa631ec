//! Periodic orthogonal discrete wavelet transform.
//!
//! Coefficients follow the pyramid layout `[a_J, d_J, d_{J-1}, ..., d_1]`.
//! With periodic extension and an orthonormal filter pair the transform is an
//! orthogonal change of basis, so projections and box clamps performed on the
//! coefficients are exact Euclidean operations on the signal.

mod filters;
mod noise;

pub use filters::{quadrature_mirror, WaveletFamily};
pub use noise::{estimate_noise_sigma, mad, median, NoiseScale};

use crate::error::{Error, Result};
use crate::TrafficMatrix;
use serde::{Deserialize, Serialize};

/// Signal extension rule at the ends of a finite signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Default cap on the decomposition depth.
pub const DEFAULT_MAX_LEVELS: usize = 10;

/// An orthonormal analysis filter pair plus boundary rule and depth limit.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletSpec {
    family: WaveletFamily,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    boundary: Boundary,
    max_levels: usize,
}

impl WaveletSpec {
    pub fn new(family: WaveletFamily) -> Self {
        Self::with_max_levels(family, DEFAULT_MAX_LEVELS)
    }

    pub fn with_max_levels(family: WaveletFamily, max_levels: usize) -> Self {
        let lowpass = family.lowpass().to_vec();
        let highpass = quadrature_mirror(&lowpass);
        WaveletSpec {
            family,
            lowpass,
            highpass,
            boundary: Boundary::Periodic,
            max_levels: max_levels.max(1),
        }
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn max_levels(&self) -> usize {
        self.max_levels
    }

    /// Checks that a length-`len` signal admits a `levels`-deep periodic pyramid.
    pub fn check_depth(&self, len: usize, levels: usize) -> Result<()> {
        if levels == 0 {
            return Err(Error::ZeroLevels);
        }
        if levels > self.max_levels {
            return Err(Error::TooManyLevels {
                levels,
                max: self.max_levels,
            });
        }
        if len == 0 || levels >= usize::BITS as usize || len % (1usize << levels) != 0 {
            return Err(Error::NotDivisible { len, levels });
        }
        Ok(())
    }

    /// One analysis step: `signal` (even length) into approximation and detail halves.
    fn analyze_step(&self, signal: &[f64], approx: &mut [f64], mut detail: Option<&mut [f64]>) {
        let n = signal.len();
        let taps = self.lowpass.len();
        debug_assert_eq!(approx.len(), n / 2);
        for k in 0..n / 2 {
            let base = 2 * k;
            let (mut a, mut d) = (0.0, 0.0);
            if base + taps <= n {
                let window = &signal[base..base + taps];
                for ((x, h), g) in window.iter().zip(&self.lowpass).zip(&self.highpass) {
                    a += h * x;
                    d += g * x;
                }
            } else {
                for (i, (h, g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                    let x = signal[(base + i) % n];
                    a += h * x;
                    d += g * x;
                }
            }
            approx[k] = a;
            if let Some(detail) = detail.as_deref_mut() {
                detail[k] = d;
            }
        }
    }

    /// One synthesis step; `detail` of `None` means all-zero details.
    fn synthesize_step(&self, approx: &[f64], detail: Option<&[f64]>, out: &mut [f64]) {
        let n = 2 * approx.len();
        let taps = self.lowpass.len();
        debug_assert_eq!(out.len(), n);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &a) in approx.iter().enumerate() {
            let d = detail.map_or(0.0, |d| d[k]);
            let base = 2 * k;
            if base + taps <= n {
                let window = &mut out[base..base + taps];
                for ((o, h), g) in window.iter_mut().zip(&self.lowpass).zip(&self.highpass) {
                    *o += h * a + g * d;
                }
            } else {
                for (i, (h, g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                    out[(base + i) % n] += h * a + g * d;
                }
            }
        }
    }

    /// Level-`levels` scaling coefficients only (details are never formed).
    pub(crate) fn approximation(&self, signal: &[f64], levels: usize) -> Vec<f64> {
        let mut current = signal.to_vec();
        for _ in 0..levels {
            let mut next = vec![0.0; current.len() / 2];
            self.analyze_step(&current, &mut next, None);
            current = next;
        }
        current
    }

    /// Synthesises a signal from level-`levels` scaling coefficients and zero details.
    pub(crate) fn synthesize_approximation(&self, approx: &[f64], levels: usize) -> Vec<f64> {
        let mut current = approx.to_vec();
        for _ in 0..levels {
            let mut next = vec![0.0; current.len() * 2];
            self.synthesize_step(&current, None, &mut next);
            current = next;
        }
        current
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec::new(WaveletFamily::Db4)
    }
}

/// Multi-level pyramid of one signal.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiResolutionCoefficients {
    /// Level-J scaling coefficients.
    pub approx: Vec<f64>,
    /// Detail coefficients ordered from level J down to level 1.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
}

impl MultiResolutionCoefficients {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail coefficients of `level` (1 = finest).
    pub fn detail(&self, level: usize) -> Option<&[f64]> {
        let depth = self.levels();
        if level == 0 || level > depth {
            return None;
        }
        Some(&self.details[depth - level])
    }

    /// All coefficients as one vector `[a_J, d_J, ..., d_1]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.original_length);
        flat.extend_from_slice(&self.approx);
        for d in &self.details {
            flat.extend_from_slice(d);
        }
        flat
    }

    /// Inverse of [`to_flat`](Self::to_flat) for a length-`len` signal at depth `levels`.
    pub fn from_flat(flat: &[f64], levels: usize) -> Self {
        let len = flat.len();
        let mut offset = len >> levels;
        let approx = flat[..offset].to_vec();
        let mut details = Vec::with_capacity(levels);
        for j in (1..=levels).rev() {
            let width = len >> j;
            details.push(flat[offset..offset + width].to_vec());
            offset += width;
        }
        MultiResolutionCoefficients {
            approx,
            details,
            original_length: len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.approx.iter().chain(self.details.iter().flatten())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.approx
            .iter_mut()
            .chain(self.details.iter_mut().flatten())
    }

    pub fn energy(&self) -> f64 {
        self.iter().map(|c| c * c).sum()
    }
}

/// Forward transform of `signal` to depth `levels`.
pub fn dwt_forward(
    signal: &[f64],
    spec: &WaveletSpec,
    levels: usize,
) -> Result<MultiResolutionCoefficients> {
    spec.check_depth(signal.len(), levels)?;
    let mut current = signal.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let half = current.len() / 2;
        let mut approx = vec![0.0; half];
        let mut detail = vec![0.0; half];
        spec.analyze_step(&current, &mut approx, Some(&mut detail));
        details.push(detail);
        current = approx;
    }
    details.reverse();
    Ok(MultiResolutionCoefficients {
        approx: current,
        details,
        original_length: signal.len(),
    })
}

/// Inverse transform.
pub fn dwt_inverse(coeffs: &MultiResolutionCoefficients, spec: &WaveletSpec) -> Result<Vec<f64>> {
    let levels = coeffs.levels();
    let len = coeffs.original_length;
    spec.check_depth(len, levels)?;
    let expected = len >> levels;
    if coeffs.approx.len() != expected {
        return Err(Error::LevelLength {
            level: levels,
            expected,
            found: coeffs.approx.len(),
        });
    }
    let mut current = coeffs.approx.clone();
    for (i, detail) in coeffs.details.iter().enumerate() {
        let level = levels - i;
        let expected = len >> level;
        if detail.len() != expected {
            return Err(Error::LevelLength {
                level,
                expected,
                found: detail.len(),
            });
        }
        let mut next = vec![0.0; current.len() * 2];
        spec.synthesize_step(&current, Some(detail), &mut next);
        current = next;
    }
    Ok(current)
}

/// Applies `f` to every column of `m` and collects the results into a new matrix.
pub(crate) fn map_columns<F>(m: &TrafficMatrix, mut f: F) -> Result<TrafficMatrix>
where
    F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
{
    let rows = m.nrows();
    let mut out = TrafficMatrix::zeros(rows, m.ncols());
    for p in 0..m.ncols() {
        let column = &m.as_slice()[p * rows..(p + 1) * rows];
        let mapped = f(p, column)?;
        out.as_mut_slice()[p * rows..(p + 1) * rows].copy_from_slice(&mapped);
    }
    Ok(out)
}

/// Orthogonal projection of every column onto the depth-`q` approximation space.
pub fn project_smooth(x: &TrafficMatrix, spec: &WaveletSpec, q: usize) -> Result<TrafficMatrix> {
    spec.check_depth(x.nrows(), q)?;
    map_columns(x, |_, column| {
        let approx = spec.approximation(column, q);
        Ok(spec.synthesize_approximation(&approx, q))
    })
}

/// Depth-`q` scaling coefficients of every column, as an `(T / 2^q) x P` matrix.
pub fn approximation_coefficients(
    x: &TrafficMatrix,
    spec: &WaveletSpec,
    q: usize,
) -> Result<TrafficMatrix> {
    let rows = x.nrows();
    spec.check_depth(rows, q)?;
    let short = rows >> q;
    let mut out = TrafficMatrix::zeros(short, x.ncols());
    for p in 0..x.ncols() {
        let approx = spec.approximation(&x.as_slice()[p * rows..(p + 1) * rows], q);
        out.as_mut_slice()[p * short..(p + 1) * short].copy_from_slice(&approx);
    }
    Ok(out)
}

/// Inverse of [`approximation_coefficients`] with all details set to zero.
pub fn synthesize_from_approximation(
    coeffs: &TrafficMatrix,
    spec: &WaveletSpec,
    q: usize,
) -> TrafficMatrix {
    let short = coeffs.nrows();
    let rows = short << q;
    let mut out = TrafficMatrix::zeros(rows, coeffs.ncols());
    for p in 0..coeffs.ncols() {
        let signal =
            spec.synthesize_approximation(&coeffs.as_slice()[p * short..(p + 1) * short], q);
        out.as_mut_slice()[p * rows..(p + 1) * rows].copy_from_slice(&signal);
    }
    out
}

/// Largest absolute detail coefficient at levels `1..=q` over all columns.
pub fn max_detail_magnitude(x: &TrafficMatrix, spec: &WaveletSpec, q: usize) -> Result<f64> {
    let rows = x.nrows();
    let mut worst: f64 = 0.0;
    for p in 0..x.ncols() {
        let coeffs = dwt_forward(&x.as_slice()[p * rows..(p + 1) * rows], spec, q)?;
        for d in coeffs.details.iter().flatten() {
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}
