//! Proximal maps used by the accelerated proximal gradient iterations.

use crate::error::{Error, Result};
use crate::wavelet::{
    approximation_coefficients, dwt_forward, dwt_inverse, synthesize_from_approximation,
    NoiseScale, WaveletSpec,
};
use crate::TrafficMatrix;
use nalgebra::{DMatrix, DVector};

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

const SVD_MAX_ITERATIONS: usize = 10_000;

/// Thin singular value decomposition `M = U diag(S) V^T`, singular values nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        scaled_product(&self.u, self.s.as_slice(), &self.v)
    }

    pub fn rank(&self) -> usize {
        numerical_rank(self.s.as_slice())
    }
}

/// `U[:, ..k] diag(s) V[:, ..k]^T` where `k = s.len()`.
fn scaled_product(u: &DMatrix<f64>, s: &[f64], v: &DMatrix<f64>) -> DMatrix<f64> {
    let k = s.len();
    if k == 0 {
        return DMatrix::zeros(u.nrows(), v.nrows());
    }
    let mut us = u.columns(0, k).into_owned();
    for (j, sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(*sj);
    }
    us * v.columns(0, k).transpose()
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        let r = rows.min(cols);
        return Ok(SvdFactors {
            u: DMatrix::zeros(rows, r),
            s: DVector::zeros(r),
            v: DMatrix::zeros(cols, r),
        });
    }
    // Strongly rectangular inputs are reduced to a square triangular factor first.
    if rows >= 2 * cols {
        let qr = m.clone().qr();
        let inner = square_svd(&qr.r(), rows, cols)?;
        return Ok(SvdFactors {
            u: qr.q() * inner.u,
            s: inner.s,
            v: inner.v,
        });
    }
    if cols >= 2 * rows {
        let t = thin_svd(&m.transpose())?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    square_svd(m, rows, cols)
}

fn square_svd(m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<SvdFactors> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::Svd { rows, cols })?;
    let u = svd.u.ok_or(Error::Svd { rows, cols })?;
    let v_t = svd.v_t.ok_or(Error::Svd { rows, cols })?;
    Ok(SvdFactors {
        u,
        s: svd.singular_values,
        v: v_t.transpose(),
    })
}

/// Number of singular values above [`RANK_TOLERANCE`] times the largest.
pub fn numerical_rank(singular_values: &[f64]) -> usize {
    let largest = singular_values.iter().cloned().fold(0.0, f64::max);
    if largest <= 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .filter(|s| **s > RANK_TOLERANCE * largest)
        .count()
}

/// Entrywise `sign(m) * max(|m| - eps, 0)`.
pub fn soft_threshold(m: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    m.map(|v| shrink(v, eps))
}

#[inline]
pub(crate) fn shrink(v: f64, eps: f64) -> f64 {
    if v > eps {
        v - eps
    } else if v < -eps {
        v + eps
    } else {
        0.0
    }
}

/// Result of a singular value shrinkage: the matrix and its (shrunk, positive) singular values.
#[derive(Clone, Debug)]
pub struct Shrunk {
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

impl Shrunk {
    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.singular_values)
    }
}

pub(crate) fn svt_shrunk(m: &DMatrix<f64>, tau: f64) -> Result<Shrunk> {
    check_threshold(tau)?;
    let f = thin_svd(m)?;
    let kept: Vec<f64> = f
        .s
        .iter()
        .map(|s| s - tau)
        .take_while(|s| *s > 0.0)
        .collect();
    Ok(Shrunk {
        matrix: scaled_product(&f.u, &kept, &f.v),
        singular_values: kept,
    })
}

/// Singular value thresholding: the minimiser of `tau ||A||_* + 0.5 ||A - M||_F^2`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    svt_shrunk(m, tau).map(|s| s.matrix)
}

pub(crate) fn constrained_svt_shrunk(
    g: &TrafficMatrix,
    tau: f64,
    spec: &WaveletSpec,
    q: usize,
) -> Result<Shrunk> {
    // Synthesis from scaling coefficients has orthonormal columns, so the SVD of
    // the projected matrix is the synthesis of the SVD of its coefficient matrix.
    let coeffs = approximation_coefficients(g, spec, q)?;
    let shrunk = svt_shrunk(&coeffs, tau)?;
    Ok(Shrunk {
        matrix: synthesize_from_approximation(&shrunk.matrix, spec, q),
        singular_values: shrunk.singular_values,
    })
}

/// Minimiser of `I_{V_q}(A) + tau ||A||_* + 0.5 ||A - G||_F^2`:
/// singular value thresholding of the projection of `G` onto the smooth subspace.
pub fn constrained_svt(
    g: &TrafficMatrix,
    tau: f64,
    spec: &WaveletSpec,
    q: usize,
) -> Result<TrafficMatrix> {
    constrained_svt_shrunk(g, tau, spec, q).map(|s| s.matrix)
}

fn check_threshold(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("threshold must be nonnegative, got {tau}")))
    }
}

fn check_box_shape(m: &TrafficMatrix, scale: &NoiseScale) -> Result<()> {
    if scale.sigma().len() != m.ncols() {
        return Err(Error::Dimension(format!(
            "noise scale has {} flows, matrix has {} columns",
            scale.sigma().len(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Euclidean projection onto the wavelet-domain box: every depth-`levels`
/// coefficient of column `p` is clamped into `[-delta*sigma_p, delta*sigma_p]`.
pub fn project_box(
    m: &TrafficMatrix,
    scale: &NoiseScale,
    spec: &WaveletSpec,
    levels: usize,
) -> Result<TrafficMatrix> {
    check_box_shape(m, scale)?;
    spec.check_depth(m.nrows(), levels)?;
    crate::wavelet::map_columns(m, |p, column| {
        let width = scale.half_width(p);
        if width == 0.0 {
            return Ok(vec![0.0; column.len()]);
        }
        let mut coeffs = dwt_forward(column, spec, levels)?;
        for c in coeffs.iter_mut() {
            *c = c.clamp(-width, width);
        }
        dwt_inverse(&coeffs, spec)
    })
}

/// Largest amount by which any wavelet coefficient exceeds its box half-width (0 when feasible).
pub fn box_violation(
    m: &TrafficMatrix,
    scale: &NoiseScale,
    spec: &WaveletSpec,
    levels: usize,
) -> Result<f64> {
    check_box_shape(m, scale)?;
    let rows = m.nrows();
    let mut worst: f64 = 0.0;
    for p in 0..m.ncols() {
        let coeffs = dwt_forward(&m.as_slice()[p * rows..(p + 1) * rows], spec, levels)?;
        let width = scale.half_width(p);
        for c in coeffs.iter() {
            worst = worst.max(c.abs() - width);
        }
    }
    Ok(worst)
}
