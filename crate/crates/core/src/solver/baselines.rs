use super::apg::{self, ApgSetup, ProxStep};
use super::mrc::flow_noise_sigmas;
use super::{check_finite, Decomposition, Remainder, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::operators::{soft_threshold, svt_shrunk, thin_svd};
use crate::wavelet::median;
use crate::TrafficMatrix;

const TWO_BLOCK_LIPSCHITZ: f64 = 2.0;

/// Rank-`k` truncated SVD of `x` (no mean removal) plus the residual.
pub fn decompose_pca(x: &TrafficMatrix, k: usize) -> Result<Decomposition> {
    check_finite(x)?;
    let (rows, cols) = x.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(Error::RankOutOfRange { k, rows, cols });
    }
    let f = thin_svd(x)?;
    let mut u = f.u.columns(0, k).into_owned();
    for j in 0..k {
        u.column_mut(j).scale_mut(f.s[j]);
    }
    let deterministic = u * f.v.columns(0, k).transpose();
    let residual = x - &deterministic;
    Ok(Decomposition {
        deterministic,
        remainder: Remainder::Residual(residual),
    })
}

fn low_rank_sparse(
    x: &TrafficMatrix,
    lambda: f64,
    config: &SolverConfig,
    mu_floor: impl FnOnce(f64) -> f64,
) -> Result<(TrafficMatrix, TrafficMatrix, SolverTrace)> {
    check_finite(x)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    let mu0 = 0.99 * apg::spectral_norm(x);
    let setup = ApgSetup::new(config, TWO_BLOCK_LIPSCHITZ, mu0, mu_floor(mu0), lambda);
    let (blocks, trace) = apg::run(x, 2, &setup, |g, mu| {
        let low_rank = svt_shrunk(&g[0], mu / setup.lipschitz)?;
        let sparse = soft_threshold(&g[1], lambda * mu / setup.lipschitz);
        let l1: f64 = sparse.iter().map(|v| v.abs()).sum();
        Ok(ProxStep {
            penalty: low_rank.nuclear_norm() + lambda * l1,
            rank: low_rank.rank(),
            nnz: sparse.iter().filter(|v| **v != 0.0).count(),
            blocks: vec![low_rank.matrix, sparse],
            smooth_violation: None,
            box_violation: None,
        })
    })?;
    let [a, e]: [TrafficMatrix; 2] = blocks.try_into().expect("two blocks");
    Ok((a, e, trace))
}

/// Principal component pursuit `min ||A||_* + lambda ||E||_1  s.t.  X = A + E`,
/// with the equality enforced by driving the relaxation parameter to its floor.
pub fn decompose_pcp(
    x: &TrafficMatrix,
    lambda: f64,
    config: &SolverConfig,
) -> Result<(Decomposition, SolverTrace)> {
    config.validate()?;
    let factor = config.mu_floor_factor;
    let (a, e, trace) = low_rank_sparse(x, lambda, config, |mu0| factor * mu0)?;
    Ok((
        Decomposition {
            deterministic: a,
            remainder: Remainder::Anomaly(e),
        },
        trace,
    ))
}

/// Final relaxation parameter for stable PCP: `sqrt(2 max(T, P)) * median(sigma_p)`.
pub fn spcp_final_penalty(x: &TrafficMatrix, config: &SolverConfig) -> Result<f64> {
    let sigmas = flow_noise_sigmas(x, config)?;
    let (rows, cols) = x.shape();
    Ok((2.0 * rows.max(cols) as f64).sqrt() * median(&sigmas).unwrap_or(0.0))
}

/// Stable PCP `min ||A||_* + lambda ||E||_1 + ||X - A - E||_F^2 / (2 mu_f)`;
/// the noise estimate is `X - A - E`.
pub fn decompose_spcp(
    x: &TrafficMatrix,
    lambda: f64,
    config: &SolverConfig,
) -> Result<(Decomposition, SolverTrace)> {
    config.validate()?;
    check_finite(x)?;
    let spec = config.wavelet_spec();
    // the noise scale is read from level-1 details only
    spec.check_depth(x.nrows(), 1)?;
    let final_penalty = spcp_final_penalty(x, config)?;
    let (a, e, trace) = low_rank_sparse(x, lambda, config, |_| final_penalty)?;
    let noise = x - &a - &e;
    Ok((
        Decomposition {
            deterministic: a,
            remainder: Remainder::AnomalyNoise { anomaly: e, noise },
        },
        trace,
    ))
}
