use super::apg::{self, ApgSetup, ProxStep};
use super::{check_finite, Decomposition, Remainder, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::operators::{box_violation, constrained_svt_shrunk, project_box, soft_threshold};
use crate::wavelet::{estimate_noise_sigma, max_detail_magnitude, NoiseScale};
use crate::TrafficMatrix;

/// Lipschitz constant of the gradient of `0.5 ||A + E + N - X||_F^2`.
const THREE_BLOCK_LIPSCHITZ: f64 = 3.0;

/// Per-flow noise scales estimated from the observed columns of `x`.
pub(crate) fn flow_noise_sigmas(x: &TrafficMatrix, config: &SolverConfig) -> Result<Vec<f64>> {
    let spec = config.wavelet_spec();
    let rows = x.nrows();
    (0..x.ncols())
        .map(|p| estimate_noise_sigma(&x.as_slice()[p * rows..(p + 1) * rows], &spec))
        .collect()
}

/// Splits `x` into smooth low-rank, sparse and wavelet-box-bounded noise parts.
///
/// Deterministic traffic is confined to the depth-`q` approximation space, the
/// noise block to the box of half-width `delta * sigma_p` on every depth-`box_depth`
/// wavelet coefficient, with `sigma_p` the MAD estimate from column `p` of `x`.
pub fn decompose_spcp_mrc(
    x: &TrafficMatrix,
    config: &SolverConfig,
) -> Result<(Decomposition, SolverTrace)> {
    config.validate()?;
    check_finite(x)?;
    let (rows, cols) = x.shape();
    if cols < 2 {
        return Err(Error::Dimension(format!("need at least 2 flows, got {cols}")));
    }
    let spec = config.wavelet_spec();
    spec.check_depth(rows, config.required_depth())?;

    let scale = NoiseScale::new(flow_noise_sigmas(x, config)?, config.delta)?;
    let lambda = config.lambda_for(rows, cols);
    let mu0 = 0.99 * apg::spectral_norm(x);
    let setup = ApgSetup::new(
        config,
        THREE_BLOCK_LIPSCHITZ,
        mu0,
        config.mu_floor_factor * mu0,
        lambda,
    );
    let (q, box_depth) = (config.q, config.box_depth);

    let (blocks, mut trace) = apg::run(x, 3, &setup, |g, mu| {
        let low_rank = constrained_svt_shrunk(&g[0], mu / setup.lipschitz, &spec, q)?;
        let anomaly = soft_threshold(&g[1], lambda * mu / setup.lipschitz);
        let noise = project_box(&g[2], &scale, &spec, box_depth)?;
        let l1: f64 = anomaly.iter().map(|v| v.abs()).sum();
        let (smooth_violation, box_excess) = if config.check_invariants {
            (
                Some(max_detail_magnitude(&low_rank.matrix, &spec, q)?),
                Some(box_violation(&noise, &scale, &spec, box_depth)?),
            )
        } else {
            (None, None)
        };
        if cfg!(debug_assertions) {
            let smooth = max_detail_magnitude(&low_rank.matrix, &spec, q)?;
            debug_assert!(smooth <= 1e-8 * low_rank.matrix.norm().max(1.0));
            let excess = box_violation(&noise, &scale, &spec, box_depth)?;
            let widest = scale.sigma().iter().fold(1.0_f64, |a, b| a.max(*b)) * scale.delta();
            debug_assert!(excess <= 1e-10 * widest);
        }
        Ok(ProxStep {
            penalty: low_rank.nuclear_norm() + lambda * l1,
            rank: low_rank.rank(),
            nnz: anomaly.iter().filter(|v| **v != 0.0).count(),
            blocks: vec![low_rank.matrix, anomaly, noise],
            smooth_violation,
            box_violation: box_excess,
        })
    })?;

    let [deterministic, anomaly, noise]: [TrafficMatrix; 3] =
        blocks.try_into().expect("three blocks");
    if let Some(last) = trace.records.last_mut() {
        if last.smooth_violation.is_none() {
            last.smooth_violation = Some(max_detail_magnitude(&deterministic, &spec, q)?);
            last.box_violation = Some(box_violation(&noise, &scale, &spec, box_depth)?);
        }
    }
    Ok((
        Decomposition {
            deterministic,
            remainder: Remainder::AnomalyNoise { anomaly, noise },
        },
        trace,
    ))
}
