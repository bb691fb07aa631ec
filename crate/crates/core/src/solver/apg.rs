//! Accelerated proximal gradient with Nesterov momentum and continuation on the
//! relaxation parameter, shared by every iterative decomposer.

use super::{IterationRecord, SolverConfig, SolverTrace};
use crate::error::Result;
use crate::TrafficMatrix;
use nalgebra::{DMatrix, DVector};

/// Largest singular value by power iteration on `X^T X`, started from the
/// normalised all-ones vector and run to `1e-6` relative change.
pub fn spectral_norm(x: &TrafficMatrix) -> f64 {
    const REL_TOL: f64 = 1e-6;
    const MAX_ITERS: usize = 10_000;
    let cols = x.ncols();
    if cols == 0 || x.nrows() == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(cols, 1.0 / (cols as f64).sqrt());
    let mut sigma = 0.0;
    for _ in 0..MAX_ITERS {
        let xv = x * &v;
        let next = xv.norm();
        if next == 0.0 {
            return 0.0;
        }
        let w = x.transpose() * xv;
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return next;
        }
        v = w / w_norm;
        if (next - sigma).abs() <= REL_TOL * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Output of one proximal step over all blocks.
pub(crate) struct ProxStep {
    pub blocks: Vec<TrafficMatrix>,
    /// Nonsmooth part `g` (without the factor `mu`) at the new blocks.
    pub penalty: f64,
    pub rank: usize,
    pub nnz: usize,
    pub smooth_violation: Option<f64>,
    pub box_violation: Option<f64>,
}

pub(crate) struct ApgSetup {
    pub lipschitz: f64,
    pub mu0: f64,
    pub mu_floor: f64,
    pub eta: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub lambda: f64,
}

impl ApgSetup {
    pub fn new(config: &SolverConfig, lipschitz: f64, mu0: f64, mu_floor: f64, lambda: f64) -> Self {
        ApgSetup {
            lipschitz,
            mu0,
            mu_floor,
            eta: config.eta,
            max_iters: config.max_iters,
            tol: config.tol,
            lambda,
        }
    }

    /// `max(eta^k mu0, mu_floor)`.
    pub fn mu_at(&self, k: usize) -> f64 {
        let k = i32::try_from(k).unwrap_or(i32::MAX);
        (self.eta.powi(k) * self.mu0).max(self.mu_floor)
    }
}

fn frobenius_blocks(blocks: &[TrafficMatrix]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// Runs the iteration from all-zero blocks. `prox` receives the gradient points
/// and the current relaxation parameter and returns the next iterate.
pub(crate) fn run<F>(
    x: &TrafficMatrix,
    n_blocks: usize,
    setup: &ApgSetup,
    mut prox: F,
) -> Result<(Vec<TrafficMatrix>, SolverTrace)>
where
    F: FnMut(&[TrafficMatrix], f64) -> Result<ProxStep>,
{
    let (rows, cols) = x.shape();
    let x_norm = x.norm();
    let mut previous: Vec<TrafficMatrix> = vec![DMatrix::zeros(rows, cols); n_blocks];
    let mut current = previous.clone();
    let (mut t_prev, mut t) = (1.0_f64, 1.0_f64);
    let mut trace = SolverTrace {
        mu0: setup.mu0,
        mu_floor: setup.mu_floor,
        lambda: setup.lambda,
        ..SolverTrace::default()
    };

    for k in 0..setup.max_iters {
        let mu = setup.mu_at(k);
        let momentum = (t_prev - 1.0) / t;
        let momentum_points: Vec<TrafficMatrix> = current
            .iter()
            .zip(&previous)
            .map(|(c, p)| c + (c - p) * momentum)
            .collect();
        let mut gradient = -x;
        for y in &momentum_points {
            gradient += y;
        }
        let step_size = 1.0 / setup.lipschitz;
        let gradient_points: Vec<TrafficMatrix> = momentum_points
            .iter()
            .map(|y| y - &gradient * step_size)
            .collect();

        let step = prox(&gradient_points, mu)?;

        let mut misfit = -x;
        for b in &step.blocks {
            misfit += b;
        }
        let misfit_norm = misfit.norm();
        let change = step
            .blocks
            .iter()
            .zip(&current)
            .map(|(n, c)| (n - c).norm_squared())
            .sum::<f64>()
            .sqrt();
        let change = change / frobenius_blocks(&current).max(1.0);

        trace.records.push(IterationRecord {
            iteration: k + 1,
            objective: mu * step.penalty + 0.5 * misfit_norm * misfit_norm,
            residual: if x_norm > 0.0 { misfit_norm / x_norm } else { misfit_norm },
            mu,
            rank: step.rank,
            nnz: step.nnz,
            smooth_violation: step.smooth_violation,
            box_violation: step.box_violation,
        });

        previous = std::mem::replace(&mut current, step.blocks);
        t_prev = t;
        t = (1.0 + (4.0 * t * t + 1.0).sqrt()) / 2.0;

        if mu <= setup.mu_floor && change < setup.tol {
            trace.converged = true;
            break;
        }
    }
    Ok((current, trace))
}
