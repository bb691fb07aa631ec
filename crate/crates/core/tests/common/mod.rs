//! Reference implementations shared by the integration tests. Nothing here
//! calls the fast transforms or proximal maps of the library.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// One periodic analysis step as a dense `(n/2) x n` matrix:
/// row `k` holds `filter[i]` at column `(2k + i) mod n`.
pub fn step_matrix(filter: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n / 2, n);
    for k in 0..n / 2 {
        for (i, f) in filter.iter().enumerate() {
            m[(k, (2 * k + i) % n)] += f;
        }
    }
    m
}

/// Full orthogonal analysis matrix of a depth-`levels` transform, rows ordered
/// `[approx_J, detail_J, ..., detail_1]`.
pub fn analysis_matrix(low: &[f64], high: &[f64], n: usize, levels: usize) -> DMatrix<f64> {
    let mut rows: Vec<DMatrix<f64>> = Vec::new();
    let mut carry = DMatrix::<f64>::identity(n, n);
    let mut len = n;
    for _ in 0..levels {
        let h = step_matrix(low, len);
        let g = step_matrix(high, len);
        rows.push(&g * &carry);
        carry = &h * &carry;
        len /= 2;
    }
    rows.push(carry);
    rows.reverse();
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut out = DMatrix::zeros(total, n);
    let mut at = 0;
    for r in rows {
        out.rows_mut(at, r.nrows()).copy_from(&r);
        at += r.nrows();
    }
    out
}

/// `n x (n / 2^q)` matrix whose columns span the depth-`q` approximation space.
pub fn approximation_basis(low: &[f64], n: usize, q: usize) -> DMatrix<f64> {
    let mut carry = DMatrix::<f64>::identity(n, n);
    let mut len = n;
    for _ in 0..q {
        carry = step_matrix(low, len) * carry;
        len /= 2;
    }
    carry.transpose()
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `tau ||A||_* + 0.5 ||A - G||_F^2`.
pub fn svt_objective(a: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> f64 {
    tau * nuclear_norm(a) + 0.5 * (a - g).norm_squared()
}

/// Minimises `tau ||W C||_* + 0.5 ||W C - G||^2` over coefficient matrices `C`
/// by gradient descent on the factorisation `C = U V^T`, using
/// `||C||_* = min (||U||^2 + ||V||^2) / 2`. Returns `W C`.
pub fn factored_minimizer(w: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let r = w.ncols();
    let p = g.ncols();
    let rank = r.min(p);
    let wtg = w.transpose() * g;
    // balanced start from the unconstrained fit
    let mut u = DMatrix::from_fn(r, rank, |i, j| wtg[(i, j % p)] * 0.5 + if i == j { 1.0 } else { 0.0 });
    let mut v = DMatrix::from_fn(p, rank, |i, j| if i == j { 1.0 } else { 0.01 });
    let value = |u: &DMatrix<f64>, v: &DMatrix<f64>| {
        let fit = w * (u * v.transpose()) - g;
        0.5 * tau * (u.norm_squared() + v.norm_squared()) + 0.5 * fit.norm_squared()
    };
    let mut f = value(&u, &v);
    let mut step = 1e-2;
    let mut stall = 0;
    for _ in 0..200_000 {
        let fit = w * (&u * v.transpose()) - g;
        let back = w.transpose() * &fit;
        let gu = &u * tau + &back * &v;
        let gv = &v * tau + back.transpose() * &u;
        let sq = gu.norm_squared() + gv.norm_squared();
        if sq == 0.0 {
            break;
        }
        loop {
            let nu = &u - &gu * step;
            let nv = &v - &gv * step;
            let nf = value(&nu, &nv);
            if nf <= f - 0.5 * step * sq {
                let improvement = f - nf;
                u = nu;
                v = nv;
                stall = if improvement <= 1e-15 * f.abs().max(1e-300) { stall + 1 } else { 0 };
                f = nf;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                return w * (&u * v.transpose());
            }
        }
        if stall > 50 {
            break;
        }
    }
    w * (&u * v.transpose())
}
