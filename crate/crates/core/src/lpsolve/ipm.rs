//! Mehrotra predictor-corrector on the normal equations `A D A^T dy = r`,
//! `D = X S^{-1}`. `A` is assumed to have full row rank.

use alloc::vec;
use alloc::vec::Vec;

use super::SolverConfig;
use crate::linalg::{dot, norm_inf, DenseMatrix, Lu};

pub(super) struct IpmOutcome {
    pub converged: bool,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub iterations: usize,
}

/// Iterates beyond this magnitude mean the optimal set is unbounded or the
/// program is infeasible; either way the simplex fallback decides.
const DIVERGENCE: f64 = 1e14;

pub(super) fn solve(a: &DenseMatrix, b: &[f64], c: &[f64], cfg: &SolverConfig) -> IpmOutcome {
    let (m, p) = (a.rows(), a.cols());
    let give_up = |x: Vec<f64>, lambda: Vec<f64>, iterations| IpmOutcome {
        converged: false,
        x,
        lambda,
        iterations,
    };

    let Some((mut x, mut lambda, mut s)) = starting_point(a, b, c) else {
        return give_up(vec![0.0; p], vec![0.0; m], 0);
    };

    let b_scale = 1.0 + norm_inf(b);
    let c_scale = 1.0 + norm_inf(c);

    for iter in 0..cfg.max_iters {
        let mut rb = a.mul_vec(&x);
        for (r, bi) in rb.iter_mut().zip(b) {
            *r -= bi;
        }
        let mut rc = a.tr_mul_vec(&lambda);
        for ((r, si), ci) in rc.iter_mut().zip(&s).zip(c) {
            *r += si - ci;
        }
        let pobj = dot(c, &x);
        let dobj = dot(b, &lambda);
        if norm_inf(&rb) <= cfg.tol_feas * b_scale
            && norm_inf(&rc) <= cfg.tol_opt * c_scale
            && (pobj - dobj).abs() <= cfg.tol_opt * (1.0 + pobj.abs())
        {
            return IpmOutcome {
                converged: true,
                x,
                lambda,
                iterations: iter,
            };
        }

        let mu = dot(&x, &s) / p as f64;
        let d: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi / si).collect();
        let Some(lu) = factor_normal_matrix(a, &d) else {
            return give_up(x, lambda, iter);
        };

        // Predictor: complementarity target 0.
        let rxs_aff: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi * si).collect();
        let (dx_aff, _, ds_aff) = newton_direction(a, &lu, &x, &s, &d, &rb, &rc, &rxs_aff);
        let ap_aff = max_step(&x, &dx_aff).min(1.0);
        let ad_aff = max_step(&s, &ds_aff).min(1.0);
        let mu_aff = x
            .iter()
            .zip(&dx_aff)
            .zip(s.iter().zip(&ds_aff))
            .map(|((xi, dxi), (si, dsi))| (xi + ap_aff * dxi) * (si + ad_aff * dsi))
            .sum::<f64>()
            / p as f64;
        let sigma = {
            let r = (mu_aff / mu).max(0.0);
            r * r * r
        };

        // Corrector with second-order term.
        let rxs: Vec<f64> = (0..p)
            .map(|i| x[i] * s[i] + dx_aff[i] * ds_aff[i] - sigma * mu)
            .collect();
        let (dx, dl, ds) = newton_direction(a, &lu, &x, &s, &d, &rb, &rc, &rxs);

        let eta = 1.0 - (0.1f64).min(100.0 * mu / (1.0 + pobj.abs())).max(5e-3);
        let ap = (eta * max_step(&x, &dx)).min(1.0);
        let ad = (eta * max_step(&s, &ds)).min(1.0);
        for (xi, dxi) in x.iter_mut().zip(&dx) {
            *xi += ap * dxi;
        }
        for (li, dli) in lambda.iter_mut().zip(&dl) {
            *li += ad * dli;
        }
        for (si, dsi) in s.iter_mut().zip(&ds) {
            *si += ad * dsi;
        }

        let bad = |v: &[f64]| v.iter().any(|t| !t.is_finite()) || norm_inf(v) > DIVERGENCE;
        if bad(&x) || bad(&s) || bad(&lambda) {
            return give_up(x, lambda, iter + 1);
        }
    }
    give_up(x, lambda, cfg.max_iters)
}

/// Mehrotra's heuristic starting point built from least-norm solutions.
fn starting_point(a: &DenseMatrix, b: &[f64], c: &[f64]) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let p = a.cols();
    let aat = factor_normal_matrix(a, &vec![1.0; p])?;
    let mut x = a.tr_mul_vec(&aat.solve(b));
    let lambda = aat.solve(&a.mul_vec(c));
    let atl = a.tr_mul_vec(&lambda);
    let mut s: Vec<f64> = c.iter().zip(&atl).map(|(ci, ai)| ci - ai).collect();

    let shift = |v: &mut [f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let delta = (-1.5 * lo).max(0.0);
        for t in v.iter_mut() {
            *t += delta;
        }
    };
    shift(&mut x);
    shift(&mut s);
    let xs = dot(&x, &s);
    let sum_x: f64 = x.iter().sum();
    let sum_s: f64 = s.iter().sum();
    let dx = if sum_s > 0.0 { 0.5 * xs / sum_s } else { 0.0 };
    let ds = if sum_x > 0.0 { 0.5 * xs / sum_x } else { 0.0 };
    // Keep the start well inside the orthant when the heuristic collapses
    // (for instance b = 0 makes x vanish).
    let floor_x = 1e-2 * (1.0 + norm_inf(&x));
    let floor_s = 1e-2 * (1.0 + norm_inf(&s));
    for t in &mut x {
        *t = (*t + dx).max(floor_x);
    }
    for t in &mut s {
        *t = (*t + ds).max(floor_s);
    }
    Some((x, lambda, s))
}

/// LU of `A diag(d) A^T`, retried with growing diagonal regularization.
fn factor_normal_matrix(a: &DenseMatrix, d: &[f64]) -> Option<Lu> {
    let m = a.rows();
    let mut ad = a.clone();
    for i in 0..m {
        for (v, &dj) in ad.row_mut(i).iter_mut().zip(d) {
            *v *= dj;
        }
    }
    let mut normal = DenseMatrix::zeros(m, m);
    for i in 0..m {
        let ri = ad.row(i);
        for j in i..m {
            let v = dot(ri, a.row(j));
            normal[(i, j)] = v;
            normal[(j, i)] = v;
        }
    }
    let diag_max = (0..m).map(|i| normal[(i, i)]).fold(0.0f64, f64::max);
    let mut reg = 1e-14 * diag_max.max(f64::MIN_POSITIVE);
    for _ in 0..6 {
        let mut trial = normal.clone();
        for i in 0..m {
            trial[(i, i)] += reg;
        }
        if let Ok(lu) = Lu::factor(&trial) {
            return Some(lu);
        }
        reg *= 100.0;
    }
    None
}

/// Solves the reduced Newton system for a given complementarity residual.
#[allow(clippy::too_many_arguments)]
fn newton_direction(
    a: &DenseMatrix,
    lu: &Lu,
    x: &[f64],
    s: &[f64],
    d: &[f64],
    rb: &[f64],
    rc: &[f64],
    rxs: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..x.len()).map(|i| rxs[i] / s[i] - d[i] * rc[i]).collect();
    let mut rhs = a.mul_vec(&t);
    for (r, b) in rhs.iter_mut().zip(rb) {
        *r -= b;
    }
    let dl = lu.solve(&rhs);
    let atdl = a.tr_mul_vec(&dl);
    let ds: Vec<f64> = rc.iter().zip(&atdl).map(|(r, v)| -r - v).collect();
    let dx: Vec<f64> = (0..x.len()).map(|i| -(rxs[i] + x[i] * ds[i]) / s[i]).collect();
    (dx, dl, ds)
}

/// Largest `alpha` with `v + alpha * dv >= 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&vi, &d)| -vi / d)
        .fold(f64::INFINITY, f64::min)
}
