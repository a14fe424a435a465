//! Primal-dual (Chambolle-Pock) solver for
//! `min_x |A x - y|_2^2 + lambda (sum |dx| + sum |dy|)`.
//!
//! With `K = [A; grad]`, the iteration is
//!
//! ```text
//! q <- (q + s_A (A xbar - y)) / (1 + s_A / 2)
//! p <- clip(p + s_G grad xbar, -lambda, lambda)
//! x_new <- x - t (A^T q - div p)
//! xbar <- 2 x_new - x
//! ```
//!
//! The iterates themselves need not decrease the objective, so the solver
//! keeps the best iterate seen at a checkpoint and returns that one.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use super::gradient::{divergence_into, gradient_into, GradientField};
use crate::boxconv::{adjoint_apply2d, apply2d, Image2D};
use crate::error::{dim_err, Error};
use crate::linalg::norm2;

/// Step sizes of the primal-dual iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Diagonal steps from the absolute row and column sums of `K`: `1/k^2`
    /// for the data rows, `1/2` for the gradient rows, and per pixel one
    /// over the number of entries of `K` in its column.
    Preconditioned,
    /// Uniform steps; convergence needs `tau * sigma * (k^4 + 8) < 1`.
    Scalar { tau: f64, sigma: f64 },
}

impl StepRule {
    /// Equal scalar steps at 99% of the admissible product for box size `k`.
    pub fn scalar(k: usize) -> Self {
        let l = sqrt(((k * k * k * k) as f64) + 8.0);
        StepRule::Scalar {
            tau: 0.99 / l,
            sigma: 0.99 / l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once `|x_new - x|_2 <= tol |x|_2`.
    pub tol: f64,
    /// Objective is evaluated and logged every this many iterations.
    pub log_every: usize,
    pub step: StepRule,
}

impl Default for TvConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            max_iters: 2000,
            tol: 1e-7,
            log_every: 25,
            step: StepRule::Preconditioned,
        }
    }
}

impl TvConfig {
    fn validate(&self, k: usize) -> Result<(), Error> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lambda) {
            return Err(Error::InvalidInput(alloc::format!("lambda must be positive, got {}", self.lambda)));
        }
        if !positive(self.tol) {
            return Err(Error::InvalidInput(alloc::format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 || self.log_every == 0 {
            return Err(Error::InvalidInput("max_iters and log_every must be positive".into()));
        }
        if let StepRule::Scalar { tau, sigma } = self.step {
            let bound = ((k * k * k * k) as f64) + 8.0;
            if !positive(tau) || !positive(sigma) || tau * sigma * bound >= 1.0 {
                return Err(Error::InvalidInput(alloc::format!(
                    "steps tau={tau} sigma={sigma} violate tau*sigma*(k^4+8) < 1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub iteration: usize,
    /// Lowest objective over the checkpoints so far; non-increasing.
    pub objective: f64,
    /// Objective of the current iterate.
    pub current: f64,
    pub data_term: f64,
    pub tv_term: f64,
    /// `|x_new - x|_2 / |x|_2` of the last step; infinite before the first.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TvLog {
    pub checkpoints: Vec<Checkpoint>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvOutput {
    pub image: Image2D,
    pub log: TvLog,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TvError {
    #[error(transparent)]
    Input(#[from] Error),
    #[error("objective became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize, log: TvLog },
}

/// `|A x - y|_2^2 + lambda |grad x|_1` with its two terms.
pub fn tv_objective(x: &Image2D, y: &Image2D, k: usize, lambda: f64) -> Result<(f64, f64, f64), Error> {
    let ax = apply2d(x, k)?;
    if ax.dims() != y.dims() {
        return Err(dim_err!("measurement size does not match the image"));
    }
    let data: f64 = ax
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let tv = super::gradient(x).l1_norm();
    Ok((data + lambda * tv, data, tv))
}

/// Approximate minimizer of the TV-regularized least-squares objective for
/// a `target_h x target_w` image blurred by the valid `k x k` box.
///
/// The iteration starts from the back-projection `A^T y` divided pixelwise
/// by `k^2 A^T 1`, which is exact for constant images.
pub fn tv_reconstruct(
    y: &Image2D,
    k: usize,
    target_h: usize,
    target_w: usize,
    cfg: &TvConfig,
) -> Result<TvOutput, TvError> {
    cfg.validate(k)?;
    let counts = adjoint_apply2d(&Image2D::filled(y.height(), y.width(), 1.0)?, k, target_h, target_w)?;
    let (h, w) = (target_h, target_w);
    let back = adjoint_apply2d(y, k, h, w)?;
    let area = (k * k) as f64;
    let mut x: Vec<f64> = back
        .as_slice()
        .iter()
        .zip(counts.as_slice())
        .map(|(b, c)| b / (c * area))
        .collect();

    let (tau, sigma_data, sigma_grad): (Vec<f64>, f64, f64) = match cfg.step {
        StepRule::Preconditioned => {
            let tau = (0..h * w)
                .map(|idx| {
                    let (i, j) = (idx / w, idx % w);
                    let grad_entries = [i > 0, i + 1 < h, j > 0, j + 1 < w]
                        .iter()
                        .filter(|&&b| b)
                        .count();
                    1.0 / (counts.as_slice()[idx] + grad_entries as f64)
                })
                .collect();
            (tau, 1.0 / (k * k) as f64, 0.5)
        }
        StepRule::Scalar { tau, sigma } => (vec![tau; h * w], sigma, sigma),
    };

    let mut q = vec![0.0; y.height() * y.width()];
    let mut p = GradientField::zeros(h, w);
    let mut grad = GradientField::zeros(h, w);
    let mut div = vec![0.0; h * w];
    let mut xbar = x.clone();
    let mut log = TvLog::default();
    let mut best = x.clone();
    let mut best_value = f64::INFINITY;

    let mut record = |iteration: usize, x: &[f64], change: f64, log: &mut TvLog| -> Result<(), TvError> {
        let img = Image2D::from_parts(h, w, x.to_vec());
        let (current, data_term, tv_term) = tv_objective(&img, y, k, cfg.lambda)?;
        if !current.is_finite() {
            return Err(TvError::NonFinite {
                iteration,
                log: log.clone(),
            });
        }
        if current < best_value {
            best_value = current;
            best.copy_from_slice(x);
        }
        log.checkpoints.push(Checkpoint {
            iteration,
            objective: best_value,
            current,
            data_term,
            tv_term,
            change,
        });
        Ok(())
    };
    record(0, &x, f64::INFINITY, &mut log)?;

    for iter in 1..=cfg.max_iters {
        let ax = apply2d(&Image2D::from_parts(h, w, xbar.clone()), k)?;
        for ((qi, &a), &yi) in q.iter_mut().zip(ax.as_slice()).zip(y.as_slice()) {
            *qi = (*qi + sigma_data * (a - yi)) / (1.0 + sigma_data / 2.0);
        }
        gradient_into(&xbar, h, w, &mut grad);
        {
            let (pdx, pdy) = p.parts_mut();
            for (pv, &g) in pdx.iter_mut().chain(pdy.iter_mut()).zip(grad.dx().iter().chain(grad.dy())) {
                *pv = (*pv + sigma_grad * g).clamp(-cfg.lambda, cfg.lambda);
            }
        }
        let atq = adjoint_apply2d(&Image2D::from_parts(y.height(), y.width(), q.clone()), k, h, w)?;
        divergence_into(&p, &mut div);
        let mut step_sq = 0.0;
        for idx in 0..h * w {
            let old = x[idx];
            let new = old - tau[idx] * (atq.as_slice()[idx] - div[idx]);
            x[idx] = new;
            xbar[idx] = 2.0 * new - old;
            step_sq += (new - old) * (new - old);
        }
        let norm = norm2(&x);
        let change = if norm > 0.0 { sqrt(step_sq) / norm } else { sqrt(step_sq) };
        log.iterations = iter;
        let done = change <= cfg.tol;
        if done || iter % cfg.log_every == 0 || iter == cfg.max_iters {
            record(iter, &x, change, &mut log)?;
        }
        if done {
            log.converged = true;
            break;
        }
    }
    Ok(TvOutput {
        image: Image2D::from_parts(h, w, best),
        log,
    })
}
