//! Dense linear programming in standard form:
//!
//! ```text
//! minimize    c^T u
//! subject to  E u = f,  u >= 0
//! ```
//!
//! Rows of `E` that are linearly dependent are removed before solving (a
//! circular box operator whose width divides the length is rank deficient);
//! if a dependent row disagrees with the others the program is reported
//! infeasible right away.
//!
//! The default engine is a Mehrotra predictor-corrector interior-point method
//! on the normal equations. When it does not reach the requested accuracy,
//! a two-phase dense simplex with Bland's rule takes over and also settles
//! infeasibility and unboundedness.

mod ipm;
mod simplex;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{dot, norm_inf, row_basis, DenseMatrix};

/// Relative tolerance used when looking for dependent rows.
const ROW_RANK_TOL: f64 = 1e-11;

/// `min c^T u  s.t.  E u = f, u >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    cost: Vec<f64>,
    eq_matrix: DenseMatrix,
    eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>, eq_matrix: DenseMatrix, eq_rhs: Vec<f64>) -> Result<Self> {
        let (m, p) = (eq_matrix.rows(), eq_matrix.cols());
        if cost.len() != p {
            return Err(dim_err!("cost has {} entries but E has {} columns", cost.len(), p));
        }
        if eq_rhs.len() != m {
            return Err(dim_err!("rhs has {} entries but E has {} rows", eq_rhs.len(), m));
        }
        if m > p {
            return Err(dim_err!("more equality rows ({m}) than variables ({p})"));
        }
        let finite = cost.iter().chain(&eq_rhs).chain(eq_matrix.as_slice()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("linear program data must be finite".into()));
        }
        Ok(Self {
            cost,
            eq_matrix,
            eq_rhs,
        })
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn eq_matrix(&self) -> &DenseMatrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn num_vars(&self) -> usize {
        self.eq_matrix.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_matrix.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Interior point, then simplex if the interior point falls short.
    Auto,
    InteriorPoint,
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol_feas: f64,
    pub tol_opt: f64,
    /// Interior-point iteration cap.
    pub max_iters: usize,
    pub method: Method,
    /// Largest problem (in variables) handed to the simplex fallback.
    pub simplex_max_vars: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_opt: 1e-9,
            max_iters: 200,
            method: Method::Auto,
            simplex_max_vars: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Outcome of [`solve_lp`].
///
/// The residuals are recomputed from the returned `solution` and `dual`
/// against the original (unreduced) program:
///
/// - `primal_residual = max(|E u - f|_inf, max(0, -min u)) / (1 + |f|_inf)`
/// - `dual_residual = max(dual infeasibility / (1 + |c|_inf),
///   |c^T u - f^T y| / (1 + |c^T u|))`, where the dual infeasibility is
///   the most negative reduced cost `c - E^T y`.
///
/// A small `dual_residual` certifies that `objective` is within that
/// relative distance of the true optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    pub solution: Vec<f64>,
    /// Equality multipliers `y`, one per row of `E`.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// The optimum is not a nondegenerate vertex: the number of clearly
    /// positive variables differs from the rank of `E`. An interior-point
    /// solution with more positives than the rank sits inside an optimal
    /// face, so the minimizer is not unique.
    pub degenerate: bool,
    /// Engine that produced the solution.
    pub method: Method,
}

/// Solves `lp`; infeasibility and unboundedness are reported via
/// [`SolveReport::status`].
pub fn solve_lp(lp: &LinearProgram, cfg: &SolverConfig) -> SolveReport {
    let (m, p) = (lp.num_rows(), lp.num_vars());
    if m == 0 {
        let unbounded = lp.cost.iter().any(|&c| c < 0.0);
        let status = if unbounded { Status::Unbounded } else { Status::Optimal };
        return build_report(lp, status, vec![0.0; p], vec![], 0, 0, Method::Auto);
    }

    let basis = row_basis(&lp.eq_matrix, &lp.eq_rhs, ROW_RANK_TOL);
    let scale = 1.0 + norm_inf(&lp.eq_rhs);
    if basis.inconsistency > 100.0 * cfg.tol_feas * scale {
        return build_report(
            lp,
            Status::Infeasible,
            vec![0.0; p],
            vec![0.0; m],
            0,
            basis.independent.len(),
            Method::Auto,
        );
    }
    let rows = &basis.independent;
    let a = lp.eq_matrix.select_rows(rows);
    let b: Vec<f64> = rows.iter().map(|&i| lp.eq_rhs[i]).collect();
    let expand = |reduced: &[f64]| {
        let mut full = vec![0.0; m];
        for (&r, &v) in rows.iter().zip(reduced) {
            full[r] = v;
        }
        full
    };

    let mut iterations = 0;
    if matches!(cfg.method, Method::Auto | Method::InteriorPoint) {
        let out = ipm::solve(&a, &b, &lp.cost, cfg);
        iterations += out.iterations;
        let report = build_report(
            lp,
            if out.converged { Status::Optimal } else { Status::IterationLimit },
            out.x,
            expand(&out.lambda),
            iterations,
            rows.len(),
            Method::InteriorPoint,
        );
        let certified = report.status == Status::Optimal
            && report.primal_residual <= cfg.tol_feas
            && report.dual_residual <= cfg.tol_opt;
        if certified || cfg.method == Method::InteriorPoint || p > cfg.simplex_max_vars {
            let mut report = report;
            if !certified && report.status == Status::Optimal {
                report.status = Status::IterationLimit;
            }
            return report;
        }
    }

    let out = simplex::solve(&a, &b, &lp.cost, cfg.tol_feas);
    iterations += out.pivots;
    let mut report = build_report(
        lp,
        out.status,
        out.x,
        expand(&out.lambda),
        iterations,
        rows.len(),
        Method::Simplex,
    );
    if report.status == Status::Optimal
        && (report.primal_residual > cfg.tol_feas || report.dual_residual > cfg.tol_opt)
    {
        report.status = Status::IterationLimit;
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    lp: &LinearProgram,
    status: Status,
    solution: Vec<f64>,
    dual: Vec<f64>,
    iterations: usize,
    rank: usize,
    method: Method,
) -> SolveReport {
    let (primal_residual, dual_residual) = residuals(lp, &solution, &dual);
    let objective = dot(&lp.cost, &solution);
    let dual_objective = if dual.is_empty() { 0.0 } else { dot(&lp.eq_rhs, &dual) };
    let zero_tol = 1e-7 * (1.0 + norm_inf(&solution));
    let positive = solution.iter().filter(|&&u| u > zero_tol).count();
    let degenerate = status == Status::Optimal && positive != rank;
    SolveReport {
        status,
        solution,
        dual,
        objective,
        dual_objective,
        iterations,
        primal_residual,
        dual_residual,
        degenerate,
        method,
    }
}

/// `(primal_residual, dual_residual)` as defined on [`SolveReport`].
pub fn residuals(lp: &LinearProgram, u: &[f64], y: &[f64]) -> (f64, f64) {
    let eu = lp.eq_matrix.mul_vec(u);
    let infeas = eu
        .iter()
        .zip(&lp.eq_rhs)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let negativity = u.iter().fold(0.0f64, |acc, &v| acc.max(-v));
    let primal = infeas.max(negativity) / (1.0 + norm_inf(&lp.eq_rhs));

    let y_full: Vec<f64> = if y.len() == lp.num_rows() {
        y.to_vec()
    } else {
        vec![0.0; lp.num_rows()]
    };
    let ety = lp.eq_matrix.tr_mul_vec(&y_full);
    let dual_infeas = lp
        .cost
        .iter()
        .zip(&ety)
        .fold(0.0f64, |acc, (c, a)| acc.max(a - c));
    let pobj = dot(&lp.cost, u);
    let dobj = dot(&lp.eq_rhs, &y_full);
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
    let dual = (dual_infeas / (1.0 + norm_inf(&lp.cost))).max(gap);
    (primal, dual)
}
