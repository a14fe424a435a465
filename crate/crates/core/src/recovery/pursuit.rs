use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::tie::{detect_tie, find_tie, verdict_from, Penalty};
use super::{RecoveryConfig, RecoveryError, RecoveryResult};
use crate::boxconv::{BoxOperator, Signal1D};
use crate::error::dim_err;
use crate::linalg::{max_abs_diff, norm1, norm2, DenseMatrix, ThinQr};
use crate::lpsolve::{solve_lp, LinearProgram, SolveReport, Status};

/// Minimizes `|x|_1` subject to `op(x) = y`.
///
/// The signal is split as `x = u - v` with `u, v >= 0`, giving the program
/// `min sum(u + v)` s.t. `[M, -M] (u, v) = y`. Entries of the solution
/// below `cfg.tol_zero` in magnitude are set to zero. When the columns on
/// the remaining support are independent, the values there are refit by
/// least squares, which removes the solver's last-digit noise.
///
/// ```
/// use boxdeconv::recovery::{basis_pursuit, RecoveryConfig, Uniqueness};
/// use boxdeconv::BoxOperator;
///
/// let op = BoxOperator::valid(3, 6).unwrap();
/// let r = basis_pursuit(&op, &[5.0, 5.0, 5.0, 0.0], &RecoveryConfig::default()).unwrap();
/// let support: Vec<usize> = r.xhat.iter().map(|v| v.abs() > 0.0).enumerate()
///     .filter_map(|(i, nz)| nz.then_some(i)).collect();
/// assert_eq!(support, [2]);
/// assert!((r.xhat[2] - 5.0).abs() < 1e-12);
/// assert_eq!(r.unique, Uniqueness::Unique);
/// ```
pub fn basis_pursuit(
    op: &BoxOperator,
    y: &[f64],
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult, RecoveryError> {
    check_measurements(op, y)?;
    let m = op.materialize_with_limit(cfg.materialize_limit)?;
    let n = op.n();
    let mut split = DenseMatrix::zeros(m.rows(), 2 * n);
    for i in 0..m.rows() {
        let row = split.row_mut(i);
        for (j, &a) in m.row(i).iter().enumerate() {
            row[j] = a;
            row[n + j] = -a;
        }
    }
    let lp = LinearProgram::new(vec![1.0; 2 * n], split, y.to_vec())?;
    let report = solve(&lp, &m, y, cfg)?;

    let mut x: Vec<f64> = (0..n)
        .map(|j| report.solution[j] - report.solution[n + j])
        .collect();
    snap(&mut x, cfg.tol_zero);
    polish(&m, y, &mut x);
    let residual = max_abs_diff(&op.apply(&x)?, y);
    let tie = detect_tie(op, y, &x, cfg);
    Ok(RecoveryResult {
        l1_norm: norm1(&x),
        xhat: Signal1D::new(x)?,
        residual,
        unique: tie.verdict,
        certificate: tie.certificate,
        report,
    })
}

/// Minimizes `|Dx|_1` subject to `op(x) = y`, where `(Dx)_i = x_{i+1} - x_i`.
///
/// The signal is written as `x = x0 + cumsum(d)` with `d = u - v`,
/// `u, v >= 0`. Every row of the operator sums to `k`, so the first
/// measurement fixes `x0` once `d` is known and the remaining rows, each
/// minus the first, constrain `d` alone. At an optimum `|d|` equals the
/// absolute jumps, so the program is equivalent to the usual encoding with
/// bounds `t >= |Dx|`.
///
/// The uniqueness verdict is never `Unique`: it is `TieDetected` when a
/// second minimizer turns up in the operator kernel, `Unknown` otherwise.
pub fn sparse_derivative_recover(
    op: &BoxOperator,
    y: &[f64],
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult, RecoveryError> {
    check_measurements(op, y)?;
    let m = op.materialize_with_limit(cfg.materialize_limit)?;
    let (n, k) = (op.n(), op.k() as f64);
    let rows = m.rows();
    let jumps = n - 1;

    // g[r][j] = sum of row r of M over columns j+1.., the response to a
    // unit jump between positions j and j+1.
    let mut g = DenseMatrix::zeros(rows, jumps);
    for r in 0..rows {
        let mut tail = 0.0;
        for j in (0..jumps).rev() {
            tail += m[(r, j + 1)];
            g[(r, j)] = tail;
        }
    }
    let mut e = DenseMatrix::zeros(rows - 1, 2 * jumps);
    for r in 1..rows {
        let row = e.row_mut(r - 1);
        for j in 0..jumps {
            let a = g[(r, j)] - g[(0, j)];
            row[j] = a;
            row[jumps + j] = -a;
        }
    }
    let f: Vec<f64> = y[1..].iter().map(|&v| v - y[0]).collect();
    let lp = LinearProgram::new(vec![1.0; 2 * jumps], e, f)?;
    let report = solve(&lp, &m, y, cfg)?;

    let mut d: Vec<f64> = (0..jumps)
        .map(|j| report.solution[j] - report.solution[jumps + j])
        .collect();
    snap(&mut d, cfg.tol_zero);
    let head: f64 = g.row(0).iter().zip(&d).map(|(a, b)| a * b).sum();
    let mut x = Vec::with_capacity(n);
    let mut level = (y[0] - head) / k;
    x.push(level);
    for &step in &d {
        level += step;
        x.push(level);
    }
    let residual = max_abs_diff(&op.apply(&x)?, y);
    let tie = verdict_from(find_tie(op, y, &x, Penalty::Derivative, cfg));
    Ok(RecoveryResult {
        l1_norm: Penalty::Derivative.value(&x),
        xhat: Signal1D::new(x)?,
        residual,
        unique: tie.verdict,
        certificate: tie.certificate,
        report,
    })
}

fn check_measurements(op: &BoxOperator, y: &[f64]) -> Result<(), RecoveryError> {
    if y.len() != op.output_len() {
        return Err(dim_err!(
            "operator k={} n={} ({}) produces {} measurements, got {}",
            op.k(),
            op.n(),
            op.mode(),
            op.output_len(),
            y.len()
        )
        .into());
    }
    Signal1D::new(y.to_vec())?;
    Ok(())
}

fn solve(
    lp: &LinearProgram,
    m: &DenseMatrix,
    y: &[f64],
    cfg: &RecoveryConfig,
) -> Result<SolveReport, RecoveryError> {
    let report = solve_lp(lp, &cfg.lp);
    match report.status {
        Status::Optimal => Ok(report),
        Status::Infeasible => Err(RecoveryError::Infeasible {
            least_squares_residual: norm2(&ThinQr::new(m, 1e-12).range_residual(y)),
        }),
        _ => Err(RecoveryError::Solver {
            report: Box::new(report),
        }),
    }
}

fn polish(m: &DenseMatrix, y: &[f64], x: &mut [f64]) {
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
    if support.is_empty() || support.len() > m.rows() {
        return;
    }
    let sub = m.select_columns(&support);
    let Some(coef) = ThinQr::new(&sub, 1e-10).solve_least_squares(y) else {
        return;
    };
    let before = max_abs_diff(&m.mul_vec(x), y);
    let after = max_abs_diff(&sub.mul_vec(&coef), y);
    let keeps_signs = support.iter().zip(&coef).all(|(&j, c)| c * x[j] > 0.0);
    if after <= before && keeps_signs {
        for (&j, &c) in support.iter().zip(&coef) {
            x[j] = c;
        }
    }
}

fn snap(x: &mut [f64], tol: f64) {
    for v in x {
        if v.abs() < tol {
            *v = 0.0;
        }
    }
}
