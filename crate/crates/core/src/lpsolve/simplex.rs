//! Two-phase dense tableau simplex with Bland's rule.
//!
//! Meant for small programs: exact vertices for oracle tests and the
//! fallback when the interior point method stalls. Rows must be linearly
//! independent.

use alloc::vec;
use alloc::vec::Vec;

use super::Status;
use crate::linalg::{norm_inf, DenseMatrix, Lu};

pub(super) struct SimplexOutcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub pivots: usize,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

struct Tableau {
    /// `m` rows of `p + m + 1` entries: structural, artificial, rhs.
    t: DenseMatrix,
    /// Reduced costs for the current phase, same width as a row.
    z: Vec<f64>,
    basis: Vec<usize>,
    p: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.t.cols()
    }

    fn rhs(&self) -> usize {
        self.width() - 1
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let w = self.width();
        let mut z = vec![0.0; w];
        z[..costs.len()].copy_from_slice(costs);
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = costs.get(bv).copied().unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            for (zj, &tij) in z.iter_mut().zip(self.t.row(i)) {
                *zj -= cb * tij;
            }
        }
        self.z = z;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width();
        let piv = self.t[(r, e)];
        for v in self.t.row_mut(r) {
            *v /= piv;
        }
        let prow: Vec<f64> = self.t.row(r).to_vec();
        for i in 0..self.t.rows() {
            if i == r {
                continue;
            }
            let f = self.t[(i, e)];
            if f == 0.0 {
                continue;
            }
            let row = self.t.row_mut(i);
            for j in 0..w {
                row[j] -= f * prow[j];
            }
            row[e] = 0.0;
        }
        let f = self.z[e];
        if f != 0.0 {
            for j in 0..w {
                self.z[j] -= f * prow[j];
            }
            self.z[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Runs Bland's rule over the columns accepted by `allowed`.
    fn run(&mut self, allowed: impl Fn(usize) -> bool, budget: &mut usize, pivots: &mut usize) -> Status {
        let rhs = self.rhs();
        loop {
            let Some(e) = (0..rhs).find(|&j| allowed(j) && self.z[j] < -COST_TOL) else {
                return Status::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.rows() {
                let a = self.t[(i, e)];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.t[(i, rhs)].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Status::Unbounded;
            };
            if *budget == 0 {
                return Status::IterationLimit;
            }
            *budget -= 1;
            *pivots += 1;
            self.pivot(r, e);
        }
    }
}

pub(super) fn solve(a: &DenseMatrix, b: &[f64], c: &[f64], tol: f64) -> SimplexOutcome {
    let (m, p) = (a.rows(), a.cols());
    let w = p + m + 1;
    let mut t = DenseMatrix::zeros(m, w);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = t.row_mut(i);
        for (dst, &src) in row[..p].iter_mut().zip(a.row(i)) {
            *dst = sign * src;
        }
        row[p + i] = 1.0;
        row[w - 1] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        z: Vec::new(),
        basis: (p..p + m).collect(),
        p,
    };
    let mut budget = 50 * (m + p) + 1000;
    let mut pivots = 0;
    let fail = |status, pivots| SimplexOutcome {
        status,
        x: vec![0.0; p],
        lambda: vec![0.0; m],
        pivots,
    };

    // Phase 1: drive the artificials to zero.
    let mut phase1 = vec![0.0; p + m];
    phase1[p..].fill(1.0);
    tab.set_costs(&phase1);
    match tab.run(|_| true, &mut budget, &mut pivots) {
        Status::Optimal => {}
        Status::Unbounded => unreachable!("phase one objective is bounded below by zero"),
        other => return fail(other, pivots),
    }
    let infeasibility = -tab.z[w - 1];
    if infeasibility > tol * (1.0 + norm_inf(b)) {
        return fail(Status::Infeasible, pivots);
    }
    for i in 0..m {
        if tab.basis[i] < p {
            continue;
        }
        if let Some(j) = (0..p).find(|&j| tab.t[(i, j)].abs() > 1e-9) {
            tab.pivot(i, j);
            pivots += 1;
        }
    }

    // Phase 2 over the structural columns only.
    let mut phase2 = vec![0.0; p + m];
    phase2[..p].copy_from_slice(c);
    tab.set_costs(&phase2);
    let status = tab.run(|j| j < p, &mut budget, &mut pivots);
    if status != Status::Optimal {
        return fail(status, pivots);
    }

    let mut x = vec![0.0; p];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < p {
            x[bv] = tab.t[(i, w - 1)].max(0.0);
        }
    }
    let lambda = duals(a, c, &tab.basis, tab.p).unwrap_or_else(|| vec![0.0; m]);
    SimplexOutcome {
        status,
        x,
        lambda,
        pivots,
    }
}

/// `B^T y = c_B` for the final basis; artificial columns stand for unit
/// vectors with zero cost.
fn duals(a: &DenseMatrix, c: &[f64], basis: &[usize], p: usize) -> Option<Vec<f64>> {
    let m = a.rows();
    let mut bmat = DenseMatrix::zeros(m, m);
    let mut cb = vec![0.0; m];
    for (col, &bv) in basis.iter().enumerate() {
        if bv < p {
            for i in 0..m {
                bmat[(i, col)] = a[(i, bv)];
            }
            cb[col] = c[bv];
        } else {
            bmat[(bv - p, col)] = 1.0;
        }
    }
    let lu = Lu::factor(&bmat).ok()?;
    Some(lu.solve_transpose(&cb))
}
