use alloc::vec::Vec;

use itertools::Itertools;

use super::SupportSet;
use crate::boxconv::BoxOperator;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{norm_inf, ThinQr};

/// Longest signal the brute-force oracle accepts.
pub const L0_MAX_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct L0Solution {
    pub support: SupportSet,
    pub x: Vec<f64>,
}

/// Every solution of `op(x) = y` with the smallest support found.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Solutions {
    /// `None` when nothing with support up to `max_support` fits `y`.
    pub support_size: Option<usize>,
    pub solutions: Vec<L0Solution>,
}

/// Brute-force minimum-support solutions.
///
/// Supports are enumerated by increasing size. For each one the restricted
/// least-squares problem is solved and kept when it reproduces `y` to
/// `1e-8 * max(1, |y|_inf)`. The search stops after the first size that
/// yields anything.
pub fn l0_oracle(op: &BoxOperator, y: &[f64], max_support: usize) -> Result<L0Solutions> {
    let n = op.n();
    if n > L0_MAX_LEN {
        return Err(Error::Capacity {
            what: "l0 enumeration",
            requested: n,
            limit: L0_MAX_LEN,
        });
    }
    if y.len() != op.output_len() {
        return Err(dim_err!(
            "expected {} measurements, got {}",
            op.output_len(),
            y.len()
        ));
    }
    let a = op.materialize()?;
    let tol = 1e-8 * norm_inf(y).max(1.0);

    for size in 0..=max_support.min(n) {
        let mut solutions = Vec::new();
        if size == 0 {
            if norm_inf(y) <= tol {
                solutions.push(L0Solution {
                    support: SupportSet::from_indices(n, Vec::new())?,
                    x: alloc::vec![0.0; n],
                });
            }
        } else {
            for cols in (0..n).combinations(size) {
                let sub = a.select_columns(&cols);
                let qr = ThinQr::new(&sub, 1e-10);
                let Some(coef) = qr.solve_least_squares(y) else {
                    continue;
                };
                // A vanishing coefficient means a smaller support works.
                if coef.iter().any(|c| c.abs() <= tol) {
                    continue;
                }
                let fit = sub.mul_vec(&coef);
                if fit.iter().zip(y).any(|(f, t)| (f - t).abs() > tol) {
                    continue;
                }
                let mut x = alloc::vec![0.0; n];
                for (&j, &c) in cols.iter().zip(&coef) {
                    x[j] = c;
                }
                solutions.push(L0Solution {
                    support: SupportSet::from_indices(n, cols)?,
                    x,
                });
            }
        }
        if !solutions.is_empty() {
            return Ok(L0Solutions {
                support_size: Some(size),
                solutions,
            });
        }
    }
    Ok(L0Solutions {
        support_size: None,
        solutions: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn all_ones_has_several_minimal_solutions() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let out = l0_oracle(&op, &[1.0; 4], 6).unwrap();
        assert_eq!(out.support_size, Some(2));
        let supports: Vec<Vec<usize>> = out.solutions.iter().map(|s| s.support.indices().to_vec()).collect();
        assert_eq!(supports, [[0, 3], [1, 4], [2, 5]]);
        for s in &out.solutions {
            assert!(max_abs_diff(&op.apply(&s.x).unwrap(), &[1.0; 4]) < 1e-12);
        }
    }

    #[test]
    fn single_spike_is_the_only_solution() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let out = l0_oracle(&op, &[5.0, 5.0, 5.0, 0.0], 6).unwrap();
        assert_eq!(out.support_size, Some(1));
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].support.one_based().collect::<Vec<_>>(), [3]);
        assert!((out.solutions[0].x[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_measurements() {
        let op = BoxOperator::circular(2, 5).unwrap();
        let out = l0_oracle(&op, &[0.0; 5], 5).unwrap();
        assert_eq!(out.support_size, Some(0));
        assert_eq!(out.solutions[0].x, [0.0; 5]);
    }

    #[test]
    fn guards() {
        let op = BoxOperator::valid(2, 25).unwrap();
        assert!(matches!(l0_oracle(&op, &[0.0; 24], 3), Err(Error::Capacity { .. })));
        let op = BoxOperator::valid(2, 6).unwrap();
        assert!(l0_oracle(&op, &[0.0; 6], 3).is_err());
        // Support cap below the true minimum.
        let out = l0_oracle(&BoxOperator::valid(3, 6).unwrap(), &[1.0; 4], 1).unwrap();
        assert_eq!(out.support_size, None);
    }
}
