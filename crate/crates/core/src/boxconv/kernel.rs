use alloc::vec::Vec;

use super::{circular_window_sums, Mode};
use crate::error::{dim_err, Result};
use crate::linalg::norm_inf;

/// Basis of the kernel of the valid box operator.
///
/// A vector is in the kernel exactly when it is `k`-periodic and one period
/// sums to zero, so the kernel has dimension `k - 1`. Vector `m` (for
/// `m = 1..k-1`) is `+1` on residue class 0, `-1` on residue class `m`, and
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    k: usize,
    n: usize,
    vectors: Vec<Vec<f64>>,
}

impl KernelBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Kernel basis for width `k` and length `n`; empty when `k < 2`.
pub fn kernel_basis(k: usize, n: usize) -> Result<KernelBasis> {
    if n == 0 || k == 0 {
        return Err(dim_err!("kernel basis needs k >= 1 and n >= 1"));
    }
    if k > n {
        return Err(dim_err!("box width k={k} exceeds signal length n={n}"));
    }
    let vectors = (1..k)
        .map(|m| {
            (0..n)
                .map(|j| match j % k {
                    0 => 1.0,
                    r if r == m => -1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    Ok(KernelBasis { k, n, vectors })
}

/// `1e-9 * (1 + max|z|)`
pub fn kernel_tolerance(z: &[f64]) -> f64 {
    1e-9 * (1.0 + norm_inf(z))
}

/// Kernel membership with the default scale-relative tolerance.
///
/// Valid: `z` is `k`-periodic and its first period sums to zero. Circular:
/// additionally every circular window sums to zero, which is automatic when
/// `k` divides `n`.
pub fn in_kernel(z: &[f64], k: usize, mode: Mode) -> Result<bool> {
    in_kernel_with_tol(z, k, mode, kernel_tolerance(z))
}

pub fn in_kernel_with_tol(z: &[f64], k: usize, mode: Mode, tol: f64) -> Result<bool> {
    let n = z.len();
    if k == 0 || n < k {
        return Err(dim_err!("kernel test needs 1 <= k <= n, got k={k}, n={n}"));
    }
    let periodic = (k..n).all(|j| (z[j] - z[j % k]).abs() <= tol);
    let period_sum: f64 = z[..k].iter().sum();
    let valid = periodic && period_sum.abs() <= tol;
    Ok(match mode {
        Mode::Valid => valid,
        Mode::Circular => {
            valid && (n.is_multiple_of(k) || norm_inf(&circular_window_sums(z, k)) <= tol)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::boxconv::BoxOperator;
    use proptest::prelude::*;

    #[test]
    fn documented_bases() {
        let b = kernel_basis(3, 6).unwrap();
        assert_eq!(
            b.vectors(),
            [
                vec![1.0, -1.0, 0.0, 1.0, -1.0, 0.0],
                vec![1.0, 0.0, -1.0, 1.0, 0.0, -1.0]
            ]
        );
        assert_eq!(kernel_basis(2, 4).unwrap().vectors(), [vec![1.0, -1.0, 1.0, -1.0]]);
        assert!(kernel_basis(1, 9).unwrap().is_empty());
        assert!(kernel_basis(5, 4).is_err());
    }

    #[test]
    fn membership_examples() {
        let z = [1.0, -1.0, 0.0, 1.0, -1.0, 0.0];
        assert!(in_kernel(&z, 3, Mode::Valid).unwrap());
        let bad = [1.0, -1.0, 0.0, 1.0, -1.0, 1.0];
        assert!(!in_kernel(&bad, 3, Mode::Valid).unwrap());

        // n = 5, k = 3: periodic with zero period sum, but the wrapped
        // window (z4, z5, z1) sums to 1.
        let short = [1.0, -1.0, 0.0, 1.0, -1.0];
        assert!(in_kernel(&short, 3, Mode::Valid).unwrap());
        assert!(!in_kernel(&short, 3, Mode::Circular).unwrap());
        let b = BoxOperator::circular(3, 5).unwrap().materialize().unwrap();
        assert!(norm_inf(&b.mul_vec(&short)) > 0.5);
    }

    #[test]
    fn membership_tolerates_solver_noise() {
        let mut z = vec![1.0, -1.0, 0.0, 1.0, -1.0, 0.0];
        z[4] += 1e-11;
        assert!(in_kernel(&z, 3, Mode::Valid).unwrap());
        z[4] += 1e-6;
        assert!(!in_kernel(&z, 3, Mode::Valid).unwrap());
    }

    proptest! {
        #[test]
        fn basis_vectors_are_annihilated_exactly(n in 2usize..60, kf in 0.0f64..1.0) {
            let k = 2 + ((n - 2) as f64 * kf) as usize;
            let basis = kernel_basis(k, n).unwrap();
            prop_assert_eq!(basis.dim(), k - 1);
            let op = BoxOperator::valid(k, n).unwrap();
            for v in basis.vectors() {
                let vi: Vec<i64> = v.iter().map(|&x| x as i64).collect();
                prop_assert!(op.apply_exact(&vi).unwrap().iter().all(|&s| s == 0));
                prop_assert!(in_kernel(v, k, Mode::Valid).unwrap());
                if n % k == 0 {
                    prop_assert!(in_kernel(v, k, Mode::Circular).unwrap());
                }
            }
        }

        #[test]
        fn circular_membership_implies_valid(
            n in 2usize..40,
            kf in 0.0f64..1.0,
            coeffs in proptest::collection::vec(-3i32..=3, 40),
        ) {
            let k = 2 + ((n - 2) as f64 * kf) as usize;
            let basis = kernel_basis(k, n).unwrap();
            let mut z = vec![0.0; n];
            for (v, &c) in basis.vectors().iter().zip(&coeffs) {
                for (zz, &vv) in z.iter_mut().zip(v) {
                    *zz += c as f64 * vv;
                }
            }
            if in_kernel(&z, k, Mode::Circular).unwrap() {
                prop_assert!(in_kernel(&z, k, Mode::Valid).unwrap());
            }
        }
    }
}
