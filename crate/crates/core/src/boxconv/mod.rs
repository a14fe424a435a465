//! Box-convolution operators.
//!
//! A box of width `k` sums `k` consecutive samples. For a signal of length `n`
//! the *valid* operator `A` keeps the `n - k + 1` windows that fit inside the
//! signal; the *circular* operator `B` wraps indices modulo `n` and keeps all
//! `n` windows. Row `i` of either operator has ones at columns `i..i+k-1`
//! (modulo `n` for `B`).
//!
//! Nothing here materializes a matrix unless asked to: `apply` walks the
//! running-sum recurrence `(Ax)[i+1] = (Ax)[i] + x[i+k] - x[i]` seeded with the
//! first window sum.

mod image;
mod kernel;
mod signal;

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Sub};
use core::str::FromStr;

use crate::error::{dim_err, Error, Result};
use crate::linalg::DenseMatrix;

pub use image::{adjoint_apply2d, apply2d, Image2D};
pub use kernel::{in_kernel, in_kernel_with_tol, kernel_basis, kernel_tolerance, KernelBasis};
pub use signal::Signal1D;

/// Default largest `n` that [`BoxOperator::materialize`] accepts.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 4096;

/// Signals longer than this re-seed the running sum periodically.
const RESEED_MIN_LEN: usize = 1_000_000;
const RESEED_INTERVAL: usize = 1 << 16;

/// Boundary handling of the box convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Only windows that lie fully inside the signal; `n - k + 1` outputs.
    Valid,
    /// Indices wrap modulo `n`; `n` outputs.
    Circular,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Valid => "valid",
            Mode::Circular => "circular",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "valid" => Ok(Mode::Valid),
            "circular" => Ok(Mode::Circular),
            other => Err(Error::InvalidInput(alloc::format!(
                "unknown mode {other:?}, expected valid or circular"
            ))),
        }
    }
}

/// Box of width `k` acting on signals of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxOperator {
    k: usize,
    n: usize,
    mode: Mode,
}

impl BoxOperator {
    /// Requires `1 <= k <= n`.
    pub fn new(k: usize, n: usize, mode: Mode) -> Result<Self> {
        if k == 0 {
            return Err(dim_err!("box width must be at least 1"));
        }
        if k > n {
            return Err(dim_err!("box width k={k} exceeds signal length n={n}"));
        }
        Ok(Self { k, n, mode })
    }

    pub fn valid(k: usize, n: usize) -> Result<Self> {
        Self::new(k, n, Mode::Valid)
    }

    pub fn circular(k: usize, n: usize) -> Result<Self> {
        Self::new(k, n, Mode::Circular)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of measurements: `n - k + 1` (valid) or `n` (circular).
    #[inline]
    pub fn output_len(&self) -> usize {
        match self.mode {
            Mode::Valid => self.n - self.k + 1,
            Mode::Circular => self.n,
        }
    }

    /// `Ax` or `Bx` through the running-sum recurrence.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_exact(x)
    }

    /// Same recurrence over any additive type; with integers the result is
    /// exact.
    pub fn apply_exact<T>(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T>,
    {
        if x.len() != self.n {
            return Err(dim_err!(
                "operator expects a signal of length {}, got {}",
                self.n,
                x.len()
            ));
        }
        if self.k == 1 {
            return Ok(x.to_vec());
        }
        Ok(match self.mode {
            Mode::Valid => valid_window_sums(x, self.k),
            Mode::Circular => circular_window_sums(x, self.k),
        })
    }

    /// `A^T y` or `B^T y`: every measurement is spread back over the `k`
    /// samples of its window.
    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.output_len() {
            return Err(dim_err!(
                "adjoint expects {} measurements, got {}",
                self.output_len(),
                y.len()
            ));
        }
        Ok(match self.mode {
            Mode::Valid => valid_adjoint(y, self.k, self.n),
            Mode::Circular => circular_adjoint(y, self.k),
        })
    }

    /// Dense 0/1 matrix of the operator, guarded at
    /// [`DEFAULT_MATERIALIZE_LIMIT`] columns.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.materialize_with_limit(DEFAULT_MATERIALIZE_LIMIT)
    }

    pub fn materialize_with_limit(&self, limit: usize) -> Result<DenseMatrix> {
        if self.n > limit {
            return Err(Error::Capacity {
                what: "dense operator",
                requested: self.n,
                limit,
            });
        }
        let rows = self.output_len();
        let mut m = DenseMatrix::zeros(rows, self.n);
        for i in 0..rows {
            for t in 0..self.k {
                m[(i, (i + t) % self.n)] = 1.0;
            }
        }
        Ok(m)
    }

    /// Basis of the kernel of this operator.
    ///
    /// For the valid operator this is exactly [`kernel_basis`]. The circular
    /// kernel is the subspace of that span that `B` also annihilates, which
    /// is the whole span when `k` divides `n`.
    pub fn kernel_vectors(&self) -> Vec<Vec<f64>> {
        let basis = match kernel_basis(self.k, self.n) {
            Ok(b) => b.into_vectors(),
            Err(_) => return Vec::new(),
        };
        match self.mode {
            Mode::Valid => basis,
            Mode::Circular => {
                if basis.is_empty() {
                    return basis;
                }
                let images: Vec<Vec<f64>> = basis
                    .iter()
                    .map(|v| circular_window_sums(v, self.k))
                    .collect();
                let bv = DenseMatrix::from_columns(&images, self.n)
                    .expect("images have length n");
                bv.nullspace(1e-9)
                    .into_iter()
                    .map(|c| {
                        let mut z = alloc::vec![0.0; self.n];
                        for (v, &ci) in basis.iter().zip(&c) {
                            for (zz, &vv) in z.iter_mut().zip(v) {
                                *zz += ci * vv;
                            }
                        }
                        z
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for BoxOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "box(k={}, n={}, {})", self.k, self.n, self.mode)
    }
}

fn window_sum<T>(x: &[T], start: usize, k: usize) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    let n = x.len();
    (0..k).fold(T::default(), |acc, t| acc + x[(start + t) % n])
}

pub(crate) fn valid_window_sums<T>(x: &[T], k: usize) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T>,
{
    let n = x.len();
    let m = n - k + 1;
    let reseed = n > RESEED_MIN_LEN;
    let mut out = Vec::with_capacity(m);
    let mut s = window_sum(x, 0, k);
    out.push(s);
    for i in 1..m {
        if reseed && i % RESEED_INTERVAL == 0 {
            s = window_sum(x, i, k);
        } else {
            s = s + x[i + k - 1] - x[i - 1];
        }
        out.push(s);
    }
    out
}

pub(crate) fn circular_window_sums<T>(x: &[T], k: usize) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T>,
{
    let n = x.len();
    let reseed = n > RESEED_MIN_LEN;
    let mut out = Vec::with_capacity(n);
    let mut s = window_sum(x, 0, k);
    out.push(s);
    for i in 1..n {
        if reseed && i % RESEED_INTERVAL == 0 {
            s = window_sum(x, i, k);
        } else {
            s = s + x[(i + k - 1) % n] - x[i - 1];
        }
        out.push(s);
    }
    out
}

/// `(A^T y)[j] = sum of y[i] for max(0, j-k+1) <= i <= min(j, m-1)`.
pub(crate) fn valid_adjoint(y: &[f64], k: usize, n: usize) -> Vec<f64> {
    let m = y.len();
    let reseed = n > RESEED_MIN_LEN;
    let mut out = Vec::with_capacity(n);
    let mut s = 0.0;
    for j in 0..n {
        if reseed && j > 0 && j % RESEED_INTERVAL == 0 {
            let lo = (j + 1).saturating_sub(k);
            s = y[lo..=j.min(m - 1)].iter().sum();
        } else {
            if j < m {
                s += y[j];
            }
            if j >= k {
                s -= y[j - k];
            }
        }
        out.push(s);
    }
    out
}

/// `(B^T y)[j] = sum_{t<k} y[(j - t) mod n]`.
pub(crate) fn circular_adjoint(y: &[f64], k: usize) -> Vec<f64> {
    let n = y.len();
    let reseed = n > RESEED_MIN_LEN;
    let back = |j: usize| -> f64 { (0..k).map(|t| y[(j + n - t) % n]).sum() };
    let mut out = Vec::with_capacity(n);
    let mut s = back(0);
    out.push(s);
    for j in 1..n {
        if reseed && j % RESEED_INTERVAL == 0 {
            s = back(j);
        } else {
            s += y[j] - y[(j + n - k) % n];
        }
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, max_abs_diff, norm2, norm_inf};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn valid_example_matches_displayed_matrix() {
        let op = BoxOperator::valid(3, 6).unwrap();
        let y = op.apply(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(y, [6.0, 9.0, 12.0, 15.0]);
    }

    #[test]
    fn circular_example_matches_displayed_matrix() {
        let op = BoxOperator::circular(3, 6).unwrap();
        let y = op.apply(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(y, [6.0, 9.0, 12.0, 15.0, 12.0, 9.0]);
    }

    #[test]
    fn unit_box_is_a_bitwise_copy() {
        let x = [0.5, -2.25, 3.0, 1e-3, 7e10];
        for mode in [Mode::Valid, Mode::Circular] {
            assert_eq!(BoxOperator::new(1, 5, mode).unwrap().apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn zeros_map_to_zeros() {
        for mode in [Mode::Valid, Mode::Circular] {
            let op = BoxOperator::new(4, 9, mode).unwrap();
            assert!(op.apply(&[0.0; 9]).unwrap().iter().all(|&v| v == 0.0));
            let m = op.output_len();
            assert!(op.adjoint_apply(&vec![0.0; m]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn adjoint_examples() {
        let op = BoxOperator::valid(3, 6).unwrap();
        assert_eq!(
            op.adjoint_apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            op.adjoint_apply(&[1.0; 4]).unwrap(),
            [1.0, 2.0, 3.0, 3.0, 2.0, 1.0]
        );
    }

    #[test]
    fn materialized_matrices_match_the_displayed_ones() {
        let a = BoxOperator::valid(3, 6).unwrap().materialize().unwrap();
        let expected_a = DenseMatrix::from_rows(&[
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(a, expected_a);

        let b = BoxOperator::circular(3, 6).unwrap().materialize().unwrap();
        let expected_b = DenseMatrix::from_rows(&[
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(b, expected_b);

        let one = BoxOperator::valid(1, 1).unwrap().materialize().unwrap();
        assert_eq!(one, DenseMatrix::identity(1));
    }

    #[test]
    fn materialize_guard() {
        let op = BoxOperator::valid(2, 10).unwrap();
        assert!(matches!(
            op.materialize_with_limit(8),
            Err(Error::Capacity { requested: 10, limit: 8, .. })
        ));
        assert!(BoxOperator::valid(2, 5000).unwrap().materialize().is_err());
    }

    #[test]
    fn construction_and_length_errors() {
        assert!(matches!(BoxOperator::valid(0, 4), Err(Error::Dimension(_))));
        assert!(matches!(BoxOperator::valid(5, 4), Err(Error::Dimension(_))));
        let op = BoxOperator::valid(2, 4).unwrap();
        assert!(matches!(op.apply(&[1.0; 3]), Err(Error::Dimension(_))));
        assert!(matches!(op.adjoint_apply(&[1.0; 4]), Err(Error::Dimension(_))));
        assert_eq!("Circular".parse::<Mode>().unwrap(), Mode::Circular);
        assert!("full".parse::<Mode>().is_err());
    }

    #[test]
    fn long_signals_reseed_without_drift() {
        let n = RESEED_MIN_LEN + 3 * RESEED_INTERVAL + 17;
        let k = 7;
        let x: Vec<i64> = (0..n as i64).map(|i| (i * 7919) % 1013 - 500).collect();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        for mode in [Mode::Valid, Mode::Circular] {
            let op = BoxOperator::new(k, n, mode).unwrap();
            let exact = op.apply_exact(&x).unwrap();
            let approx = op.apply(&xf).unwrap();
            for (e, a) in exact.iter().zip(&approx) {
                assert_eq!(*e as f64, *a);
            }
        }
    }

    #[test]
    fn circular_kernel_shrinks_when_k_does_not_divide_n() {
        assert_eq!(BoxOperator::circular(3, 6).unwrap().kernel_vectors().len(), 2);
        assert_eq!(BoxOperator::valid(3, 7).unwrap().kernel_vectors().len(), 2);
        let circ = BoxOperator::circular(3, 7).unwrap();
        for z in circ.kernel_vectors() {
            assert!(norm_inf(&circ.apply(&z).unwrap()) < 1e-12);
        }
        // gcd(3, 7) = 1 leaves only the zero vector.
        assert!(circ.kernel_vectors().is_empty());
        // gcd(4, 6) = 2: kernel of B is the alternating vector.
        assert_eq!(BoxOperator::circular(4, 6).unwrap().kernel_vectors().len(), 1);
    }

    fn op_and_signal() -> impl Strategy<Value = (BoxOperator, Vec<f64>, Vec<f64>)> {
        (1usize..=64, any::<bool>())
            .prop_flat_map(|(n, circ)| (1..=n, Just(n), Just(circ)))
            .prop_flat_map(|(k, n, circ)| {
                let mode = if circ { Mode::Circular } else { Mode::Valid };
                let op = BoxOperator::new(k, n, mode).unwrap();
                (
                    Just(op),
                    proptest::collection::vec(-100.0f64..100.0, n),
                    proptest::collection::vec(-100.0f64..100.0, op.output_len()),
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn recurrence_matches_matrix_product((op, x, _y) in op_and_signal()) {
            let fast = op.apply(&x).unwrap();
            let dense = op.materialize().unwrap().mul_vec(&x);
            prop_assert!(max_abs_diff(&fast, &dense) <= 1e-10 * (1.0 + norm_inf(&x)));
        }

        #[test]
        fn adjoint_identity((op, x, y) in op_and_signal()) {
            let lhs = dot(&op.apply(&x).unwrap(), &y);
            let rhs = dot(&x, &op.adjoint_apply(&y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * norm2(&x) * norm2(&y) + 1e-300);
        }

        #[test]
        fn adjoint_matches_matrix_transpose((op, _x, y) in op_and_signal()) {
            let fast = op.adjoint_apply(&y).unwrap();
            let dense = op.materialize().unwrap().tr_mul_vec(&y);
            prop_assert!(max_abs_diff(&fast, &dense) <= 1e-10 * (1.0 + norm_inf(&y)));
        }
    }
}
