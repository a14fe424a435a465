use boxdeconv::boxconv::{adjoint_apply2d, apply2d, in_kernel, kernel_basis};
use boxdeconv::linalg::{dot, norm2};
use boxdeconv::{BoxOperator, Image2D, Mode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn valid_operator_has_full_row_rank() {
    for n in 1..=48 {
        for k in 1..=n {
            let a = BoxOperator::valid(k, n).unwrap().materialize().unwrap();
            assert_eq!(a.rank(1e-10), n - k + 1, "n={n} k={k}");
        }
    }
}

#[test]
fn kernel_basis_spans_the_valid_nullspace() {
    for n in 2..=30 {
        for k in 2..=n {
            let basis = kernel_basis(k, n).unwrap();
            assert_eq!(basis.dim(), k - 1);
            let a = BoxOperator::valid(k, n).unwrap().materialize().unwrap();
            for v in basis.vectors() {
                assert!(in_kernel(v, k, Mode::Valid).unwrap());
                assert!(a.mul_vec(v).iter().all(|&e| e == 0.0));
            }
            // Independent vectors, and nothing else in the kernel.
            let stacked = boxdeconv::linalg::DenseMatrix::from_rows(basis.vectors()).unwrap();
            assert_eq!(stacked.rank(1e-10), k - 1);
        }
    }
}

#[test]
fn circular_kernel_dimension_is_gcd_minus_one() {
    // The circulant's eigenvalues sum k consecutive n-th roots of unity;
    // exactly gcd(n, k) - 1 of them vanish.
    for n in 1..=30 {
        for k in 1..=n {
            let op = BoxOperator::circular(k, n).unwrap();
            assert_eq!(op.kernel_vectors().len(), gcd(n, k) - 1, "n={n} k={k}");
            let b = op.materialize().unwrap();
            assert_eq!(b.rank(1e-10), n - gcd(n, k) + 1, "n={n} k={k}");
        }
    }
}

#[test]
fn circular_kernel_sits_inside_the_valid_kernel() {
    for n in 2..=24 {
        for k in 2..=n {
            for z in BoxOperator::circular(k, n).unwrap().kernel_vectors() {
                assert!(in_kernel(&z, k, Mode::Valid).unwrap());
                assert!(in_kernel(&z, k, Mode::Circular).unwrap());
            }
        }
    }
}

#[test]
fn recurrence_matches_the_matrix_for_all_small_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=64 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let scale = 1e-10 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for k in 1..=n {
            for mode in [Mode::Valid, Mode::Circular] {
                let op = BoxOperator::new(k, n, mode).unwrap();
                let fast = op.apply(&x).unwrap();
                let slow = op.materialize().unwrap().mul_vec(&x);
                assert!(fast.iter().zip(&slow).all(|(a, b)| (a - b).abs() <= scale));
            }
        }
    }
}

#[test]
fn adjoint_identity_in_one_and_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let n = rng.random_range(1..=40);
        let k = rng.random_range(1..=n);
        let mode = if rng.random_bool(0.5) { Mode::Valid } else { Mode::Circular };
        let op = BoxOperator::new(k, n, mode).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..op.output_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&op.apply(&x).unwrap(), &y);
        let rhs = dot(&x, &op.adjoint_apply(&y).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * norm2(&x) * norm2(&y));

        let (h, w) = (rng.random_range(k..=k + 8), rng.random_range(k..=k + 8));
        let x = Image2D::from_fn(h, w, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        let y = Image2D::from_fn(h - k + 1, w - k + 1, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        let lhs = dot(apply2d(&x, k).unwrap().as_slice(), y.as_slice());
        let rhs = dot(x.as_slice(), adjoint_apply2d(&y, k, h, w).unwrap().as_slice());
        assert!((lhs - rhs).abs() <= 1e-10 * norm2(x.as_slice()) * norm2(y.as_slice()));
    }
}

proptest! {
    #[test]
    fn integer_signals_are_convolved_exactly(
        x in prop::collection::vec(-1000i64..1000, 1..80),
        kf in 0.0f64..1.0,
    ) {
        let n = x.len();
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        for mode in [Mode::Valid, Mode::Circular] {
            let op = BoxOperator::new(k, n, mode).unwrap();
            let exact = op.apply_exact(&x).unwrap();
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let float = op.apply(&xf).unwrap();
            prop_assert!(exact.iter().zip(&float).all(|(&a, &b)| a as f64 == b));
        }
    }
}
