use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

/// Sparse test signal: `s` positions drawn uniformly without replacement,
/// each with a random sign and a magnitude uniform in `[1, 10]`.
///
/// Magnitudes are bounded away from zero so every drawn position really is
/// in the support.
pub fn random_sparse_signal<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Vec<f64> {
    assert!(s <= n, "sparsity {s} exceeds length {n}");
    let mut x = vec![0.0; n];
    for i in index::sample(rng, n, s).into_iter() {
        let magnitude = rng.random_range(1.0..=10.0);
        x[i] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }
    x
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: the root seed folded with `(n, k, sparsity, trial)`
/// through [`splitmix64`], one field at a time in that order.
///
/// ```text
/// h = splitmix64(root)
/// h = splitmix64(h ^ n); h = splitmix64(h ^ k)
/// h = splitmix64(h ^ sparsity); h = splitmix64(h ^ trial)
/// ```
pub fn trial_seed(root: u64, n: usize, k: usize, sparsity: usize, trial: usize) -> u64 {
    [n, k, sparsity, trial]
        .into_iter()
        .fold(splitmix64(root), |h, v| splitmix64(h ^ v as u64))
}
