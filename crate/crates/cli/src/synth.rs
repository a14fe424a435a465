//! Seeded synthetic inputs.

use boxdeconv::recovery::random_sparse_signal;
use boxdeconv::Image2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Piecewise-constant `h x w` image in `[0, 1]`: a dim background with
/// `count` axis-aligned rectangles painted over it in order. Rectangle
/// sides are between a sixth and a half of the image size.
pub fn rectangles_target(h: usize, w: usize, count: usize, seed: u64) -> CliResult<Image2D> {
    if h < 6 || w < 6 {
        return Err(CliError::Dimension(format!("target {h}x{w} is too small for rectangles")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = rng.random_range(0.0..0.2);
    let mut values = vec![background; h * w];
    for _ in 0..count {
        let rh = rng.random_range(h / 6..=h / 2);
        let rw = rng.random_range(w / 6..=w / 2);
        let top = rng.random_range(0..=h - rh);
        let left = rng.random_range(0..=w - rw);
        let level = rng.random_range(0.3..1.0);
        for i in top..top + rh {
            values[i * w + left..i * w + left + rw].fill(level);
        }
    }
    Ok(Image2D::new(h, w, values)?)
}

pub fn sparse_signal(n: usize, sparsity: usize, seed: u64) -> CliResult<Vec<f64>> {
    if sparsity > n {
        return Err(CliError::Dimension(format!("sparsity {sparsity} exceeds n={n}")));
    }
    Ok(random_sparse_signal(n, sparsity, &mut ChaCha8Rng::seed_from_u64(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_are_seeded_and_piecewise_constant() {
        let a = rectangles_target(32, 40, 4, 9).unwrap();
        assert_eq!(a, rectangles_target(32, 40, 4, 9).unwrap());
        assert_ne!(a, rectangles_target(32, 40, 4, 10).unwrap());
        assert!(a.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        let mut levels: Vec<u64> = a.as_slice().iter().map(|v| v.to_bits()).collect();
        levels.sort_unstable();
        levels.dedup();
        assert!(levels.len() <= 5);
    }

    #[test]
    fn sparse_signal_has_the_requested_support() {
        let x = sparse_signal(20, 5, 1).unwrap();
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 5);
        assert!(sparse_signal(3, 4, 1).is_err());
    }
}
