use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::boxconv::{apply2d, Image2D};
use crate::error::{dim_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Sensor pixel edge, in target pixels.
    pub k: usize,
    /// Standard deviation of the additive Gaussian noise; 0 disables it.
    pub noise_sigma: f64,
}

impl ScanConfig {
    pub fn noiseless(k: usize) -> Self {
        Self { k, noise_sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("sensor pixel size must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "noise sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Interleaved measurement of `target` by the shifted coarse sensor: the
/// `(h-k+1) x (w-k+1)` valid box convolution plus i.i.d. Gaussian noise
/// drawn from a ChaCha8 stream seeded with `seed`.
///
/// Without noise the result is bit-identical to [`apply2d`].
pub fn simulate_scan(target: &Image2D, cfg: &ScanConfig, seed: u64) -> Result<Image2D> {
    cfg.validate()?;
    let clean = apply2d(target, cfg.k)?;
    if cfg.noise_sigma == 0.0 {
        return Ok(clean);
    }
    let normal = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|e| Error::InvalidInput(alloc::format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = clean.dims();
    let noisy = clean
        .into_vec()
        .into_iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    Image2D::new(h, w, noisy)
}

/// One exposure of the coarse sensor, shifted by `offset` target pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub offset: (usize, usize),
    pub rows: usize,
    pub cols: usize,
    /// Row-major block sums; empty when the shifted sensor sees no full block.
    pub values: Vec<f64>,
}

/// The `k^2` exposures of a sensor with `k x k` pixels, one per sub-pixel
/// shift `(a, b)` in `0..k`. Pixel `(I, J)` of frame `(a, b)` integrates the
/// target block with top-left corner `(a + k I, b + k J)`.
///
/// Frames come in row-major order of their offset.
pub fn scan_frames(target: &Image2D, k: usize) -> Result<Vec<SensorFrame>> {
    let (h, w) = target.dims();
    if k == 0 || k > h.min(w) {
        return Err(dim_err!("sensor pixel size {k} does not fit a {h}x{w} target"));
    }
    let blocks = |len: usize, off: usize| if off + k <= len { (len - off - k) / k + 1 } else { 0 };
    let mut frames = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let (rows, cols) = (blocks(h, a), blocks(w, b));
            let mut values = Vec::with_capacity(rows * cols);
            for bi in 0..rows {
                for bj in 0..cols {
                    let (top, left) = (a + k * bi, b + k * bj);
                    let mut sum = 0.0;
                    for r in top..top + k {
                        for c in left..left + k {
                            sum += target.get(r, c);
                        }
                    }
                    values.push(sum);
                }
            }
            frames.push(SensorFrame {
                offset: (a, b),
                rows,
                cols,
                values,
            });
        }
    }
    Ok(frames)
}

/// Re-arranges the frames of [`scan_frames`] into one
/// `(h-k+1) x (w-k+1)` measurement: output pixel `(i, j)` is pixel
/// `(i / k, j / k)` of the frame with offset `(i mod k, j mod k)`.
pub fn interleave(frames: &[SensorFrame], k: usize, height: usize, width: usize) -> Result<Image2D> {
    if k == 0 || frames.len() != k * k {
        return Err(dim_err!("expected {} frames for k={k}, got {}", k * k, frames.len()));
    }
    let mut out = Vec::with_capacity(height * width);
    for i in 0..height {
        for j in 0..width {
            let f = &frames[(i % k) * k + j % k];
            let (bi, bj) = (i / k, j / k);
            if f.offset != (i % k, j % k) || bi >= f.rows || bj >= f.cols {
                return Err(dim_err!(
                    "frame with offset {:?} does not cover output pixel ({i}, {j})",
                    f.offset
                ));
            }
            out.push(f.values[bi * f.cols + bj]);
        }
    }
    Image2D::new(height, width, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn figure_scale_measurement() {
        let t = Image2D::zeros(256, 256).unwrap();
        let y = simulate_scan(&t, &ScanConfig::noiseless(20), 0).unwrap();
        assert_eq!(y.dims(), (237, 237));
    }

    #[test]
    fn constant_target_gives_constant_times_k_squared() {
        for k in 1..=5 {
            let y = simulate_scan(&Image2D::filled(9, 7, 0.75).unwrap(), &ScanConfig::noiseless(k), 1).unwrap();
            let expected = 0.75 * (k * k) as f64;
            assert!(y.as_slice().iter().all(|&v| (v - expected).abs() <= 1e-12));
        }
    }

    #[test]
    fn noiseless_scan_is_apply2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Image2D::from_fn(10, 12, |_, _| rng.random::<f64>()).unwrap();
        let y = simulate_scan(&t, &ScanConfig::noiseless(3), 99).unwrap();
        assert_eq!(y, apply2d(&t, 3).unwrap());
    }

    #[test]
    fn noise_is_seeded() {
        let t = Image2D::filled(8, 8, 1.0).unwrap();
        let cfg = ScanConfig { k: 2, noise_sigma: 0.1 };
        let a = simulate_scan(&t, &cfg, 4).unwrap();
        assert_eq!(a, simulate_scan(&t, &cfg, 4).unwrap());
        assert_ne!(a, simulate_scan(&t, &cfg, 5).unwrap());
        assert_ne!(a, apply2d(&t, 2).unwrap());
    }

    #[test]
    fn invalid_configs() {
        let t = Image2D::zeros(4, 4).unwrap();
        assert!(matches!(simulate_scan(&t, &ScanConfig::noiseless(5), 0), Err(Error::Dimension(_))));
        assert!(simulate_scan(&t, &ScanConfig { k: 2, noise_sigma: -1.0 }, 0).is_err());
        assert!(simulate_scan(&t, &ScanConfig::noiseless(0), 0).is_err());
    }

    #[test]
    fn interleaved_frames_match_the_box_blur() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (h, w, k) in [(5, 5, 2), (9, 7, 3), (6, 13, 6), (4, 4, 4), (3, 8, 1)] {
            let t = Image2D::from_fn(h, w, |_, _| rng.random_range(-9i32..=9) as f64).unwrap();
            let y = apply2d(&t, k).unwrap();
            let frames = scan_frames(&t, k).unwrap();
            assert_eq!(interleave(&frames, k, y.height(), y.width()).unwrap(), y);
        }
    }

    #[test]
    fn interleave_checks_coverage() {
        let t = Image2D::zeros(4, 4).unwrap();
        let frames = scan_frames(&t, 2).unwrap();
        assert!(interleave(&frames, 2, 4, 4).is_err());
        assert!(interleave(&frames[..3], 2, 3, 3).is_err());
    }
}
