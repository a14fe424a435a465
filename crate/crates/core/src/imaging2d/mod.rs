//! Pixel-shift camera simulation and TV-regularized 2D reconstruction.
//!
//! A sensor whose pixels are `k x k` blocks of the target grid, shifted
//! through all `k^2` sub-pixel offsets, records exactly the valid `k x k`
//! box convolution of the target once the frames are interleaved
//! ([`scan_frames`], [`interleave`]). [`tv_reconstruct`] inverts that
//! blur by minimizing `|A x - y|_2^2 + lambda |grad x|_1`.

mod gradient;
mod scan;
mod tv;

use libm::log10;

pub use gradient::{divergence, gradient, GradientField};
pub use scan::{interleave, scan_frames, simulate_scan, ScanConfig, SensorFrame};
pub use tv::{tv_objective, tv_reconstruct, Checkpoint, StepRule, TvConfig, TvError, TvLog, TvOutput};

use crate::boxconv::Image2D;
use crate::error::{dim_err, Error, Result};

/// Peak signal-to-noise ratio `10 log10(peak^2 / MSE)` in dB; identical
/// images give `f64::INFINITY`.
pub fn psnr(a: &Image2D, b: &Image2D, peak: f64) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(dim_err!(
            "cannot compare a {}x{} image with a {}x{} image",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        ));
    }
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("peak must be positive, got {peak}")));
    }
    let mse = mean_squared_error(a.as_slice(), b.as_slice());
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * log10(peak * peak / mse))
}

/// `|a - b|_2 / |b|_2`, or `|a|_2` when `b` is zero.
pub fn relative_error(a: &Image2D, b: &Image2D) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(dim_err!("relative error needs images of equal size"));
    }
    let diff: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let base = crate::linalg::norm2(b.as_slice());
    let diff = libm::sqrt(diff);
    Ok(if base == 0.0 { diff } else { diff / base })
}

fn mean_squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}
