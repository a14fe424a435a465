use alloc::vec;
use alloc::vec::Vec;

use super::{valid_adjoint, valid_window_sums};
use crate::error::{dim_err, Error, Result};

/// Finite real-valued `height x width` grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Image2D {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(dim_err!("image dimensions must be positive, got {height}x{width}"));
        }
        if values.len() != height * width {
            return Err(dim_err!(
                "{} values cannot fill a {}x{} image",
                values.len(),
                height,
                width
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "pixel ({}, {}) is not finite",
                i / width,
                i % width
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                values.push(f(i, j));
            }
        }
        Self::new(height, width, values)
    }

    /// Skips the finiteness check; callers guarantee finite values.
    pub(crate) fn from_parts(height: usize, width: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Self {
            height,
            width,
            values,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.width + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Valid 2D convolution with the `k x k` all-ones box, one row pass then
/// one column pass. Output is `(h-k+1) x (w-k+1)`.
pub fn apply2d(x: &Image2D, k: usize) -> Result<Image2D> {
    let (h, w) = x.dims();
    if k == 0 || k > h.min(w) {
        return Err(dim_err!("box width k={k} does not fit a {h}x{w} image"));
    }
    let (mh, mw) = (h - k + 1, w - k + 1);
    let mut rows = Vec::with_capacity(h * mw);
    for i in 0..h {
        rows.extend(valid_window_sums(x.row(i), k));
    }
    let mut out = vec![0.0; mh * mw];
    let mut col = vec![0.0; h];
    for j in 0..mw {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rows[i * mw + j];
        }
        for (i, s) in valid_window_sums(&col, k).into_iter().enumerate() {
            out[i * mw + j] = s;
        }
    }
    Ok(Image2D::from_parts(mh, mw, out))
}

/// Transpose of [`apply2d`] for a `target_h x target_w` domain.
pub fn adjoint_apply2d(y: &Image2D, k: usize, target_h: usize, target_w: usize) -> Result<Image2D> {
    if k == 0 || k > target_h.min(target_w) {
        return Err(dim_err!(
            "box width k={k} does not fit a {target_h}x{target_w} image"
        ));
    }
    let (mh, mw) = (target_h - k + 1, target_w - k + 1);
    if y.dims() != (mh, mw) {
        return Err(dim_err!(
            "adjoint of a {}x{} target with k={} expects {}x{} measurements, got {}x{}",
            target_h,
            target_w,
            k,
            mh,
            mw,
            y.height(),
            y.width()
        ));
    }
    // Columns first: (mh x mw) -> (h x mw).
    let mut cols = vec![0.0; target_h * mw];
    let mut buf = vec![0.0; mh];
    for j in 0..mw {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = y.get(i, j);
        }
        for (i, s) in valid_adjoint(&buf, k, target_h).into_iter().enumerate() {
            cols[i * mw + j] = s;
        }
    }
    let mut out = Vec::with_capacity(target_h * target_w);
    for i in 0..target_h {
        out.extend(valid_adjoint(&cols[i * mw..(i + 1) * mw], k, target_w));
    }
    Ok(Image2D::from_parts(target_h, target_w, out))
}
