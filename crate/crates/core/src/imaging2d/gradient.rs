use alloc::vec;
use alloc::vec::Vec;

use crate::boxconv::Image2D;
use crate::error::{dim_err, Result};

/// Forward differences of an `h x w` image, without wrap-around.
///
/// `dx` is `(h-1) x w` with `dx[i][j] = x[i+1][j] - x[i][j]` (down the
/// columns); `dy` is `h x (w-1)` with `dy[i][j] = x[i][j+1] - x[i][j]`
/// (along the rows). Both are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    height: usize,
    width: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl GradientField {
    /// Field for an `height x width` image.
    pub fn new(height: usize, width: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(dim_err!("gradient of an empty image"));
        }
        if dx.len() != (height - 1) * width || dy.len() != height * (width - 1) {
            return Err(dim_err!(
                "gradient of a {height}x{width} image needs {} + {} entries, got {} + {}",
                (height - 1) * width,
                height * (width - 1),
                dx.len(),
                dy.len()
            ));
        }
        Ok(Self {
            height,
            width,
            dx,
            dy,
        })
    }

    pub(crate) fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            dx: vec![0.0; (height - 1) * width],
            dy: vec![0.0; height * (width - 1)],
        }
    }

    /// Dimensions of the source image.
    pub fn image_dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.dx, &mut self.dy)
    }

    /// Anisotropic total variation `sum |dx| + sum |dy|`.
    pub fn l1_norm(&self) -> f64 {
        self.dx.iter().chain(&self.dy).map(|v| v.abs()).sum()
    }

    pub fn dot(&self, other: &GradientField) -> f64 {
        self.dx
            .iter()
            .zip(&other.dx)
            .chain(self.dy.iter().zip(&other.dy))
            .map(|(a, b)| a * b)
            .sum()
    }
}

pub fn gradient(x: &Image2D) -> GradientField {
    let (h, w) = x.dims();
    let mut g = GradientField::zeros(h, w);
    gradient_into(x.as_slice(), h, w, &mut g);
    g
}

pub(crate) fn gradient_into(x: &[f64], h: usize, w: usize, g: &mut GradientField) {
    let (dx, dy) = g.parts_mut();
    for i in 0..h.saturating_sub(1) {
        for j in 0..w {
            dx[i * w + j] = x[(i + 1) * w + j] - x[i * w + j];
        }
    }
    for i in 0..h {
        for j in 0..w - 1 {
            dy[i * (w - 1) + j] = x[i * w + j + 1] - x[i * w + j];
        }
    }
}

/// Negative adjoint of [`gradient`]: `<gradient(x), g> = -<x, divergence(g)>`.
pub fn divergence(g: &GradientField) -> Image2D {
    let (h, w) = g.image_dims();
    let mut out = vec![0.0; h * w];
    divergence_into(g, &mut out);
    Image2D::from_parts(h, w, out)
}

pub(crate) fn divergence_into(g: &GradientField, out: &mut [f64]) {
    let (h, w) = g.image_dims();
    let (dx, dy) = (g.dx(), g.dy());
    for i in 0..h {
        for j in 0..w {
            let mut v = 0.0;
            if i + 1 < h {
                v += dx[i * w + j];
            }
            if i > 0 {
                v -= dx[(i - 1) * w + j];
            }
            if j + 1 < w {
                v += dy[i * (w - 1) + j];
            }
            if j > 0 {
                v -= dy[i * (w - 1) + j - 1];
            }
            out[i * w + j] = v;
        }
    }
}
