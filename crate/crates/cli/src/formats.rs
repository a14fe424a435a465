//! File formats.
//!
//! - **Signals**: UTF-8 text, one decimal value per line. Blank lines and
//!   lines starting with `#` are ignored, except an optional `# n=<len>`
//!   header, which must match the number of values.
//! - **Graymaps**: PGM, ASCII (`P2`) or binary (`P5`), maxval 255 or 65535.
//!   Gray levels are mapped to `[0, 1]` on read; on write, values are divided
//!   by a caller-supplied peak and clamped to `[0, 1]`.
//! - **BDF1**: raw float grids. The layout is the 4 magic bytes `BDF1`,
//!   height and width as little-endian `u32`, then `height * width`
//!   little-endian `f64` values in row-major order. Nothing follows.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use boxdeconv::Image2D;
use image::codecs::pnm::{GraymapHeader, PnmEncoder, SampleEncoding};
use image::{DynamicImage, ImageBuffer, ImageReader, Luma};

use crate::error::{CliError, CliResult};

pub const BDF1_MAGIC: &[u8; 4] = b"BDF1";

pub fn parse_signal(text: &str) -> CliResult<Vec<f64>> {
    let mut header = None;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("n=") {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Parse(format!("line {}: bad header `{line}`", lineno + 1)))?;
                header = Some(n);
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::Parse(format!("line {}: `{line}` is not a number", lineno + 1)))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("line {}: value is not finite", lineno + 1)));
        }
        values.push(v);
    }
    if let Some(n) = header {
        if n != values.len() {
            return Err(CliError::Dimension(format!(
                "header declares n={n} but the file holds {} values",
                values.len()
            )));
        }
    }
    if values.is_empty() {
        return Err(CliError::Parse("signal file holds no values".into()));
    }
    Ok(values)
}

pub fn format_signal(values: &[f64]) -> String {
    let mut out = format!("# n={}\n", values.len());
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn read_signal(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    parse_signal(&text)
}

pub fn write_signal(path: &Path, values: &[f64]) -> CliResult<()> {
    fs::write(path, format_signal(values)).map_err(|e| CliError::io(path.display(), e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Bdf1,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "pgm" | "pnm" => Ok(ImageFormat::Pgm),
            "bdf" | "bdf1" => Ok(ImageFormat::Bdf1),
            _ => Err(CliError::Usage(format!(
                "{}: image files must end in .pgm or .bdf",
                path.display()
            ))),
        }
    }

    pub fn is_image_path(path: &Path) -> bool {
        Self::from_path(path).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmOptions {
    pub ascii: bool,
    /// 16-bit samples (maxval 65535) instead of 8-bit.
    pub wide: bool,
    /// Value written as full white.
    pub peak: f64,
}

impl Default for PgmOptions {
    fn default() -> Self {
        Self {
            ascii: false,
            wide: true,
            peak: 1.0,
        }
    }
}

pub fn encode_bdf1(img: &Image2D) -> CliResult<Vec<u8>> {
    let (h, w) = img.dims();
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| CliError::Dimension(format!("dimension {v} does not fit BDF1")))
    };
    let mut out = Vec::with_capacity(12 + 8 * h * w);
    out.extend_from_slice(BDF1_MAGIC);
    out.extend_from_slice(&to_u32(h)?.to_le_bytes());
    out.extend_from_slice(&to_u32(w)?.to_le_bytes());
    for v in img.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_bdf1(bytes: &[u8]) -> CliResult<Image2D> {
    if bytes.len() < 12 || &bytes[..4] != BDF1_MAGIC {
        return Err(CliError::Parse("not a BDF1 file (bad magic)".into()));
    }
    let h = u32::from_le_bytes(bytes[4..8].try_into().expect("slice of 4")) as usize;
    let w = u32::from_le_bytes(bytes[8..12].try_into().expect("slice of 4")) as usize;
    let expected = h
        .checked_mul(w)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(12))
        .ok_or_else(|| CliError::Parse("BDF1 dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(CliError::Parse(format!(
            "BDF1 {h}x{w} needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let values = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Image2D::new(h, w, values).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn read_pgm(path: &Path) -> CliResult<Image2D> {
    let reader = ImageReader::open(path)
        .map_err(|e| CliError::io(path.display(), e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path.display(), e))?;
    let decoded = reader
        .decode()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let values: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => {
            buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()
        }
        other => {
            return Err(CliError::Parse(format!(
                "{}: expected a graymap, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    Image2D::new(h, w, values).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn write_pgm(path: &Path, img: &Image2D, opts: &PgmOptions) -> CliResult<()> {
    if !(opts.peak > 0.0 && opts.peak.is_finite()) {
        return Err(CliError::Usage(format!("PGM peak must be positive, got {}", opts.peak)));
    }
    let (h, w) = img.dims();
    let (w32, h32) = (
        u32::try_from(w).map_err(|_| CliError::Dimension("image too wide for PGM".into()))?,
        u32::try_from(h).map_err(|_| CliError::Dimension("image too tall for PGM".into()))?,
    );
    let unit = |v: &f64| (v / opts.peak).clamp(0.0, 1.0);
    let dynamic = if opts.wide {
        let raw = img.as_slice().iter().map(|v| (unit(v) * 65535.0).round() as u16).collect();
        DynamicImage::ImageLuma16(ImageBuffer::<Luma<u16>, _>::from_raw(w32, h32, raw).expect("buffer size"))
    } else {
        let raw = img.as_slice().iter().map(|v| (unit(v) * 255.0).round() as u8).collect();
        DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w32, h32, raw).expect("buffer size"))
    };
    let encoding = if opts.ascii { SampleEncoding::Ascii } else { SampleEncoding::Binary };
    let file = fs::File::create(path).map_err(|e| CliError::io(path.display(), e))?;
    let mut writer = BufWriter::new(file);
    let header = GraymapHeader {
        encoding,
        height: h32,
        width: w32,
        maxwhite: if opts.wide { 65535 } else { 255 },
    };
    let encoder = PnmEncoder::new(&mut writer).with_header(header.into());
    dynamic
        .write_with_encoder(encoder)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    writer.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn read_image(path: &Path) -> CliResult<Image2D> {
    match ImageFormat::from_path(path)? {
        ImageFormat::Pgm => read_pgm(path),
        ImageFormat::Bdf1 => {
            let bytes = fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
            decode_bdf1(&bytes)
        }
    }
}

/// Writes by extension; `pgm` only applies to PGM output.
pub fn write_image(path: &Path, img: &Image2D, pgm: &PgmOptions) -> CliResult<()> {
    match ImageFormat::from_path(path)? {
        ImageFormat::Pgm => write_pgm(path, img, pgm),
        ImageFormat::Bdf1 => {
            fs::write(path, encode_bdf1(img)?).map_err(|e| CliError::io(path.display(), e))
        }
    }
}
