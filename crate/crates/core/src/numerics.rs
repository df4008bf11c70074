//! Centered unitary 2-D discrete Fourier transforms and grid utilities.
//!
//! Conventions, pinned for bit-exact cross-checks:
//!
//! * the zero-frequency sample sits at index `(height / 2, width / 2)`
//!   (floor division), equivalent to shift -> transform -> shift;
//! * both directions scale by `1 / sqrt(width * height)`, so Parseval holds
//!   symmetrically;
//! * the forward kernel is `exp(+2*pi*i*(...))` and the inverse is its
//!   conjugate, which makes a spatial modulation `exp(+2*pi*i*c*t)` land at
//!   `+c*N` samples under the inverse transform.

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// A rectangular grid of complex amplitudes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    values: Vec<Complex<f64>>,
}

impl ComplexField {
    /// Builds a field from row-major values; every value must be finite.
    pub fn new(width: usize, height: usize, values: Vec<Complex<f64>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("field dimensions must be positive"));
        }
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "value count {} does not match {}x{}",
                values.len(),
                width,
                height
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("field contains non-finite values"));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![Complex::new(0.0, 0.0); width * height])
    }

    /// A field whose real parts are `values` and imaginary parts are zero.
    pub fn from_real(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            width,
            height,
            values.iter().map(|&v| Complex::new(v, 0.0)).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[Complex<f64>] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<f64> {
        self.values[row * self.width + col]
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// out[y][x] = src[(y + h/2) % h][(x + w/2) % w]: moves the center sample
/// to index 0.
fn ifftshift2(src: &[Complex<f64>], width: usize, height: usize) -> Vec<Complex<f64>> {
    let (cy, cx) = (height / 2, width / 2);
    let mut out = vec![Complex::new(0.0, 0.0); src.len()];
    for y in 0..height {
        let sy = (y + cy) % height;
        for x in 0..width {
            let sx = (x + cx) % width;
            out[y * width + x] = src[sy * width + sx];
        }
    }
    out
}

/// out[y][x] = src[(y - h/2) mod h][(x - w/2) mod w]: moves index 0 to the
/// center sample. Inverse of `ifftshift2`.
fn fftshift2(src: &[Complex<f64>], width: usize, height: usize) -> Vec<Complex<f64>> {
    let (cy, cx) = (height - height / 2, width - width / 2);
    let mut out = vec![Complex::new(0.0, 0.0); src.len()];
    for y in 0..height {
        let sy = (y + cy) % height;
        for x in 0..width {
            let sx = (x + cx) % width;
            out[y * width + x] = src[sy * width + sx];
        }
    }
    out
}

fn transpose(src: &[Complex<f64>], width: usize, height: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); src.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = src[y * width + x];
        }
    }
    out
}

fn transform(field: &ComplexField, direction: FftDirection) -> Result<ComplexField> {
    let (w, h) = (field.width, field.height);
    let mut planner = FftPlanner::new();

    let mut buf = ifftshift2(&field.values, w, h);

    let row_fft = planner.plan_fft(w, direction);
    let mut scratch = vec![Complex::new(0.0, 0.0); row_fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(w) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    let mut buf = transpose(&buf, w, h);
    let col_fft = planner.plan_fft(h, direction);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
    for col in buf.chunks_exact_mut(h) {
        col_fft.process_with_scratch(col, &mut scratch);
    }
    let buf = transpose(&buf, h, w);

    let scale = 1.0 / ((w * h) as f64).sqrt();
    let values = fftshift2(&buf, w, h)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    ComplexField::new(w, h, values)
}

/// Forward centered unitary DFT (kernel `exp(+2*pi*i...)`; rustfft calls
/// that direction "inverse").
pub fn dft2_centered(field: &ComplexField) -> Result<ComplexField> {
    transform(field, FftDirection::Inverse)
}

/// Inverse of [`dft2_centered`].
pub fn idft2_centered(field: &ComplexField) -> Result<ComplexField> {
    transform(field, FftDirection::Forward)
}

/// Embeds the field in a larger zero grid so that its center sample maps to
/// the new center sample (floor-division centers aligned).
pub fn zero_pad_center(
    field: &ComplexField,
    new_width: usize,
    new_height: usize,
) -> Result<ComplexField> {
    if new_width < field.width || new_height < field.height {
        return Err(Error::invalid(format!(
            "cannot pad {}x{} down to {new_width}x{new_height}",
            field.width, field.height
        )));
    }
    let row0 = new_height / 2 - field.height / 2;
    let col0 = new_width / 2 - field.width / 2;
    let mut values = vec![Complex::new(0.0, 0.0); new_width * new_height];
    for y in 0..field.height {
        let src = &field.values[y * field.width..(y + 1) * field.width];
        let dst = (row0 + y) * new_width + col0;
        values[dst..dst + field.width].copy_from_slice(src);
    }
    ComplexField::new(new_width, new_height, values)
}

/// Cuts out the window of the given size whose center sample sits at the
/// grid center plus the given offsets. The window must lie fully inside the
/// field; there is no wraparound.
pub fn crop_center(
    field: &ComplexField,
    window_width: usize,
    window_height: usize,
    center_row_offset: isize,
    center_col_offset: isize,
) -> Result<ComplexField> {
    if window_width == 0 || window_height == 0 {
        return Err(Error::invalid("window dimensions must be positive"));
    }
    let row0 = (field.height / 2) as isize + center_row_offset - (window_height / 2) as isize;
    let col0 = (field.width / 2) as isize + center_col_offset - (window_width / 2) as isize;
    if row0 < 0
        || col0 < 0
        || row0 + window_height as isize > field.height as isize
        || col0 + window_width as isize > field.width as isize
    {
        return Err(Error::invalid(format!(
            "window {window_width}x{window_height} at offset ({center_row_offset},{center_col_offset}) leaves the {}x{} grid",
            field.width, field.height
        )));
    }
    let (row0, col0) = (row0 as usize, col0 as usize);
    let mut values = Vec::with_capacity(window_width * window_height);
    for y in 0..window_height {
        let src = (row0 + y) * field.width + col0;
        values.extend_from_slice(&field.values[src..src + window_width]);
    }
    ComplexField::new(window_width, window_height, values)
}
