//! Numerical replay of Burch holograms and recovery of the secret.
//!
//! The replay plane of a real amplitude hologram carries three terms: a
//! central delta from the 0.5 bias, the object copy at `+offset` along the
//! carrier axis, and its phase-conjugated mirror twin at `-offset`, where
//! `offset = round(carrier_cycles * N)`. Decryption crops the `+1` order
//! window per hologram, normalizes the intensities, multiplies them
//! (stacked transparencies multiply transmittances), and binarizes with a
//! dark-is-ink threshold.

use crate::cgh::{CarrierAxis, Hologram};
use crate::error::{Error, Result};
use crate::numerics::{crop_center, idft2_centered, ComplexField};
use crate::vc::BinaryImage;

/// Which diffraction order to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMethod {
    /// Divide by the maximum value.
    Max,
    /// Divide by the 99th-percentile value, then clip to 1.
    Percentile99,
}

/// How to superpose the reconstructed share windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Pixel-wise product: stacked transparencies multiply transmittances.
    Product,
    /// Pixel-wise minimum.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinarizeMethod {
    /// Black where intensity falls below the given threshold.
    Fixed(f64),
    /// Threshold from a 256-bin Otsu split of the intensity histogram.
    Otsu,
}

/// A rectangular grid of nonnegative real intensities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl IntensityImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("intensity dimensions must be positive"));
        }
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "value count {} does not match {width}x{height}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("intensities must be finite and >= 0"));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// The full replay of one hologram.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub full_field: ComplexField,
    pub plus_order: IntensityImage,
    pub minus_order: IntensityImage,
    /// Intensity at the grid center (the bias delta).
    pub dc_peak: f64,
}

/// Replays a hologram: the inverse centered transform of its transmittance
/// treated as a real field.
pub fn reconstruct_field(hologram: &Hologram) -> Result<ComplexField> {
    let field = ComplexField::from_real(hologram.width(), hologram.height(), hologram.values())?;
    idft2_centered(&field)
}

/// Crops one first-order window (share-sized) from a replay field and
/// returns per-sample intensity `|value|^2`.
///
/// The minus window is the mirror image of the plus window about the grid
/// center and is flipped in both axes, so both orders come out
/// pixel-aligned. On even window sizes the mirrored window sits one sample
/// past the naive `-offset` crop; the crop below accounts for that.
pub fn extract_order(
    field: &ComplexField,
    hologram: &Hologram,
    which: Order,
) -> Result<IntensityImage> {
    if field.width() != hologram.width() || field.height() != hologram.height() {
        return Err(Error::invalid(format!(
            "field {}x{} does not match hologram {}x{}",
            field.width(),
            field.height(),
            hologram.width(),
            hologram.height()
        )));
    }
    let offset = hologram.carrier_offset();
    let (win_w, win_h) = (hologram.share_width(), hologram.share_height());
    let axis = hologram.params().carrier_axis;
    match which {
        Order::Plus => {
            let (dr, dc) = match axis {
                CarrierAxis::Horizontal => (0, offset),
                CarrierAxis::Vertical => (offset, 0),
            };
            let window = crop_center(field, win_w, win_h, dr, dc)?;
            let values = window.values().iter().map(|v| v.norm_sqr()).collect();
            IntensityImage::new(win_w, win_h, values)
        }
        Order::Minus => {
            let adj_r = (win_h % 2 == 0) as isize;
            let adj_c = (win_w % 2 == 0) as isize;
            let (dr, dc) = match axis {
                CarrierAxis::Horizontal => (adj_r, -offset + adj_c),
                CarrierAxis::Vertical => (-offset + adj_r, adj_c),
            };
            let window = crop_center(field, win_w, win_h, dr, dc)?;
            let mut values = Vec::with_capacity(win_w * win_h);
            for row in 0..win_h {
                for col in 0..win_w {
                    let v = window.get(win_h - 1 - row, win_w - 1 - col);
                    values.push(v.norm_sqr());
                }
            }
            IntensityImage::new(win_w, win_h, values)
        }
    }
}

/// Replays a hologram and extracts both orders plus the central peak.
pub fn reconstruct(hologram: &Hologram) -> Result<ReconstructionResult> {
    let full_field = reconstruct_field(hologram)?;
    let plus_order = extract_order(&full_field, hologram, Order::Plus)?;
    let minus_order = extract_order(&full_field, hologram, Order::Minus)?;
    let dc_peak = full_field
        .get(full_field.height() / 2, full_field.width() / 2)
        .norm_sqr();
    Ok(ReconstructionResult {
        full_field,
        plus_order,
        minus_order,
        dc_peak,
    })
}

/// Rescales intensities into [0, 1]. An all-zero window stays all zero; a
/// zero 99th percentile falls back to the maximum.
pub fn normalize_intensity(window: &IntensityImage, method: NormalizeMethod) -> IntensityImage {
    let max = window.max();
    let denominator = match method {
        NormalizeMethod::Max => max,
        NormalizeMethod::Percentile99 => {
            let mut sorted = window.values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Nearest-rank: the ceil(0.99 * n)-th smallest value.
            let rank = ((0.99 * sorted.len() as f64).ceil() as usize).max(1);
            let p99 = sorted[rank - 1];
            if p99 > 0.0 {
                p99
            } else {
                max
            }
        }
    };
    if denominator == 0.0 {
        return window.clone();
    }
    let values = window
        .values
        .iter()
        .map(|v| (v / denominator).min(1.0))
        .collect();
    IntensityImage::new(window.width, window.height, values)
        .expect("normalized values stay finite and nonnegative")
}

/// Superposes two or more equally sized normalized windows.
pub fn superpose(windows: &[IntensityImage], mode: CombineMode) -> Result<IntensityImage> {
    if windows.len() < 2 {
        return Err(Error::invalid("superposition requires at least 2 windows"));
    }
    let (w, h) = (windows[0].width, windows[0].height);
    for window in &windows[1..] {
        if window.width != w || window.height != h {
            return Err(Error::invalid(format!(
                "window dimensions {}x{} do not match {w}x{h}",
                window.width, window.height
            )));
        }
    }
    let mut values = windows[0].values.clone();
    for window in &windows[1..] {
        for (v, &q) in values.iter_mut().zip(&window.values) {
            *v = match mode {
                CombineMode::Product => *v * q,
                CombineMode::Min => v.min(q),
            };
        }
    }
    IntensityImage::new(w, h, values)
}

/// Otsu's threshold over a 256-bin histogram of values in [0, 1].
///
/// Maximizes the between-class variance; ties (including degenerate
/// single-level inputs) resolve to the mean of the maximizing bin indices,
/// so two-level inputs split at the midpoint of their levels.
pub fn otsu_threshold(values: &[f64]) -> f64 {
    const BINS: usize = 256;
    let mut histogram = [0u64; BINS];
    for &v in values {
        let bin = (v * (BINS - 1) as f64).round() as usize;
        histogram[bin.min(BINS - 1)] += 1;
    }
    let total = values.len() as f64;
    let total_mean: f64 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum::<f64>()
        / total;

    let mut best = f64::NEG_INFINITY;
    let mut best_bins: Vec<usize> = Vec::new();
    let mut weight0 = 0.0;
    let mut sum0 = 0.0;
    for k in 0..BINS - 1 {
        weight0 += histogram[k] as f64;
        sum0 += k as f64 * histogram[k] as f64;
        let weight1 = total - weight0;
        if weight0 == 0.0 || weight1 == 0.0 {
            continue;
        }
        let mean0 = sum0 / weight0;
        let mean1 = (total_mean * total - sum0) / weight1;
        let variance = weight0 * weight1 * (mean0 - mean1) * (mean0 - mean1);
        if variance > best + 1e-9 {
            best = variance;
            best_bins = vec![k];
        } else if (variance - best).abs() <= 1e-9 {
            best_bins.push(k);
        }
    }
    if best_bins.is_empty() {
        // Single populated bin: split at the midpoint of the range.
        return 0.5;
    }
    let mean_bin = best_bins.iter().sum::<usize>() as f64 / best_bins.len() as f64;
    (mean_bin + 0.5) / (BINS - 1) as f64
}

/// Thresholds an intensity image in [0, 1] into ink: a pixel is black (1)
/// where intensity falls below the threshold.
pub fn binarize(image: &IntensityImage, method: BinarizeMethod) -> Result<BinaryImage> {
    if image.values.iter().any(|v| *v > 1.0) {
        return Err(Error::invalid("binarize expects values in [0, 1]"));
    }
    let threshold = match method {
        BinarizeMethod::Fixed(t) => {
            if !t.is_finite() {
                return Err(Error::invalid("threshold must be finite"));
            }
            t
        }
        BinarizeMethod::Otsu => otsu_threshold(&image.values),
    };
    let pixels = image
        .values
        .iter()
        .map(|&v| if v < threshold { 1 } else { 0 })
        .collect();
    BinaryImage::new(image.width, image.height, pixels)
}
