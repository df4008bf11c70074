//! Burch off-axis amplitude holograms of visual-cryptography shares.
//!
//! A share becomes an object wave (white sub-pixels transmit, black block),
//! its centered spectrum is computed, and the spectrum's magnitude and
//! phase are written onto a cosine carrier:
//! `H = 0.5 * (1 + A * cos(2*pi*c*t + phi))` with `A = |O| / max|O|`,
//! `phi = arg O`, and `t` the centered sample index along the carrier axis.
//! The result is a real transmittance grid in [0, 1], printable as a
//! transparency.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{dft2_centered, zero_pad_center, ComplexField};
use crate::vc::BinaryImage;

/// Direction of the cosine carrier fringes' variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierAxis {
    /// Carrier phase varies along columns.
    Horizontal,
    /// Carrier phase varies along rows.
    Vertical,
}

/// Optional per-sample random phase applied to the object wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diffuser {
    Off,
    RandomPhase,
}

/// Hologram synthesis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CghParams {
    /// Hologram grid size as a multiple of the share grid, per axis.
    pub pad_factor: u16,
    /// Carrier frequency in cycles per hologram sample.
    pub carrier_cycles: f64,
    pub carrier_axis: CarrierAxis,
    pub diffuser: Diffuser,
    pub diffuser_seed: u64,
}

impl Default for CghParams {
    fn default() -> Self {
        Self {
            pad_factor: 4,
            carrier_cycles: 0.25,
            carrier_axis: CarrierAxis::Horizontal,
            diffuser: Diffuser::Off,
            diffuser_seed: 0,
        }
    }
}

impl CghParams {
    /// Checks field ranges and the order-separation inequalities: with `S`
    /// the share size along the carrier axis and `N = pad_factor * S`, the
    /// replay orders at `+-carrier_cycles*N` must clear the central delta
    /// (`carrier_cycles*N > S/2`) and stay inside the grid
    /// (`carrier_cycles*N + S/2 <= N/2`). `S` cancels, so the check holds
    /// for every share size or for none.
    pub fn validate(&self) -> Result<()> {
        if self.pad_factor < 2 {
            return Err(Error::invalid("pad factor must be at least 2"));
        }
        if !(self.carrier_cycles > 0.0 && self.carrier_cycles < 0.5) {
            return Err(Error::invalid(
                "carrier frequency must lie in (0, 0.5) cycles per sample",
            ));
        }
        let cycles_per_share = self.carrier_cycles * self.pad_factor as f64;
        if cycles_per_share <= 0.5 {
            return Err(Error::invalid(format!(
                "carrier {} with pad factor {} puts the first order inside the zero order",
                self.carrier_cycles, self.pad_factor
            )));
        }
        if cycles_per_share + 0.5 > self.pad_factor as f64 / 2.0 {
            return Err(Error::invalid(format!(
                "carrier {} with pad factor {} pushes the first order off the grid",
                self.carrier_cycles, self.pad_factor
            )));
        }
        Ok(())
    }
}

/// A real amplitude hologram: transmittance values in [0, 1] plus the
/// carrier and padding metadata needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Hologram {
    width: usize,
    height: usize,
    values: Vec<f64>,
    params: CghParams,
    share_width: usize,
    share_height: usize,
    spectrum_max: f64,
}

impl Hologram {
    /// Validates the value range, the dimension relation
    /// `dims = pad_factor * share dims`, and the parameter invariants.
    pub fn new(
        width: usize,
        height: usize,
        values: Vec<f64>,
        params: CghParams,
        share_width: usize,
        share_height: usize,
        spectrum_max: f64,
    ) -> Result<Self> {
        params.validate()?;
        let pad = params.pad_factor as usize;
        if width != share_width * pad || height != share_height * pad {
            return Err(Error::invalid(format!(
                "hologram {width}x{height} is not pad factor {pad} times share {share_width}x{share_height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "value count {} does not match {width}x{height}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("hologram values must lie in [0, 1]"));
        }
        if !(spectrum_max.is_finite() && spectrum_max >= 0.0) {
            return Err(Error::invalid("spectrum maximum must be finite and >= 0"));
        }
        Ok(Self {
            width,
            height,
            values,
            params,
            share_width,
            share_height,
            spectrum_max,
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

    pub fn params(&self) -> &CghParams {
        &self.params
    }

    pub fn share_width(&self) -> usize {
        self.share_width
    }

    pub fn share_height(&self) -> usize {
        self.share_height
    }

    /// The normalization constant `max|O|` recorded at encode time.
    pub fn spectrum_max(&self) -> f64 {
        self.spectrum_max
    }

    /// Offset in samples of the first diffraction order from the grid
    /// center, along the carrier axis.
    pub fn carrier_offset(&self) -> isize {
        let n = match self.params.carrier_axis {
            CarrierAxis::Horizontal => self.width,
            CarrierAxis::Vertical => self.height,
        };
        (self.params.carrier_cycles * n as f64).round() as isize
    }
}

/// Turns a share into its padded object wave: white share pixels transmit
/// amplitude 1, black pixels 0, optionally diffused by a seeded uniform
/// random phase per share sample, then zero-padded by the pad factor with
/// centers aligned.
pub fn share_to_object_field(share: &BinaryImage, params: &CghParams) -> Result<ComplexField> {
    params.validate()?;
    let mut values: Vec<Complex<f64>> = share
        .pixels()
        .iter()
        .map(|&p| Complex::new((1 - p) as f64, 0.0))
        .collect();
    if params.diffuser == Diffuser::RandomPhase {
        let mut rng = ChaCha8Rng::seed_from_u64(params.diffuser_seed);
        for v in values.iter_mut() {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            *v *= Complex::from_polar(1.0, theta);
        }
    }
    let field = ComplexField::new(share.width(), share.height(), values)?;
    let pad = params.pad_factor as usize;
    zero_pad_center(&field, share.width() * pad, share.height() * pad)
}

/// Encodes an object wave as a Burch amplitude hologram.
///
/// The object must already be padded to `pad_factor` times the share grid;
/// the share size is recovered from that relation. An identically zero
/// spectrum (all-black share) encodes as the bias-only hologram with every
/// value 0.5.
pub fn burch_encode(object: &ComplexField, params: &CghParams) -> Result<Hologram> {
    params.validate()?;
    let pad = params.pad_factor as usize;
    let (w, h) = (object.width(), object.height());
    if w % pad != 0 || h % pad != 0 {
        return Err(Error::invalid(format!(
            "object {w}x{h} is not a multiple of pad factor {pad}"
        )));
    }
    let (share_width, share_height) = (w / pad, h / pad);
    if share_width == 0 || share_height == 0 {
        return Err(Error::invalid("object is smaller than the pad factor"));
    }

    let spectrum = dft2_centered(object)?;
    let spectrum_max = spectrum.values().iter().map(|v| v.norm()).fold(0.0, f64::max);

    let (cy, cx) = (h / 2, w / 2);
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let s = spectrum.get(y, x);
            let (amplitude, phase) = if spectrum_max == 0.0 {
                (0.0, 0.0)
            } else {
                (s.norm() / spectrum_max, s.arg())
            };
            let t = match params.carrier_axis {
                CarrierAxis::Horizontal => x as f64 - cx as f64,
                CarrierAxis::Vertical => y as f64 - cy as f64,
            };
            let fringe = (2.0 * PI * params.carrier_cycles * t + phase).cos();
            values.push(0.5 * (1.0 + amplitude * fringe));
        }
    }
    Hologram::new(
        w,
        h,
        values,
        params.clone(),
        share_width,
        share_height,
        spectrum_max,
    )
}

/// Rounds every transmittance value to the nearest of `2^bits` levels
/// (`bits` is 8 or 16), modeling printing or display bit depth. Idempotent.
pub fn quantize_hologram(hologram: &Hologram, bits: u8) -> Result<Hologram> {
    if bits != 8 && bits != 16 {
        return Err(Error::invalid(format!(
            "quantization depth {bits} is not 8 or 16"
        )));
    }
    let levels = ((1u32 << bits) - 1) as f64;
    let values = hologram
        .values
        .iter()
        .map(|v| (v * levels).round() / levels)
        .collect();
    Hologram::new(
        hologram.width,
        hologram.height,
        values,
        hologram.params.clone(),
        hologram.share_width,
        hologram.share_height,
        hologram.spectrum_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_share(width: usize, height: usize, seed: u64) -> BinaryImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..width * height).map(|_| rng.gen_range(0..2u8)).collect();
        BinaryImage::new(width, height, pixels).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(CghParams::default().validate().is_ok());
        let mut p = CghParams::default();
        p.pad_factor = 1;
        assert!(p.validate().is_err());
        // pad 2 admits no carrier: the separation interval is empty.
        let mut p = CghParams::default();
        p.pad_factor = 2;
        for carrier in [0.1, 0.25, 0.4] {
            p.carrier_cycles = carrier;
            assert!(p.validate().is_err());
        }
        // Too low: first order inside the zero order.
        let mut p = CghParams::default();
        p.carrier_cycles = 0.1;
        assert!(p.validate().is_err());
        // Too high: first order off the grid.
        p.carrier_cycles = 0.45;
        assert!(p.validate().is_err());
        p.carrier_cycles = 0.3;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn all_black_share_gives_zero_field_and_bias_hologram() {
        let share = BinaryImage::filled(4, 4, 1).unwrap();
        let params = CghParams::default();
        let object = share_to_object_field(&share, &params).unwrap();
        assert!(object.values().iter().all(|v| v.norm() == 0.0));
        let hologram = burch_encode(&object, &params).unwrap();
        assert!(hologram.values().iter().all(|&v| v == 0.5));
        assert_eq!(hologram.spectrum_max(), 0.0);
    }

    #[test]
    fn object_field_is_binary_without_diffuser() {
        let share = random_share(6, 4, 5);
        let params = CghParams::default();
        let object = share_to_object_field(&share, &params).unwrap();
        assert_eq!(object.width(), 24);
        assert_eq!(object.height(), 16);
        for v in object.values() {
            assert!(v.im == 0.0 && (v.re == 0.0 || v.re == 1.0));
        }
        // White count in the field matches the share.
        let whites: f64 = object.values().iter().map(|v| v.re).sum();
        assert_eq!(whites as usize, share.pixels().len() - share.weight());
    }

    #[test]
    fn diffuser_preserves_modulus_and_is_reproducible() {
        let share = random_share(6, 6, 8);
        let mut params = CghParams::default();
        let plain = share_to_object_field(&share, &params).unwrap();
        params.diffuser = Diffuser::RandomPhase;
        params.diffuser_seed = 99;
        let diffused = share_to_object_field(&share, &params).unwrap();
        for (a, b) in plain.values().iter().zip(diffused.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let again = share_to_object_field(&share, &params).unwrap();
        assert_eq!(diffused, again);
        params.diffuser_seed = 100;
        let other = share_to_object_field(&share, &params).unwrap();
        assert_ne!(diffused, other);
    }

    #[test]
    fn centered_delta_encodes_pure_carrier() {
        // A delta object has a constant zero-phase spectrum, so the
        // hologram is the bare fringe 0.5*(1 + cos(2*pi*c*t)).
        let n = 16usize;
        let mut values = vec![Complex::new(0.0, 0.0); n * n];
        values[(n / 2) * n + n / 2] = Complex::new(1.0, 0.0);
        let object = ComplexField::new(n, n, values).unwrap();
        let params = CghParams::default();
        let hologram = burch_encode(&object, &params).unwrap();
        for y in 0..n {
            for x in 0..n {
                let t = x as f64 - (n / 2) as f64;
                let expected = 0.5 * (1.0 + (2.0 * PI * 0.25 * t).cos());
                assert!((hologram.values()[y * n + x] - expected).abs() < 1e-12);
            }
        }
        // Period of the fringes is 1/c = 4 samples.
        assert!((hologram.values()[4] - hologram.values()[8]).abs() < 1e-12);
    }

    #[test]
    fn hologram_range_and_mean() {
        let share = random_share(16, 16, 13);
        let params = CghParams::default();
        let object = share_to_object_field(&share, &params).unwrap();
        let hologram = burch_encode(&object, &params).unwrap();
        assert!(hologram.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let n = hologram.values().len() as f64;
        let mean = hologram.values().iter().sum::<f64>() / n;
        let bound = 2.0 / (hologram.width() as f64);
        assert!((mean - 0.5).abs() <= bound, "mean {mean}");
    }

    #[test]
    fn encoding_is_deterministic() {
        let share = random_share(8, 8, 21);
        let params = CghParams::default();
        let a = burch_encode(&share_to_object_field(&share, &params).unwrap(), &params).unwrap();
        let b = burch_encode(&share_to_object_field(&share, &params).unwrap(), &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn encode_rejects_unpadded_object() {
        let object = ComplexField::zeros(10, 10).unwrap();
        let params = CghParams::default();
        assert!(matches!(
            burch_encode(&object, &params),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn carrier_offset_matches_grid() {
        let share = random_share(8, 8, 2);
        let params = CghParams::default();
        let hologram =
            burch_encode(&share_to_object_field(&share, &params).unwrap(), &params).unwrap();
        // 0.25 cycles/sample on a 32-wide grid: offset 8 = share size.
        assert_eq!(hologram.carrier_offset(), 8);
    }

    #[test]
    fn quantization_examples() {
        // The all-black share encodes as the uniform bias 0.5, which maps
        // to 127.5 and rounds away from zero to 128.
        let params = CghParams::default();
        let bias = burch_encode(
            &share_to_object_field(&BinaryImage::filled(4, 4, 1).unwrap(), &params).unwrap(),
            &params,
        )
        .unwrap();
        let q8 = quantize_hologram(&bias, 8).unwrap();
        assert!(q8.values().iter().all(|&v| v == 128.0 / 255.0));
        assert_eq!(quantize_hologram(&q8, 8).unwrap(), q8);

        let share = random_share(4, 4, 3);
        let hologram =
            burch_encode(&share_to_object_field(&share, &params).unwrap(), &params).unwrap();
        let q16 = quantize_hologram(&hologram, 16).unwrap();
        assert_eq!(quantize_hologram(&q16, 16).unwrap(), q16);
        assert!(matches!(
            quantize_hologram(&hologram, 12),
            Err(Error::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn prop_hologram_values_in_unit_interval(
            w in 1usize..5,
            h in 1usize..5,
            seed in 0u64..200,
            diffuse in proptest::bool::ANY,
        ) {
            let share = random_share(w, h, seed);
            let params = CghParams {
                diffuser: if diffuse { Diffuser::RandomPhase } else { Diffuser::Off },
                diffuser_seed: seed,
                ..CghParams::default()
            };
            let object = share_to_object_field(&share, &params).unwrap();
            let hologram = burch_encode(&object, &params).unwrap();
            prop_assert!(hologram.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
