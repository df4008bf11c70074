//! Naor-Shamir visual cryptography: share generation, film-style stacking,
//! and the scheme's contrast/security statistics.
//!
//! Pixel polarity is fixed crate-wide: 1 is black ink (opaque), 0 is white
//! (transparent). Stacking transparencies accumulates ink, so a stacked
//! pixel is black if it is black in any share.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// A black-and-white raster. Pixel value 1 is black ink, 0 is white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    /// Builds an image from row-major pixels, each of which must be 0 or 1.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if let Some(v) = pixels.iter().find(|&&v| v > 1) {
            return Err(Error::invalid(format!("pixel value {v} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image with every pixel set to `value` (0 or 1).
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixel data.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Number of black pixels.
    pub fn weight(&self) -> usize {
        self.pixels.iter().map(|&p| p as usize).sum()
    }
}

/// Basis matrices and sub-pixel block geometry of a visual cryptography
/// scheme.
///
/// `s0` drives the expansion of white secret pixels and `s1` of black ones;
/// both are `n x m` binary matrices whose rows, under a shared random column
/// permutation, become the sub-pixel blocks placed in the `n` shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcScheme {
    name: String,
    share_count: usize,
    block_rows: usize,
    block_cols: usize,
    s0: Vec<Vec<u8>>,
    s1: Vec<Vec<u8>>,
}

impl VcScheme {
    /// Validates and builds a scheme. The pixel expansion is
    /// `block_rows * block_cols` and both matrices must have exactly that
    /// many columns, with entries in {0, 1}. The stacked (OR over rows)
    /// weight of `s1` must strictly exceed that of `s0`; a column
    /// permutation only rearranges the OR bits, so this single check covers
    /// every permutation.
    pub fn new(
        name: impl Into<String>,
        share_count: usize,
        block_rows: usize,
        block_cols: usize,
        s0: Vec<Vec<u8>>,
        s1: Vec<Vec<u8>>,
    ) -> Result<Self> {
        if share_count == 0 {
            return Err(Error::invalid("share count must be positive"));
        }
        if block_rows == 0 || block_cols == 0 {
            return Err(Error::invalid("block geometry must be positive"));
        }
        let m = block_rows * block_cols;
        for (label, matrix) in [("s0", &s0), ("s1", &s1)] {
            if matrix.len() != share_count {
                return Err(Error::invalid(format!(
                    "{label} has {} rows, expected {share_count}",
                    matrix.len()
                )));
            }
            for row in matrix {
                if row.len() != m {
                    return Err(Error::invalid(format!(
                        "{label} row has {} entries, expected {m}",
                        row.len()
                    )));
                }
                if row.iter().any(|&v| v > 1) {
                    return Err(Error::invalid(format!("{label} entries must be 0 or 1")));
                }
            }
        }
        let scheme = Self {
            name: name.into(),
            share_count,
            block_rows,
            block_cols,
            s0,
            s1,
        };
        if scheme.stacked_weight(1) <= scheme.stacked_weight(0) {
            return Err(Error::invalid(
                "stacked weight of s1 must strictly exceed that of s0",
            ));
        }
        Ok(scheme)
    }

    /// The standard two-share scheme with 2x2 blocks: stacking both shares
    /// turns black secret pixels fully black and leaves white ones half
    /// black.
    pub fn ns_2x2() -> Self {
        Self::new(
            "ns-2x2",
            2,
            2,
            2,
            vec![vec![1, 1, 0, 0], vec![1, 1, 0, 0]],
            vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]],
        )
        .expect("built-in scheme is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of shares (`n`).
    pub fn share_count(&self) -> usize {
        self.share_count
    }

    /// Sub-pixels per secret pixel (`m = block_rows * block_cols`).
    pub fn pixel_expansion(&self) -> usize {
        self.block_rows * self.block_cols
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// The basis matrix for the given secret color.
    pub fn basis(&self, color: u8) -> &[Vec<u8>] {
        if color == 0 {
            &self.s0
        } else {
            &self.s1
        }
    }

    pub fn s0(&self) -> &[Vec<u8>] {
        &self.s0
    }

    pub fn s1(&self) -> &[Vec<u8>] {
        &self.s1
    }

    /// Hamming weight of the OR over all rows of the basis for `color`.
    pub fn stacked_weight(&self, color: u8) -> usize {
        let basis = self.basis(color);
        (0..self.pixel_expansion())
            .filter(|&j| basis.iter().any(|row| row[j] == 1))
            .count()
    }
}

/// The result of splitting one secret: `n` share images plus the inputs
/// needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSet {
    pub shares: Vec<BinaryImage>,
    pub scheme: VcScheme,
    pub seed: u64,
}

fn validate_permutation(permutation: &[usize], m: usize) -> Result<()> {
    if permutation.len() != m {
        return Err(Error::invalid(format!(
            "permutation length {} does not match pixel expansion {m}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; m];
    for &j in permutation {
        if j >= m || seen[j] {
            return Err(Error::invalid(
                "permutation is not a bijection on the column indices",
            ));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Expands one secret pixel into its `n` sub-pixel blocks.
///
/// Block `i` is row `i` of the color's basis matrix with columns reordered
/// by `permutation` (entry `j` of the reordered row is entry
/// `permutation[j]` of the original), reshaped row-major into
/// `block_rows x block_cols`.
pub fn expand_pixel(
    color: u8,
    scheme: &VcScheme,
    permutation: &[usize],
) -> Result<Vec<BinaryImage>> {
    if color > 1 {
        return Err(Error::invalid(format!("color {color} is not 0 or 1")));
    }
    validate_permutation(permutation, scheme.pixel_expansion())?;
    scheme
        .basis(color)
        .iter()
        .map(|row| {
            let reordered: Vec<u8> = permutation.iter().map(|&j| row[j]).collect();
            BinaryImage::new(scheme.block_cols(), scheme.block_rows(), reordered)
        })
        .collect()
}

/// The per-pixel permutation stream: every pixel draws from its own ChaCha
/// stream keyed by `seed`, selected by the row-major pixel index, so
/// expansion order (or parallel evaluation) cannot change the output.
fn pixel_permutation(seed: u64, pixel_index: u64, m: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel_index);
    let mut permutation: Vec<usize> = (0..m).collect();
    permutation.shuffle(&mut rng);
    permutation
}

/// Splits a secret into `n` shares, one independent uniformly random column
/// permutation per secret pixel. Identical `(secret, scheme, seed)` inputs
/// produce bit-identical output.
pub fn generate_shares(secret: &BinaryImage, scheme: &VcScheme, seed: u64) -> Result<ShareSet> {
    let (r, c) = (scheme.block_rows(), scheme.block_cols());
    let m = scheme.pixel_expansion();
    let mut shares: Vec<BinaryImage> = (0..scheme.share_count())
        .map(|_| BinaryImage::filled(secret.width() * c, secret.height() * r, 0))
        .collect::<Result<_>>()?;
    for row in 0..secret.height() {
        for col in 0..secret.width() {
            let pixel_index = (row * secret.width() + col) as u64;
            let permutation = pixel_permutation(seed, pixel_index, m);
            let blocks = expand_pixel(secret.get(row, col), scheme, &permutation)?;
            for (share, block) in shares.iter_mut().zip(&blocks) {
                for br in 0..r {
                    for bc in 0..c {
                        share.set(row * r + br, col * c + bc, block.get(br, bc));
                    }
                }
            }
        }
    }
    Ok(ShareSet {
        shares,
        scheme: scheme.clone(),
        seed,
    })
}

/// Pixel-wise OR of two or more equally sized images: ink accumulates, as
/// when overlaying printed transparencies.
pub fn stack_shares(shares: &[BinaryImage]) -> Result<BinaryImage> {
    if shares.len() < 2 {
        return Err(Error::invalid("stacking requires at least 2 images"));
    }
    let (w, h) = (shares[0].width(), shares[0].height());
    for share in &shares[1..] {
        if share.width() != w || share.height() != h {
            return Err(Error::invalid(format!(
                "share dimensions {}x{} do not match {w}x{h}",
                share.width(),
                share.height()
            )));
        }
    }
    let mut pixels = shares[0].pixels().to_vec();
    for share in &shares[1..] {
        for (p, &q) in pixels.iter_mut().zip(share.pixels()) {
            *p |= q;
        }
    }
    BinaryImage::new(w, h, pixels)
}

/// Mean black fractions of the stacked sub-pixel blocks, grouped by the
/// color of the originating secret pixel. A mean is absent when the secret
/// contains no pixel of that color; the relative contrast is only defined
/// when both are present.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport {
    pub white_block_mean: Option<f64>,
    pub black_block_mean: Option<f64>,
    pub contrast: Option<f64>,
}

/// Measures the visual contrast of a stacked image against the secret it
/// came from: the black fraction of each `r x c` block, averaged separately
/// over white and black secret pixels.
pub fn measure_contrast(
    stacked: &BinaryImage,
    secret: &BinaryImage,
    scheme: &VcScheme,
) -> Result<ContrastReport> {
    let (r, c) = (scheme.block_rows(), scheme.block_cols());
    if stacked.width() != secret.width() * c || stacked.height() != secret.height() * r {
        return Err(Error::invalid(format!(
            "stacked dimensions {}x{} do not match secret {}x{} scaled by ({r},{c})",
            stacked.width(),
            stacked.height(),
            secret.width(),
            secret.height()
        )));
    }
    let m = scheme.pixel_expansion() as f64;
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for row in 0..secret.height() {
        for col in 0..secret.width() {
            let mut black = 0usize;
            for br in 0..r {
                for bc in 0..c {
                    black += stacked.get(row * r + br, col * c + bc) as usize;
                }
            }
            let color = secret.get(row, col) as usize;
            sums[color] += black as f64 / m;
            counts[color] += 1;
        }
    }
    let mean = |color: usize| {
        if counts[color] == 0 {
            None
        } else {
            Some(sums[color] / counts[color] as f64)
        }
    };
    let white_block_mean = mean(0);
    let black_block_mean = mean(1);
    let contrast = match (white_block_mean, black_block_mean) {
        (Some(w), Some(b)) => Some(b - w),
        _ => None,
    };
    Ok(ContrastReport {
        white_block_mean,
        black_block_mean,
        contrast,
    })
}

/// Histogram of the sub-pixel blocks one share shows for one secret color,
/// with a chi-square statistic against the uniform distribution over the
/// reachable support.
///
/// Keys encode a block row-major, bit `j` holding sub-pixel `j`. A column
/// permutation can turn a basis row into exactly the binary vectors sharing
/// its Hamming weight, each reachable by the same number of permutations,
/// so the support has size `C(m, weight)` and uniform is the exact
/// distribution for a uniform permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub support_size: u64,
    pub trials: u64,
    pub chi_square: f64,
    pub degrees_of_freedom: u64,
}

fn binomial(n: usize, k: usize) -> Result<u64> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| Error::invalid("support size overflows u64"))
}

/// Samples `trials` independent expansions of one secret pixel and reports
/// how uniformly the chosen share's blocks cover the reachable support.
/// Draws come sequentially from a ChaCha stream keyed by `seed`, so a fixed
/// seed yields a fixed histogram.
pub fn share_pattern_histogram(
    scheme: &VcScheme,
    color: u8,
    share_index: usize,
    trials: u64,
    seed: u64,
) -> Result<PatternHistogram> {
    if color > 1 {
        return Err(Error::invalid(format!("color {color} is not 0 or 1")));
    }
    if share_index >= scheme.share_count() {
        return Err(Error::invalid(format!(
            "share index {share_index} out of range for {} shares",
            scheme.share_count()
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let m = scheme.pixel_expansion();
    if m > 63 {
        return Err(Error::invalid(
            "pixel expansion above 63 is not supported by the histogram",
        ));
    }
    let row = &scheme.basis(color)[share_index];
    let weight = row.iter().filter(|&&v| v == 1).count();
    let support_size = binomial(m, weight)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut permutation: Vec<usize> = Vec::with_capacity(m);
    for _ in 0..trials {
        permutation.clear();
        permutation.extend(0..m);
        permutation.shuffle(&mut rng);
        let key = permutation
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &src)| acc | ((row[src] as u64) << j));
        *counts.entry(key).or_insert(0) += 1;
    }

    let expected = trials as f64 / support_size as f64;
    let observed_cells = counts.len() as u64;
    let mut chi_square: f64 = counts
        .values()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    // Support cells never observed each contribute `expected`.
    chi_square += (support_size - observed_cells) as f64 * expected;

    Ok(PatternHistogram {
        counts,
        support_size,
        trials,
        chi_square,
        degrees_of_freedom: support_size.saturating_sub(1),
    })
}

/// Upper critical value of the chi-square distribution: the statistic
/// exceeds it with probability `significance` under the null hypothesis.
pub fn chi_square_critical(degrees_of_freedom: u64, significance: f64) -> Result<f64> {
    if degrees_of_freedom == 0 {
        return Err(Error::invalid("degrees of freedom must be positive"));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::invalid("significance must lie in (0, 1)"));
    }
    let dist = ChiSquared::new(degrees_of_freedom as f64)
        .map_err(|e| Error::invalid(format!("chi-square setup: {e}")))?;
    Ok(dist.inverse_cdf(1.0 - significance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn identity(m: usize) -> Vec<usize> {
        (0..m).collect()
    }

    #[test]
    fn ns_2x2_matches_construction() {
        let s = VcScheme::ns_2x2();
        assert_eq!(s.share_count(), 2);
        assert_eq!(s.pixel_expansion(), 4);
        assert_eq!(s.block_rows(), 2);
        assert_eq!(s.block_cols(), 2);
        assert_eq!(s.s0(), &[vec![1, 1, 0, 0], vec![1, 1, 0, 0]]);
        assert_eq!(s.s1(), &[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
    }

    #[test]
    fn scheme_rejects_bad_matrices() {
        assert!(VcScheme::new("bad", 2, 2, 2, vec![vec![1, 1, 0, 0]], vec![]).is_err());
        assert!(VcScheme::new(
            "bad",
            2,
            2,
            2,
            vec![vec![1, 1, 0], vec![1, 1, 0]],
            vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]],
        )
        .is_err());
        // No contrast: identical stacked weights.
        assert!(VcScheme::new(
            "flat",
            2,
            2,
            2,
            vec![vec![1, 1, 0, 0], vec![1, 1, 0, 0]],
            vec![vec![1, 1, 0, 0], vec![1, 1, 0, 0]],
        )
        .is_err());
    }

    #[test]
    fn stacked_weight_invariant_under_every_permutation() {
        // A column permutation rearranges the OR bits without changing the
        // weight; confirm exhaustively anyway.
        let s = VcScheme::ns_2x2();
        for perm in (0..4).permutations(4) {
            for color in [0u8, 1] {
                let blocks = expand_pixel(color, &s, &perm).unwrap();
                let stacked = stack_shares(&blocks).unwrap();
                assert_eq!(stacked.weight(), s.stacked_weight(color));
            }
        }
        assert_eq!(s.stacked_weight(0), 2);
        assert_eq!(s.stacked_weight(1), 4);
    }

    #[test]
    fn expand_identity_white() {
        let blocks = expand_pixel(0, &VcScheme::ns_2x2(), &identity(4)).unwrap();
        let expected = BinaryImage::new(2, 2, vec![1, 1, 0, 0]).unwrap();
        assert_eq!(blocks, vec![expected.clone(), expected]);
    }

    #[test]
    fn expand_identity_black() {
        let blocks = expand_pixel(1, &VcScheme::ns_2x2(), &identity(4)).unwrap();
        assert_eq!(blocks[0], BinaryImage::new(2, 2, vec![1, 1, 0, 0]).unwrap());
        assert_eq!(blocks[1], BinaryImage::new(2, 2, vec![0, 0, 1, 1]).unwrap());
    }

    #[test]
    fn expand_rejects_non_bijections() {
        let s = VcScheme::ns_2x2();
        assert!(matches!(
            expand_pixel(0, &s, &[0, 0, 1, 2]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            expand_pixel(0, &s, &[0, 1, 2]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            expand_pixel(0, &s, &[0, 1, 2, 4]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn or_weight_over_all_permutations() {
        // Enumerate all 24 permutations of 4 columns and check both colors.
        let s = VcScheme::ns_2x2();
        for perm in (0..4).permutations(4) {
            let white = stack_shares(&expand_pixel(0, &s, &perm).unwrap()).unwrap();
            assert_eq!(white.weight(), 2);
            let black = stack_shares(&expand_pixel(1, &s, &perm).unwrap()).unwrap();
            assert_eq!(black.weight(), 4);
        }
    }

    #[test]
    fn white_pixel_gives_identical_blocks() {
        let secret = BinaryImage::new(1, 1, vec![0]).unwrap();
        let set = generate_shares(&secret, &VcScheme::ns_2x2(), 9).unwrap();
        assert_eq!(set.shares[0], set.shares[1]);
        assert_eq!(set.shares[0].weight(), 2);
    }

    #[test]
    fn black_pixel_gives_complementary_blocks() {
        let secret = BinaryImage::new(1, 1, vec![1]).unwrap();
        let set = generate_shares(&secret, &VcScheme::ns_2x2(), 9).unwrap();
        let stacked = stack_shares(&set.shares).unwrap();
        assert_eq!(stacked.weight(), 4);
        assert_eq!(set.shares[0].weight() + set.shares[1].weight(), 4);
    }

    #[test]
    fn generation_is_deterministic() {
        let pixels: Vec<u8> = (0..64).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let secret = BinaryImage::new(8, 8, pixels).unwrap();
        let scheme = VcScheme::ns_2x2();
        let a = generate_shares(&secret, &scheme, 42).unwrap();
        let b = generate_shares(&secret, &scheme, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_shares(&secret, &scheme, 43).unwrap();
        assert_ne!(a.shares, c.shares);
    }

    #[test]
    fn stack_or_semantics() {
        let a = BinaryImage::new(2, 1, vec![0, 1]).unwrap();
        let b = BinaryImage::new(2, 1, vec![1, 1]).unwrap();
        assert_eq!(
            stack_shares(&[a.clone(), b]).unwrap(),
            BinaryImage::new(2, 1, vec![1, 1]).unwrap()
        );
        // Idempotence.
        assert_eq!(stack_shares(&[a.clone(), a.clone()]).unwrap(), a);
    }

    #[test]
    fn stack_rejects_mismatched_dims_and_arity() {
        let a = BinaryImage::filled(2, 2, 0).unwrap();
        let b = BinaryImage::filled(3, 2, 0).unwrap();
        assert!(matches!(
            stack_shares(&[a.clone(), b]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            stack_shares(&[a]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn stacked_blocks_follow_weight_law() {
        let pixels: Vec<u8> = (0..64).map(|i| (i % 5 < 2) as u8).collect();
        let secret = BinaryImage::new(8, 8, pixels).unwrap();
        let scheme = VcScheme::ns_2x2();
        let set = generate_shares(&secret, &scheme, 7).unwrap();
        let stacked = stack_shares(&set.shares).unwrap();
        for row in 0..8 {
            for col in 0..8 {
                let mut weight = 0;
                for br in 0..2 {
                    for bc in 0..2 {
                        weight += stacked.get(row * 2 + br, col * 2 + bc) as usize;
                    }
                }
                let expected = if secret.get(row, col) == 1 { 4 } else { 2 };
                assert_eq!(weight, expected, "block ({row},{col})");
            }
        }
    }

    #[test]
    fn contrast_is_half_for_ns_2x2() {
        let pixels: Vec<u8> = (0..64).map(|i| (i % 2) as u8).collect();
        let secret = BinaryImage::new(8, 8, pixels).unwrap();
        let scheme = VcScheme::ns_2x2();
        let set = generate_shares(&secret, &scheme, 3).unwrap();
        let stacked = stack_shares(&set.shares).unwrap();
        let report = measure_contrast(&stacked, &secret, &scheme).unwrap();
        assert_eq!(report.white_block_mean, Some(0.5));
        assert_eq!(report.black_block_mean, Some(1.0));
        assert_eq!(report.contrast, Some(0.5));
    }

    #[test]
    fn contrast_on_single_color_secret() {
        let secret = BinaryImage::filled(4, 4, 0).unwrap();
        let scheme = VcScheme::ns_2x2();
        let set = generate_shares(&secret, &scheme, 5).unwrap();
        let stacked = stack_shares(&set.shares).unwrap();
        let report = measure_contrast(&stacked, &secret, &scheme).unwrap();
        assert_eq!(report.white_block_mean, Some(0.5));
        assert_eq!(report.black_block_mean, None);
        assert_eq!(report.contrast, None);
    }

    #[test]
    fn contrast_saturates_on_all_black_stack() {
        let pixels: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let secret = BinaryImage::new(4, 4, pixels).unwrap();
        let scheme = VcScheme::ns_2x2();
        let stacked = BinaryImage::filled(8, 8, 1).unwrap();
        let report = measure_contrast(&stacked, &secret, &scheme).unwrap();
        assert_eq!(report.white_block_mean, Some(1.0));
        assert_eq!(report.black_block_mean, Some(1.0));
        assert_eq!(report.contrast, Some(0.0));
    }

    #[test]
    fn contrast_rejects_mismatched_dims() {
        let secret = BinaryImage::filled(4, 4, 0).unwrap();
        let stacked = BinaryImage::filled(4, 4, 0).unwrap();
        assert!(matches!(
            measure_contrast(&stacked, &secret, &VcScheme::ns_2x2()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn histogram_support_is_six_for_ns_2x2() {
        let scheme = VcScheme::ns_2x2();
        for color in [0u8, 1] {
            for share in 0..2 {
                let h = share_pattern_histogram(&scheme, color, share, 2000, 1).unwrap();
                assert_eq!(h.support_size, 6);
                assert_eq!(h.degrees_of_freedom, 5);
                assert_eq!(h.counts.len(), 6);
                assert_eq!(h.counts.values().sum::<u64>(), 2000);
            }
        }
    }

    #[test]
    fn histogram_is_color_blind_per_share() {
        // Share 0 sees the same row for both colors under the same seed, so
        // the histograms agree bit for bit; share 1 sees different rows of
        // equal weight, so the supports agree.
        let scheme = VcScheme::ns_2x2();
        let white = share_pattern_histogram(&scheme, 0, 0, 500, 77).unwrap();
        let black = share_pattern_histogram(&scheme, 1, 0, 500, 77).unwrap();
        assert_eq!(white.counts, black.counts);

        let white = share_pattern_histogram(&scheme, 0, 1, 500, 77).unwrap();
        let black = share_pattern_histogram(&scheme, 1, 1, 500, 77).unwrap();
        let keys = |h: &PatternHistogram| h.counts.keys().copied().collect::<Vec<_>>();
        assert_eq!(white.support_size, black.support_size);
        assert_eq!(keys(&white), keys(&black));
    }

    #[test]
    fn per_share_distribution_matches_permutation_enumeration() {
        // Independent oracle: enumerate all m! permutations and count the
        // exact block multiset each share produces for each color.
        let scheme = VcScheme::ns_2x2();
        for share in 0..2 {
            let mut dists: Vec<BTreeMap<u64, u64>> = Vec::new();
            for color in [0u8, 1] {
                let row = &scheme.basis(color)[share];
                let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
                for perm in (0..4usize).permutations(4) {
                    let key = perm
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (j, &src)| acc | ((row[src] as u64) << j));
                    *counts.entry(key).or_insert(0) += 1;
                }
                // Uniform over C(4,2)=6 patterns, 4 permutations each.
                assert_eq!(counts.len(), 6);
                assert!(counts.values().all(|&c| c == 4));
                dists.push(counts);
            }
            assert_eq!(dists[0], dists[1], "share {share} leaks the color");
        }
    }

    #[test]
    fn expanded_blocks_stay_inside_enumerated_support() {
        let scheme = VcScheme::ns_2x2();
        let mut support = std::collections::BTreeSet::new();
        for perm in (0..4usize).permutations(4) {
            for color in [0u8, 1] {
                for block in expand_pixel(color, &scheme, &perm).unwrap() {
                    support.insert(block.pixels().to_vec());
                }
            }
        }
        assert_eq!(support.len(), 6);
        assert!(support.iter().all(|p| p.iter().sum::<u8>() == 2));
        let h = share_pattern_histogram(&scheme, 1, 1, 5000, 3).unwrap();
        for key in h.counts.keys() {
            let pixels: Vec<u8> = (0..4).map(|j| ((key >> j) & 1) as u8).collect();
            assert!(support.contains(&pixels));
        }
    }

    #[test]
    fn histogram_chi_square_passes_at_p01() {
        let scheme = VcScheme::ns_2x2();
        let critical = chi_square_critical(5, 0.01).unwrap();
        assert!((critical - 15.09).abs() < 0.01, "critical = {critical}");
        let h = share_pattern_histogram(&scheme, 0, 0, 10_000, 7).unwrap();
        assert!(h.chi_square < critical, "chi2 = {}", h.chi_square);
    }

    #[test]
    fn histogram_rejects_bad_inputs() {
        let scheme = VcScheme::ns_2x2();
        assert!(matches!(
            share_pattern_histogram(&scheme, 0, 2, 10, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            share_pattern_histogram(&scheme, 0, 0, 0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn binary_image_validation() {
        assert!(BinaryImage::new(2, 2, vec![0, 1, 2, 0]).is_err());
        assert!(BinaryImage::new(2, 2, vec![0, 1]).is_err());
        assert!(BinaryImage::new(0, 2, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn prop_stacked_weight_law(
            width in 1usize..6,
            height in 1usize..6,
            seed in 0u64..1000,
            bits in proptest::collection::vec(0u8..2, 36),
        ) {
            let pixels: Vec<u8> = bits.iter().take(width * height).copied().collect();
            let secret = BinaryImage::new(width, height, pixels).unwrap();
            let scheme = VcScheme::ns_2x2();
            let set = generate_shares(&secret, &scheme, seed).unwrap();
            let stacked = stack_shares(&set.shares).unwrap();
            for row in 0..height {
                for col in 0..width {
                    let mut weight = 0;
                    for br in 0..2 {
                        for bc in 0..2 {
                            weight += stacked.get(row * 2 + br, col * 2 + bc) as usize;
                        }
                    }
                    let expected = if secret.get(row, col) == 1 { 4 } else { 2 };
                    prop_assert_eq!(weight, expected);
                }
            }
        }
    }
}
