//! Bit-exact file formats: binary PGM images, the HVCF hologram container,
//! scheme files, and the run manifest.
//!
//! Every writer is deterministic (same value, same bytes) and writes
//! atomically via a temporary file renamed into place. Read/write pairs are
//! exact inverses: bit-level for HVCF, value-level for PGM.

use std::fs;
use std::path::Path;

use crate::cgh::{CarrierAxis, CghParams, Diffuser, Hologram};
use crate::error::{Error, Result};
use crate::vc::{BinaryImage, VcScheme};

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so a crash cannot leave a half-written file at `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("path {} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    if let Err(e) = fs::write(&tmp, bytes) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

/// A decoded binary PGM (P5) payload with its sample depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples; 16-bit files are parsed big-endian.
    pub samples: Vec<u16>,
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => return Ok(()),
                None => return Err(Error::format("unexpected end of PGM header")),
            }
        }
    }

    fn read_number(&mut self) -> Result<u64> {
        self.skip_whitespace_and_comments()?;
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::format("expected a decimal number in PGM header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("malformed number in PGM header"))
    }
}

/// Parses binary PGM bytes, see [`read_pgm`].
pub fn pgm_from_bytes(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(Error::format("not a binary PGM: missing P5 magic"));
    }
    let mut cursor = PgmCursor { bytes, pos: 2 };
    let width = cursor.read_number()? as usize;
    let height = cursor.read_number()? as usize;
    let maxval = cursor.read_number()?;
    if width == 0 || height == 0 {
        return Err(Error::format("PGM dimensions must be positive"));
    }
    if maxval != 255 && maxval != 65535 {
        return Err(Error::format(format!(
            "unsupported PGM maxval {maxval}; expected 255 or 65535"
        )));
    }
    // Exactly one whitespace byte separates the header from the samples.
    match bytes.get(cursor.pos) {
        Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => cursor.pos += 1,
        _ => return Err(Error::format("missing whitespace after PGM maxval")),
    }
    let bytes_per_sample = if maxval == 255 { 1 } else { 2 };
    let expected = width * height * bytes_per_sample;
    let data = &bytes[cursor.pos..];
    if data.len() < expected {
        return Err(Error::format(format!(
            "PGM payload truncated: {} of {expected} bytes",
            data.len()
        )));
    }
    if data.len() > expected {
        return Err(Error::format("unexpected trailing bytes after PGM payload"));
    }
    let samples = if bytes_per_sample == 1 {
        data.iter().map(|&b| b as u16).collect()
    } else {
        data.chunks_exact(2)
            .map(|pair| u16::from_be_bytes([pair[0], pair[1]]))
            .collect()
    };
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

/// Reads a binary PGM (P5, maxval 255 or 65535; 16-bit samples big-endian).
/// Comment lines (`#`) are allowed anywhere in the header.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    pgm_from_bytes(&fs::read(path)?)
}

/// Maps a gray image to ink: sample 0 is black (1), maxval is white (0).
/// In strict mode any intermediate gray level is rejected; otherwise the
/// darker half of the range maps to black.
pub fn gray_to_binary(gray: &GrayImage, strict: bool) -> Result<BinaryImage> {
    let maxval = gray.maxval;
    let pixels = gray
        .samples
        .iter()
        .map(|&s| {
            if s == 0 {
                Ok(1)
            } else if s == maxval {
                Ok(0)
            } else if strict {
                Err(Error::format(format!(
                    "gray level {s} in a strict binary image (expected 0 or {maxval})"
                )))
            } else {
                Ok((u32::from(s) * 2 < u32::from(maxval)) as u8)
            }
        })
        .collect::<Result<Vec<u8>>>()?;
    BinaryImage::new(gray.width, gray.height, pixels)
}

/// Reads a PGM and maps it to ink, see [`gray_to_binary`].
pub fn read_binary_pgm(path: impl AsRef<Path>, strict: bool) -> Result<BinaryImage> {
    gray_to_binary(&read_pgm(path)?, strict)
}

/// Encodes a binary image as an 8-bit PGM: black (1) becomes sample 0,
/// white (0) becomes 255.
pub fn binary_pgm_bytes(image: &BinaryImage) -> Vec<u8> {
    let mut bytes = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    bytes.extend(image.pixels().iter().map(|&p| if p == 1 { 0 } else { 255u8 }));
    bytes
}

pub fn write_binary_pgm(image: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &binary_pgm_bytes(image))
}

/// Encodes values in [0, 1] as a 16-bit PGM, `round(v * 65535)` big-endian.
/// The mapping is monotone, so brighter stays brighter.
pub fn gray16_pgm_bytes(width: usize, height: usize, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(Error::invalid(format!(
            "value count {} does not match {width}x{height}",
            values.len()
        )));
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("gray16 values must lie in [0, 1]"));
    }
    let mut bytes = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for &v in values {
        bytes.extend_from_slice(&((v * 65535.0).round() as u16).to_be_bytes());
    }
    Ok(bytes)
}

pub fn write_gray16_pgm(
    width: usize,
    height: usize,
    values: &[f64],
    path: impl AsRef<Path>,
) -> Result<()> {
    atomic_write(path.as_ref(), &gray16_pgm_bytes(width, height, values)?)
}

// ---------------------------------------------------------------------------
// HVCF holograms
// ---------------------------------------------------------------------------

const HVCF_MAGIC: &[u8; 4] = b"HVCF";
const HVCF_VERSION: u16 = 1;

/// Serializes a hologram: magic "HVCF", version u16 LE, width u32 LE,
/// height u32 LE, share_width u32 LE, share_height u32 LE,
/// carrier_cycles f64 LE, carrier_axis u8 (0 horizontal, 1 vertical),
/// pad_factor u16 LE, spectrum_max f64 LE, then width*height f64 LE values
/// row-major.
pub fn hologram_bytes(hologram: &Hologram) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(41 + hologram.values().len() * 8);
    bytes.extend_from_slice(HVCF_MAGIC);
    bytes.extend_from_slice(&HVCF_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(hologram.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(hologram.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&(hologram.share_width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(hologram.share_height() as u32).to_le_bytes());
    bytes.extend_from_slice(&hologram.params().carrier_cycles.to_le_bytes());
    bytes.push(match hologram.params().carrier_axis {
        CarrierAxis::Horizontal => 0,
        CarrierAxis::Vertical => 1,
    });
    bytes.extend_from_slice(&hologram.params().pad_factor.to_le_bytes());
    bytes.extend_from_slice(&hologram.spectrum_max().to_le_bytes());
    for v in hologram.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn write_hologram(hologram: &Hologram, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &hologram_bytes(hologram))
}

/// Parses HVCF bytes. The diffuser is not part of the container (replay
/// does not need it), so the returned parameters carry `Diffuser::Off`.
pub fn hologram_from_bytes(bytes: &[u8]) -> Result<Hologram> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        let slice = bytes
            .get(*pos..*pos + n)
            .ok_or_else(|| Error::format("HVCF truncated"))?;
        *pos += n;
        Ok(slice)
    };
    if take(&mut pos, 4)? != HVCF_MAGIC {
        return Err(Error::format("not an HVCF file: bad magic"));
    }
    let version = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
    if version != HVCF_VERSION {
        return Err(Error::format(format!("unsupported HVCF version {version}")));
    }
    let read_u32 = |pos: &mut usize| -> Result<u32> {
        Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()))
    };
    let width = read_u32(&mut pos)? as usize;
    let height = read_u32(&mut pos)? as usize;
    let share_width = read_u32(&mut pos)? as usize;
    let share_height = read_u32(&mut pos)? as usize;
    let carrier_cycles = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let carrier_axis = match take(&mut pos, 1)?[0] {
        0 => CarrierAxis::Horizontal,
        1 => CarrierAxis::Vertical,
        other => return Err(Error::format(format!("unknown carrier axis {other}"))),
    };
    let pad_factor = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
    let spectrum_max = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());

    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format("HVCF dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::format(format!(
            "HVCF payload truncated: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::format("unexpected trailing bytes after HVCF payload"));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|chunk| f64::from_le_bytes(chunk.try_into().unwrap()))
        .collect();

    let params = CghParams {
        pad_factor,
        carrier_cycles,
        carrier_axis,
        diffuser: Diffuser::Off,
        diffuser_seed: 0,
    };
    Hologram::new(
        width,
        height,
        values,
        params,
        share_width,
        share_height,
        spectrum_max,
    )
    .map_err(|e| Error::format(format!("inconsistent HVCF header: {e}")))
}

pub fn read_hologram(path: impl AsRef<Path>) -> Result<Hologram> {
    hologram_from_bytes(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// Basis matrix text form (shared by scheme files and manifests)
// ---------------------------------------------------------------------------

/// Rows joined by ';', entries by ',': `1,1,0,0;0,0,1,1`.
fn format_matrix(matrix: &[Vec<u8>]) -> String {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<u8>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|entry| match entry.trim() {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::format(format!(
                        "matrix entry '{other}' is not 0 or 1"
                    ))),
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Scheme files
// ---------------------------------------------------------------------------

/// Renders a scheme in the plain-text `key=value` form accepted by
/// [`parse_scheme_text`].
pub fn scheme_to_text(scheme: &VcScheme) -> String {
    format!(
        "name={}\nn={}\nm={}\nblock_rows={}\nblock_cols={}\ns0={}\ns1={}\n",
        scheme.name(),
        scheme.share_count(),
        scheme.pixel_expansion(),
        scheme.block_rows(),
        scheme.block_cols(),
        format_matrix(scheme.s0()),
        format_matrix(scheme.s1()),
    )
}

/// Parses a scheme file. Grammar: one `key=value` per line; blank lines and
/// lines starting with `#` are ignored; required keys are `name`, `n`, `m`,
/// `block_rows`, `block_cols`, `s0`, `s1`, each exactly once; matrix rows
/// are `;`-separated lists of `,`-separated 0/1 entries.
pub fn parse_scheme_text(text: &str) -> Result<VcScheme> {
    let mut fields = KeyValues::from_text(text, true)?;
    let name = fields.take("name")?;
    let n: usize = fields.parse("n")?;
    let m: usize = fields.parse("m")?;
    let block_rows: usize = fields.parse("block_rows")?;
    let block_cols: usize = fields.parse("block_cols")?;
    let s0 = parse_matrix(&fields.take("s0")?)?;
    let s1 = parse_matrix(&fields.take("s1")?)?;
    fields.finish()?;
    if m != block_rows * block_cols {
        return Err(Error::format(format!(
            "m={m} does not equal block_rows*block_cols={}",
            block_rows * block_cols
        )));
    }
    VcScheme::new(name, n, block_rows, block_cols, s0, s1)
        .map_err(|e| Error::format(format!("invalid scheme: {e}")))
}

pub fn read_scheme_file(path: impl AsRef<Path>) -> Result<VcScheme> {
    let text = fs::read_to_string(path)?;
    parse_scheme_text(&text)
}

pub fn write_scheme_file(scheme: &VcScheme, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), scheme_to_text(scheme).as_bytes())
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// The full parameter record of an encryption run: everything needed to
/// reproduce the encryption bit for bit or to locate and decrypt its
/// outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub format_version: u32,
    pub scheme: VcScheme,
    pub seed: u64,
    pub secret_width: usize,
    pub secret_height: usize,
    pub pad_factor: u16,
    pub carrier_cycles: f64,
    pub carrier_axis: CarrierAxis,
    pub diffuser: Diffuser,
    pub diffuser_seed: u64,
    /// Hologram quantization depth, when one was applied.
    pub quant_bits: Option<u8>,
    pub share_files: Vec<String>,
    pub hologram_files: Vec<String>,
}

impl RunManifest {
    /// The synthesis parameters recorded in the manifest.
    pub fn cgh_params(&self) -> CghParams {
        CghParams {
            pad_factor: self.pad_factor,
            carrier_cycles: self.carrier_cycles,
            carrier_axis: self.carrier_axis,
            diffuser: self.diffuser,
            diffuser_seed: self.diffuser_seed,
        }
    }

    /// Renders the manifest: UTF-8, LF line endings, one `key=value` per
    /// line, keys always in this order: format_version, scheme, n, m,
    /// block_rows, block_cols, s0, s1, seed, secret_width, secret_height,
    /// pad_factor, carrier_cycles, carrier_axis, diffuser, diffuser_seed,
    /// quant_bits, share_files, hologram_files.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        };
        push("format_version", self.format_version.to_string());
        push("scheme", self.scheme.name().to_string());
        push("n", self.scheme.share_count().to_string());
        push("m", self.scheme.pixel_expansion().to_string());
        push("block_rows", self.scheme.block_rows().to_string());
        push("block_cols", self.scheme.block_cols().to_string());
        push("s0", format_matrix(self.scheme.s0()));
        push("s1", format_matrix(self.scheme.s1()));
        push("seed", self.seed.to_string());
        push("secret_width", self.secret_width.to_string());
        push("secret_height", self.secret_height.to_string());
        push("pad_factor", self.pad_factor.to_string());
        push("carrier_cycles", format!("{}", self.carrier_cycles));
        push(
            "carrier_axis",
            match self.carrier_axis {
                CarrierAxis::Horizontal => "horizontal".to_string(),
                CarrierAxis::Vertical => "vertical".to_string(),
            },
        );
        push(
            "diffuser",
            match self.diffuser {
                Diffuser::Off => "off".to_string(),
                Diffuser::RandomPhase => "random-phase".to_string(),
            },
        );
        push("diffuser_seed", self.diffuser_seed.to_string());
        push(
            "quant_bits",
            match self.quant_bits {
                Some(bits) => bits.to_string(),
                None => "none".to_string(),
            },
        );
        push("share_files", self.share_files.join(","));
        push("hologram_files", self.hologram_files.join(","));
        out
    }

    /// Parses manifest text. Strict: every known key exactly once, no
    /// unknown keys, no malformed values.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields = KeyValues::from_text(text, false)?;
        let format_version: u32 = fields.parse("format_version")?;
        if format_version != 1 {
            return Err(Error::format(format!(
                "unsupported manifest version {format_version}"
            )));
        }
        let scheme_name = fields.take("scheme")?;
        let n: usize = fields.parse("n")?;
        let m: usize = fields.parse("m")?;
        let block_rows: usize = fields.parse("block_rows")?;
        let block_cols: usize = fields.parse("block_cols")?;
        let s0 = parse_matrix(&fields.take("s0")?)?;
        let s1 = parse_matrix(&fields.take("s1")?)?;
        let seed: u64 = fields.parse("seed")?;
        let secret_width: usize = fields.parse("secret_width")?;
        let secret_height: usize = fields.parse("secret_height")?;
        let pad_factor: u16 = fields.parse("pad_factor")?;
        let carrier_cycles: f64 = fields.parse("carrier_cycles")?;
        let carrier_axis = match fields.take("carrier_axis")?.as_str() {
            "horizontal" => CarrierAxis::Horizontal,
            "vertical" => CarrierAxis::Vertical,
            other => return Err(Error::format(format!("unknown carrier axis '{other}'"))),
        };
        let diffuser = match fields.take("diffuser")?.as_str() {
            "off" => Diffuser::Off,
            "random-phase" => Diffuser::RandomPhase,
            other => return Err(Error::format(format!("unknown diffuser '{other}'"))),
        };
        let diffuser_seed: u64 = fields.parse("diffuser_seed")?;
        let quant_bits = match fields.take("quant_bits")?.as_str() {
            "none" => None,
            text => Some(
                text.parse::<u8>()
                    .map_err(|_| Error::format(format!("bad quant_bits '{text}'")))?,
            ),
        };
        let split_files = |text: String| -> Vec<String> {
            if text.is_empty() {
                Vec::new()
            } else {
                text.split(',').map(str::to_string).collect()
            }
        };
        let share_files = split_files(fields.take("share_files")?);
        let hologram_files = split_files(fields.take("hologram_files")?);
        fields.finish()?;

        if m != block_rows * block_cols {
            return Err(Error::format(format!(
                "m={m} does not equal block_rows*block_cols={}",
                block_rows * block_cols
            )));
        }
        let scheme = VcScheme::new(scheme_name, n, block_rows, block_cols, s0, s1)
            .map_err(|e| Error::format(format!("invalid scheme in manifest: {e}")))?;
        Ok(Self {
            format_version,
            scheme,
            seed,
            secret_width,
            secret_height,
            pad_factor,
            carrier_cycles,
            carrier_axis,
            diffuser,
            diffuser_seed,
            quant_bits,
            share_files,
            hologram_files,
        })
    }
}

pub fn write_manifest(manifest: &RunManifest, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), manifest.to_text().as_bytes())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    RunManifest::from_text(&fs::read_to_string(path)?)
}

/// Strict `key=value` line parser shared by manifests and scheme files.
struct KeyValues {
    entries: std::collections::BTreeMap<String, String>,
}

impl KeyValues {
    /// With `allow_comments`, blank lines and `#` lines are skipped.
    fn from_text(text: &str, allow_comments: bool) -> Result<Self> {
        let mut entries = std::collections::BTreeMap::new();
        for (index, line) in text.lines().enumerate() {
            if allow_comments && (line.trim().is_empty() || line.trim_start().starts_with('#')) {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format(format!("line {}: expected key=value", index + 1))
            })?;
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::format(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Result<String> {
        self.entries
            .remove(key)
            .ok_or_else(|| Error::format(format!("missing required key '{key}'")))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.take(key)?;
        raw.parse()
            .map_err(|_| Error::format(format!("bad value '{raw}' for key '{key}'")))
    }

    /// Fails on any key left over, so unknown keys are rejected.
    fn finish(self) -> Result<()> {
        if let Some(key) = self.entries.keys().next() {
            return Err(Error::format(format!("unknown key '{key}'")));
        }
        Ok(())
    }
}
