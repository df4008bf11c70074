//! Visual cryptography carried over computer-generated holograms.
//!
//! A binary secret image is split into Naor-Shamir shares, each share is
//! encoded as a Burch off-axis amplitude hologram, the holograms are
//! numerically replayed through a centered Fourier transform, and the
//! reconstructed shares are superposed and binarized to recover the secret.
//!
//! The crate is organized along the pipeline:
//!
//! * [`vc`] - share generation, film-style stacking, contrast and
//!   security statistics.
//! * [`numerics`] - centered unitary 2-D DFTs and grid utilities.
//! * [`cgh`] - object-wave synthesis and Burch encoding.
//! * [`reconstruction`] - numerical replay, order extraction,
//!   superposition, binarization.
//! * [`imageio`] - bit-exact file formats (PGM, HVCF holograms, run
//!   manifests, scheme files).

pub mod cgh;
pub mod error;
pub mod imageio;
pub mod numerics;
pub mod reconstruction;
pub mod vc;

pub use error::{Error, Result};
