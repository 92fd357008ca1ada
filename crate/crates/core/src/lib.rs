//! Lossy signal compression by Blaschke unwinding adaptive Fourier decomposition.
//!
//! A real window is lifted to the Hardy space of the unit disk, then peeled level by
//! level: the zeros inside the disk are divided out as a finite Blaschke product, the
//! remaining outer part gives up its largest reproducing-kernel component, and the
//! remainder is passed to the next level. The per-level coefficients, kernel points
//! and zeros are quantized and entropy coded.
//!
//! Module map:
//!
//! - [`hardy`]: boundary/spectral frames, Hardy projection, interior evaluation, search grid
//! - [`blaschke`]: evaluators, Blaschke products, modified Blaschke (TM) products
//! - [`unwinding`]: zero counting and extraction, maximal selection, the unwinding loop
//! - [`codec`]: quantization, canonical Huffman stream, reconstruction
//! - [`metrics`]: CR/PRD/QS/SNR, QRS detection, beat matching
//! - [`ingest`]: WFDB format 212 records and windowing
//! - [`pipeline`]: whole-record compress / decompress / evaluate sessions

pub mod blaschke;
pub mod codec;
mod error;
mod fft;
pub mod hardy;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod unwinding;

pub use error::{Error, Result};
pub use num_complex::Complex64;
