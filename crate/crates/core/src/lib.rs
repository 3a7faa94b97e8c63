//! Speech style conversion and style analysis.
//!
//! The crate is organised around the signal chain it implements:
//!
//! - [`audio`]: mono buffers, WAV I/O, framing and overlap-add.
//! - [`spectral`]: STFT power spectra, HTK mel filterbanks, log-mel and
//!   mel-cepstral features.
//! - [`lpc`]: autocorrelation LPC analysis, inverse/synthesis filtering and
//!   pole-domain formant editing.
//! - [`convert`]: whisperization, static intelligibility enhancement
//!   (spectral shaping + dynamic range compression) and SNR-controlled
//!   noise mixing.
//! - [`embedding`]: LSTM + self-attention style encoder forward pass,
//!   style centroids and cosine similarity.
//! - [`analysis`]: PCA, silhouette scoring and a voicing statistic.
//! - [`eval`]: listening-test statistics (AB preference, MOS, word
//!   recognition rate with Wilson intervals).
//! - [`signals`]: deterministic synthetic signals used by tests and benches.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod audio;
pub mod convert;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod lpc;
pub mod signals;
pub mod spectral;

mod csvout;

pub use audio::{AudioBuffer, FrameSpec, SampleCodec, Window};
pub use embedding::{EncoderDims, EncoderWeights, Style, StyleEmbedding};
pub use error::{Error, Result};
pub use lpc::{LpcFrame, PoleSet};
pub use spectral::{MelBank, MelFeatures, Spectrogram};
