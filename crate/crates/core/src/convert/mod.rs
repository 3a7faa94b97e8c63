//! End-to-end style conversion: whisperization, static intelligibility
//! enhancement and SNR-controlled noise mixing.

mod enhance;
mod filters;
mod mix;
mod whisper;

pub use enhance::{compress, enhance, shaping_fir, spectral_shaping, EnhanceConfig};
pub use filters::TiltFilter;
pub use mix::{fit_noise, mix_at_snr, mix_components, rms, rms_of, snr_db, Mixture, NoiseMixSpec};
pub use whisper::{whisperize, whisperize_with_stats, FrameStats, WhisperConfig, WhisperOutput};
