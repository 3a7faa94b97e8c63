use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Root mean square; 0 for an empty buffer.
pub fn rms(buffer: &AudioBuffer) -> f64 {
    rms_of(buffer.samples())
}

pub fn rms_of(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

/// `20 log10(rms(signal) / rms(noise))`.
pub fn snr_db(signal: &[f64], noise: &[f64]) -> f64 {
    20.0 * (rms_of(signal) / rms_of(noise)).log10()
}

/// Masking noise and the SNR it should be mixed at.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMixSpec {
    pub snr_db: f64,
    pub noise: AudioBuffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub mixed: AudioBuffer,
    /// The looped/truncated noise after gain, as added to the speech.
    pub scaled_noise: Vec<f64>,
    pub noise_gain: f64,
}

/// Repeats or truncates `noise` to exactly `len` samples.
pub fn fit_noise(noise: &[f64], len: usize) -> Vec<f64> {
    if noise.is_empty() {
        return vec![0.0; len];
    }
    noise.iter().copied().cycle().take(len).collect()
}

/// Mixes speech with noise gained by
/// `g = (rms_s / rms_n) * 10^(-snr / 20)`, where `rms_n` is measured on the
/// looped/truncated noise actually added.
pub fn mix_components(speech: &AudioBuffer, spec: &NoiseMixSpec) -> Result<Mixture> {
    if speech.sample_rate() != spec.noise.sample_rate() {
        return Err(Error::arg(format!(
            "speech is {} Hz but noise is {} Hz",
            speech.sample_rate(),
            spec.noise.sample_rate()
        )));
    }
    if !spec.snr_db.is_finite() {
        return Err(Error::arg("SNR must be finite"));
    }
    let rms_s = rms(speech);
    if rms_s == 0.0 {
        return Err(Error::arg("speech is silent"));
    }
    let noise = fit_noise(spec.noise.samples(), speech.len());
    let rms_n = rms_of(&noise);
    if rms_n == 0.0 {
        return Err(Error::arg("noise is silent"));
    }
    let noise_gain = rms_s / rms_n * 10f64.powf(-spec.snr_db / 20.0);
    let scaled_noise: Vec<f64> = noise.iter().map(|v| v * noise_gain).collect();
    let mixed = speech.samples().iter().zip(&scaled_noise).map(|(s, n)| s + n).collect();
    Ok(Mixture { mixed: speech.with_samples(mixed)?, scaled_noise, noise_gain })
}

pub fn mix_at_snr(speech: &AudioBuffer, spec: &NoiseMixSpec) -> Result<AudioBuffer> {
    mix_components(speech, spec).map(|m| m.mixed)
}
