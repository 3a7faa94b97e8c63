//! Static intelligibility enhancement: linear-phase spectral shaping
//! followed by envelope-based dynamic range compression.

use std::f64::consts::PI;

use super::mix::rms_of;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    /// Formant-emphasis band edges in Hz.
    pub band_hz: (f64, f64),
    pub band_boost_db: f64,
    /// Above this frequency the gain rises by `tilt_db_per_octave`.
    pub tilt_start_hz: f64,
    pub tilt_db_per_octave: f64,
    /// Compression ratio; 1 bypasses the compressor.
    pub ratio: f64,
    /// Envelope smoothing times. Zero makes the envelope instantaneous,
    /// i.e. a memoryless (static) compression curve.
    pub attack_ms: f64,
    pub release_ms: f64,
    pub rms_match: bool,
    /// Odd FIR length of the shaping filter.
    pub fir_taps: usize,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            band_hz: (1000.0, 4000.0),
            band_boost_db: 6.0,
            tilt_start_hz: 1000.0,
            tilt_db_per_octave: 2.0,
            ratio: 2.0,
            attack_ms: 5.0,
            release_ms: 50.0,
            rms_match: true,
            fir_taps: 257,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        let (lo, hi) = self.band_hz;
        if !(0.0 <= lo && lo < hi && hi < nyquist) {
            return Err(Error::arg(format!("band edges must satisfy 0 <= {lo} < {hi} < {nyquist} Hz")));
        }
        if !(self.ratio >= 1.0 && self.ratio.is_finite()) {
            return Err(Error::arg("compression ratio must be at least 1"));
        }
        if !(self.attack_ms >= 0.0 && self.release_ms >= 0.0) {
            return Err(Error::arg("attack and release times must be non-negative"));
        }
        if !(self.tilt_start_hz > 0.0) {
            return Err(Error::arg("tilt start frequency must be positive"));
        }
        if !self.band_boost_db.is_finite() || !self.tilt_db_per_octave.is_finite() {
            return Err(Error::arg("shaping gains must be finite"));
        }
        if self.fir_taps.is_multiple_of(2) {
            return Err(Error::arg("FIR length must be odd"));
        }
        Ok(())
    }

    /// Target shaping gain in dB at `freq`.
    pub fn shaping_gain_db(&self, freq: f64) -> f64 {
        let mut g = 0.0;
        if freq >= self.band_hz.0 && freq <= self.band_hz.1 {
            g += self.band_boost_db;
        }
        if freq > self.tilt_start_hz {
            g += self.tilt_db_per_octave * (freq / self.tilt_start_hz).log2();
        }
        g
    }
}

const DESIGN_GRID: usize = 4096;

/// Zero-phase FIR (centred, `fir_taps` long) approximating
/// [`EnhanceConfig::shaping_gain_db`] by frequency sampling and a Hann
/// taper.
pub fn shaping_fir(cfg: &EnhanceConfig, sample_rate: u32) -> Vec<f64> {
    let half = cfg.fir_taps / 2;
    let m = DESIGN_GRID;
    let fs = sample_rate as f64;
    let mag: Vec<f64> = (0..=m / 2).map(|k| 10f64.powf(cfg.shaping_gain_db(k as f64 * fs / m as f64) / 20.0)).collect();
    (0..cfg.fir_taps)
        .map(|i| {
            let n = i as f64 - half as f64;
            let mut acc = mag[0] + mag[m / 2] * (PI * n).cos();
            for (k, d) in mag.iter().enumerate().take(m / 2).skip(1) {
                acc += 2.0 * d * (2.0 * PI * k as f64 * n / m as f64).cos();
            }
            let taper = 0.5 + 0.5 * (PI * n / (half as f64 + 1.0)).cos();
            taper * acc / m as f64
        })
        .collect()
}

/// The linear shaping stage alone.
pub fn spectral_shaping(speech: &AudioBuffer, cfg: &EnhanceConfig) -> Result<AudioBuffer> {
    cfg.validate(speech.sample_rate())?;
    let h = shaping_fir(cfg, speech.sample_rate());
    speech.with_samples(convolve_centred(speech.samples(), &h))
}

fn convolve_centred(x: &[f64], h: &[f64]) -> Vec<f64> {
    let half = h.len() / 2;
    (0..x.len())
        .map(|n| {
            // y[n] = sum_j h[j] x[n + half - j]
            let lo = (n + half + 1).saturating_sub(x.len());
            let hi = (n + half).min(h.len() - 1);
            (lo..=hi).map(|j| h[j] * x[n + half - j]).sum()
        })
        .collect()
}

/// Envelope floor relative to the long-term RMS, caps the gain applied to
/// near-silent passages.
const ENVELOPE_FLOOR: f64 = 1e-3;

/// Dynamic range compression towards the long-term RMS `ref`: the output
/// envelope is `ref * (env / ref)^(1 / ratio)`, so level differences in dB
/// are divided by `ratio`.
pub fn compress(x: &[f64], sample_rate: u32, ratio: f64, attack_ms: f64, release_ms: f64) -> Vec<f64> {
    let reference = rms_of(x);
    if reference == 0.0 || ratio == 1.0 {
        return x.to_vec();
    }
    let coeff = |ms: f64| {
        if ms <= 0.0 {
            0.0
        } else {
            (-1000.0 / (ms * sample_rate as f64)).exp()
        }
    };
    let (attack, release) = (coeff(attack_ms), coeff(release_ms));
    let exponent = 1.0 / ratio - 1.0;
    let mut power = reference * reference;
    x.iter()
        .map(|&v| {
            let p = v * v;
            let a = if p > power { attack } else { release };
            power = a * power + (1.0 - a) * p;
            let env = power.sqrt().max(reference * ENVELOPE_FLOOR);
            v * (env / reference).powf(exponent)
        })
        .collect()
}

/// Spectral shaping, then compression, then (optionally) RMS restoration.
pub fn enhance(speech: &AudioBuffer, cfg: &EnhanceConfig) -> Result<AudioBuffer> {
    let shaped = spectral_shaping(speech, cfg)?;
    let mut y = compress(shaped.samples(), speech.sample_rate(), cfg.ratio, cfg.attack_ms, cfg.release_ms);
    if cfg.rms_match {
        let (target, have) = (rms_of(speech.samples()), rms_of(&y));
        if have > 0.0 {
            y.iter_mut().for_each(|v| *v *= target / have);
        }
    }
    speech.with_samples(y)
}
