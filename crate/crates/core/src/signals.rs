//! Deterministic synthetic signals: the voiced and noise-like probes used by
//! the tests, the acceptance suite and the benchmarks.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// The crate's only noise source: ChaCha8 seeded from a 64-bit value.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_noise(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    StandardNormal.sample_iter(rng).take(len).collect()
}

pub fn white_noise(seed: u64, len: usize, std_dev: f64) -> Vec<f64> {
    gaussian_noise(&mut seeded_rng(seed), len).into_iter().map(|v| v * std_dev).collect()
}

/// Unit impulses every `round(sample_rate / f0)` samples starting at 0.
pub fn pulse_train(f0: f64, sample_rate: u32, len: usize) -> Vec<f64> {
    let period = (sample_rate as f64 / f0).round().max(1.0) as usize;
    (0..len).map(|n| if n % period == 0 { 1.0 } else { 0.0 }).collect()
}

pub fn sine(freq: f64, amplitude: f64, sample_rate: u32, len: usize) -> Vec<f64> {
    (0..len).map(|n| amplitude * (2.0 * PI * freq * n as f64 / sample_rate as f64).sin()).collect()
}

/// Two-pole resonator at `freq` Hz with 3 dB bandwidth `bandwidth` Hz,
/// normalised to unit gain at DC.
pub fn resonate(x: &[f64], freq: f64, bandwidth: f64, sample_rate: u32) -> Vec<f64> {
    let fs = sample_rate as f64;
    let rho = (-PI * bandwidth / fs).exp();
    let a1 = -2.0 * rho * (2.0 * PI * freq / fs).cos();
    let a2 = rho * rho;
    let g = 1.0 + a1 + a2;
    let (mut y1, mut y2) = (0.0, 0.0);
    x.iter()
        .map(|&v| {
            let y = g * v - a1 * y1 - a2 * y2;
            y2 = y1;
            y1 = y;
            y
        })
        .collect()
}

/// Formants (Hz, bandwidth Hz) of the synthetic /a/-like vowel.
pub const VOWEL_FORMANTS: [(f64, f64); 3] = [(700.0, 130.0), (1200.0, 150.0), (2600.0, 200.0)];

/// A 120 Hz pulse train through resonators at 700, 1200 and 2600 Hz,
/// scaled to a peak of 0.5.
pub fn synthetic_vowel(sample_rate: u32, duration_secs: f64) -> Vec<f64> {
    let len = (duration_secs * sample_rate as f64).round() as usize;
    let mut x = pulse_train(120.0, sample_rate, len);
    for (f, bw) in VOWEL_FORMANTS {
        x = resonate(&x, f, bw, sample_rate);
    }
    normalize_peak(x, 0.5)
}

/// Gaussian noise with a speech-like long-term spectrum: a gentle low-pass
/// tilt plus broad resonances around 500 and 1500 Hz. Peak 0.5.
pub fn speech_shaped_noise(seed: u64, sample_rate: u32, len: usize) -> Vec<f64> {
    let mut x = white_noise(seed, len, 1.0);
    x = resonate(&x, 500.0, 400.0, sample_rate);
    x = resonate(&x, 1500.0, 600.0, sample_rate);
    normalize_peak(x, 0.5)
}

pub fn normalize_peak(mut x: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
    x
}
