//! Power spectrograms, HTK mel filterbanks and cepstral features.
//!
//! FFT convention: the forward transform is unnormalised,
//! `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, and a [`Spectrogram`] holds the
//! one-sided power `|X[k]|^2` for `k = 0..=N/2`. Parseval then reads
//! `P[0] + P[N/2] + 2 * sum_{0<k<N/2} P[k] = N * sum_n x[n]^2` per frame
//! (see [`Spectrogram::two_sided_energy`]).

use std::io::Write;
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::{frame_samples, AudioBuffer, FrameSpec};
use crate::csvout::write_matrix;
use crate::error::{Error, Result};

pub const DEFAULT_N_MELS: usize = 80;
pub const DEFAULT_N_CEPS: usize = 20;
pub const DEFAULT_LOG_FLOOR: f64 = 1e-10;

/// One-sided power spectrogram, `n_frames x (fft_size / 2 + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub values: Array2<f64>,
    pub fft_size: usize,
    pub sample_rate: u32,
    pub frame_spec: FrameSpec,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.values.ncols()
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    /// Sum of `|X[k]|^2` over all `fft_size` bins of frame `i`, recovered
    /// from the one-sided storage.
    pub fn two_sided_energy(&self, i: usize) -> f64 {
        let row = self.values.row(i);
        let last = self.fft_size / 2;
        row.iter().enumerate().map(|(k, p)| if k == 0 || k == last { *p } else { 2.0 * p }).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let bin_hz = self.bin_hz();
        let mut header = vec!["frame".to_string()];
        header.extend((0..self.n_bins()).map(|k| format!("{:.3}Hz", k as f64 * bin_hz)));
        write_matrix(w, &header, rows_with_index(&self.values))?;
        Ok(())
    }
}

fn rows_with_index(m: &Array2<f64>) -> impl Iterator<Item = Vec<String>> + '_ {
    m.outer_iter()
        .enumerate()
        .map(|(i, row)| std::iter::once(i.to_string()).chain(row.iter().map(|v| v.to_string())).collect())
}

/// Power spectrum of each zero-padded windowed frame.
pub fn stft(buffer: &AudioBuffer, spec: &FrameSpec, fft_size: usize) -> Result<Spectrogram> {
    if fft_size < spec.frame_len() {
        return Err(Error::arg(format!("fft size {fft_size} is smaller than frame length {}", spec.frame_len())));
    }
    if !fft_size.is_power_of_two() {
        return Err(Error::arg(format!("fft size {fft_size} is not a power of two")));
    }
    let frames = frame_samples(buffer.samples(), spec);
    let n_bins = fft_size / 2 + 1;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(fft_size);
    let mut values = Array2::zeros((frames.len(), n_bins));
    let mut scratch = vec![Complex64::default(); fft_size];
    for (frame, mut row) in frames.iter().zip(values.outer_iter_mut()) {
        scratch.fill(Complex64::default());
        for (s, x) in scratch.iter_mut().zip(frame) {
            s.re = *x;
        }
        fft.process(&mut scratch);
        for (r, c) in row.iter_mut().zip(&scratch) {
            *r = c.norm_sqr();
        }
    }
    Ok(Spectrogram { values, fft_size, sample_rate: buffer.sample_rate(), frame_spec: *spec })
}

/// HTK mel scale, `2595 log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with centres equally spaced on the mel scale, unit
/// peak height.
#[derive(Debug, Clone, PartialEq)]
pub struct MelBank {
    pub weights: Array2<f64>,
    pub f_min: f64,
    pub f_max: f64,
    pub fft_size: usize,
    pub sample_rate: u32,
}

impl MelBank {
    pub fn new(n_mels: usize, fft_size: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        if n_mels == 0 {
            return Err(Error::arg("at least one mel filter is required"));
        }
        if fft_size < 2 {
            return Err(Error::arg("fft size must be at least 2"));
        }
        if !(0.0 <= f_min && f_min < f_max && f_max <= nyquist) {
            return Err(Error::arg(format!("need 0 <= f_min < f_max <= {nyquist} Hz, got [{f_min}, {f_max}]")));
        }
        let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let edges: Vec<f64> =
            (0..n_mels + 2).map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_mels + 1) as f64)).collect();
        let n_bins = fft_size / 2 + 1;
        let bin_hz = sample_rate as f64 / fft_size as f64;
        let mut weights = Array2::zeros((n_mels, n_bins));
        for m in 0..n_mels {
            let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f > lo && f <= centre {
                    (f - lo) / (centre - lo)
                } else if f > centre && f < hi {
                    (hi - f) / (hi - centre)
                } else {
                    0.0
                };
                weights[[m, k]] = w;
            }
        }
        Ok(Self { weights, f_min, f_max, fft_size, sample_rate })
    }

    /// 80 filters over `[0, Nyquist]`.
    pub fn default_for(fft_size: usize, sample_rate: u32) -> Result<Self> {
        Self::new(DEFAULT_N_MELS, fft_size, sample_rate, 0.0, sample_rate as f64 / 2.0)
    }

    pub fn n_mels(&self) -> usize {
        self.weights.nrows()
    }

    /// Centre frequency of each filter in Hz.
    pub fn centres(&self) -> Vec<f64> {
        let n = self.n_mels();
        let (m_lo, m_hi) = (hz_to_mel(self.f_min), hz_to_mel(self.f_max));
        (1..=n).map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n + 1) as f64)).collect()
    }
}

/// Log-mel spectrogram and its cepstrum.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFeatures {
    /// `n_frames x n_mels`, natural log of floored mel power.
    pub log_mel: Array2<f64>,
    /// `n_frames x n_ceps`; empty (zero columns) until [`mel_cepstra`] runs.
    pub mel_cepstra: Array2<f64>,
}

impl MelFeatures {
    pub fn write_csv<W: Write>(&self, w: W, cepstra: bool) -> Result<()> {
        let (m, prefix) = if cepstra { (&self.mel_cepstra, "cep") } else { (&self.log_mel, "mel") };
        let mut header = vec!["frame".to_string()];
        header.extend((0..m.ncols()).map(|k| format!("{prefix}_{k}")));
        write_matrix(w, &header, rows_with_index(m))?;
        Ok(())
    }
}

/// `ln(max(bank . power, floor))` per frame.
pub fn log_mel(spec: &Spectrogram, bank: &MelBank, floor: f64) -> Result<MelFeatures> {
    if !(floor > 0.0) {
        return Err(Error::arg("log floor must be positive"));
    }
    if bank.weights.ncols() != spec.n_bins() {
        return Err(Error::arg(format!(
            "mel bank has {} bins, spectrogram has {}",
            bank.weights.ncols(),
            spec.n_bins()
        )));
    }
    if bank.sample_rate != spec.sample_rate || bank.fft_size != spec.fft_size {
        return Err(Error::arg("mel bank was built for a different fft size or sample rate"));
    }
    let mel = spec.values.dot(&bank.weights.t());
    Ok(MelFeatures { log_mel: mel.mapv(|v| v.max(floor).ln()), mel_cepstra: Array2::zeros((mel.nrows(), 0)) })
}

/// Orthonormal DCT-II matrix, `n x n`, rows indexed by coefficient.
pub fn dct_matrix(n: usize) -> Array2<f64> {
    let nf = n as f64;
    Array2::from_shape_fn((n, n), |(k, i)| {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        scale * (std::f64::consts::PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * nf)).cos()
    })
}

/// Keeps the first `n_ceps` orthonormal DCT-II coefficients of every log-mel
/// row.
pub fn mel_cepstra(mut mel: MelFeatures, n_ceps: usize) -> Result<MelFeatures> {
    let n_mels = mel.log_mel.ncols();
    if n_ceps > n_mels {
        return Err(Error::arg(format!("{n_ceps} cepstral coefficients requested from {n_mels} mel bands")));
    }
    let dct = dct_matrix(n_mels);
    let basis = dct.slice(ndarray::s![..n_ceps, ..]);
    mel.mel_cepstra = mel.log_mel.dot(&basis.t());
    Ok(mel)
}

/// Per-frame power-weighted mean frequency. Frames with no energy report 0.
pub fn spectral_centroid(spec: &Spectrogram) -> Vec<f64> {
    let bin_hz = spec.bin_hz();
    let freqs = Array1::from_shape_fn(spec.n_bins(), |k| k as f64 * bin_hz);
    spec.values
        .axis_iter(Axis(0))
        .map(|row| {
            let total = row.sum();
            if total > 0.0 {
                row.dot(&freqs) / total
            } else {
                0.0
            }
        })
        .collect()
}

/// Power-weighted centroid over the whole spectrogram.
pub fn mean_spectral_centroid(spec: &Spectrogram) -> f64 {
    let bin_hz = spec.bin_hz();
    let per_bin = spec.values.sum_axis(Axis(0));
    let total = per_bin.sum();
    if total > 0.0 {
        per_bin.iter().enumerate().map(|(k, p)| k as f64 * bin_hz * p).sum::<f64>() / total
    } else {
        0.0
    }
}

/// Configuration of the full waveform-to-cepstra frontend.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontend {
    pub frame_spec: FrameSpec,
    pub fft_size: usize,
    pub bank: MelBank,
    pub floor: f64,
    pub n_ceps: usize,
}

impl Frontend {
    /// 25 ms / 10 ms Hann frames, FFT size the next power of two at or
    /// above the frame length (1024 at 24 kHz), 80 mels, 20 cepstra.
    pub fn for_rate(sample_rate: u32) -> Result<Self> {
        let frame_spec = FrameSpec::mel_default(sample_rate)?;
        let fft_size = frame_spec.frame_len().next_power_of_two();
        Ok(Self {
            frame_spec,
            fft_size,
            bank: MelBank::default_for(fft_size, sample_rate)?,
            floor: DEFAULT_LOG_FLOOR,
            n_ceps: DEFAULT_N_CEPS,
        })
    }

    pub fn with_n_ceps(mut self, n_ceps: usize) -> Self {
        self.n_ceps = n_ceps;
        self
    }

    pub fn features(&self, buffer: &AudioBuffer) -> Result<MelFeatures> {
        if buffer.sample_rate() != self.bank.sample_rate {
            return Err(Error::arg(format!(
                "buffer rate {} Hz does not match frontend rate {} Hz",
                buffer.sample_rate(),
                self.bank.sample_rate
            )));
        }
        let spec = stft(buffer, &self.frame_spec, self.fft_size)?;
        mel_cepstra(log_mel(&spec, &self.bank, self.floor)?, self.n_ceps)
    }
}
