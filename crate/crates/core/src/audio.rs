//! Mono audio buffers, WAV I/O and the framing primitives shared by every
//! frame-wise pipeline in the crate.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// A mono sequence of finite samples at a fixed rate.
///
/// Samples are nominally in `[-1, 1]` but values outside that range are
/// allowed; only PCM16 output clips them.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::arg("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::arg(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Builds a buffer with the same rate from new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate)
    }
}

/// Sample encoding used when writing WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleCodec {
    #[default]
    Pcm16,
    Float32,
}

/// Reads a RIFF/WAVE file holding PCM16 or IEEE float32 samples.
///
/// Multichannel files are downmixed by averaging the channels of each frame.
/// PCM16 values are divided by 32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let reader = hound::WavReader::open(path.as_ref()).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("zero channels in header".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Float, 32) => {
            reader.into_samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>().map_err(map_hound)?
        }
        (fmt, bits) => {
            return Err(Error::Unsupported(format!(
                "{bits}-bit {fmt:?} samples (only 16-bit PCM and 32-bit float are read)"
            )))
        }
    };

    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved.chunks_exact(channels).map(|frame| frame.iter().sum::<f64>() / channels as f64).collect()
    };
    AudioBuffer::new(samples, spec.sample_rate).map_err(|e| Error::Format(format!("decoded samples rejected: {e}")))
}

/// Writes a mono WAV file. PCM16 output clips to `[-1, 1]` and maps
/// `x` to `round(x * 32768)` saturated to the i16 range.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>, codec: SampleCodec) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate,
        bits_per_sample: match codec {
            SampleCodec::Pcm16 => 16,
            SampleCodec::Float32 => 32,
        },
        sample_format: match codec {
            SampleCodec::Pcm16 => hound::SampleFormat::Int,
            SampleCodec::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    for &s in &buffer.samples {
        match codec {
            SampleCodec::Pcm16 => writer.write_sample(pcm16_quantize(s)),
            SampleCodec::Float32 => writer.write_sample(s as f32),
        }
        .map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

pub(crate) fn pcm16_quantize(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::Unsupported => Error::Unsupported("WAV codec or layout".into()),
        hound::Error::TooWide => Error::Unsupported("sample width".into()),
        hound::Error::UnfinishedSample => Error::Format("truncated sample data".into()),
        hound::Error::InvalidSampleFormat => Error::Unsupported("sample format".into()),
    }
}

/// Analysis window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    /// Periodic Hann, `0.5 - 0.5 cos(2 pi n / N)`. Sums to exactly one when
    /// overlapped at half the frame length.
    #[default]
    Hann,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos()).collect(),
        }
    }
}

/// Frame length, hop and window of a framing pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    frame_len: usize,
    hop: usize,
    window: Window,
}

impl FrameSpec {
    pub fn new(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        if frame_len == 0 || hop == 0 {
            return Err(Error::arg("frame length and hop must be positive"));
        }
        if hop > frame_len {
            return Err(Error::arg(format!("hop {hop} exceeds frame length {frame_len}")));
        }
        Ok(Self { frame_len, hop, window })
    }

    /// Frame and hop given in milliseconds, rounded to whole samples.
    pub fn from_millis(sample_rate: u32, frame_ms: f64, hop_ms: f64, window: Window) -> Result<Self> {
        let to_samples = |ms: f64| (ms * sample_rate as f64 / 1000.0).round() as usize;
        Self::new(to_samples(frame_ms), to_samples(hop_ms), window)
    }

    /// 25 ms frames with a 10 ms shift, the mel-spectrogram convention.
    pub fn mel_default(sample_rate: u32) -> Result<Self> {
        Self::from_millis(sample_rate, 25.0, 10.0, Window::Hann)
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window, ..self }
    }

    /// `0` when `len < frame_len`, otherwise `floor((len - frame_len) / hop) + 1`.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }

    /// Output length of overlap-adding `n_frames` frames.
    pub fn span(&self, n_frames: usize) -> usize {
        match n_frames {
            0 => 0,
            n => (n - 1) * self.hop + self.frame_len,
        }
    }
}

/// Splits `buffer` into windowed frames; frame `i` starts at `i * hop`.
pub fn frames(buffer: &AudioBuffer, spec: &FrameSpec) -> Vec<Vec<f64>> {
    frame_samples(buffer.samples(), spec)
}

pub(crate) fn frame_samples(samples: &[f64], spec: &FrameSpec) -> Vec<Vec<f64>> {
    let window = spec.window.coefficients(spec.frame_len);
    (0..spec.frame_count(samples.len()))
        .map(|i| {
            let start = i * spec.hop;
            samples[start..start + spec.frame_len].iter().zip(&window).map(|(x, w)| x * w).collect()
        })
        .collect()
}

/// Sums frames placed at multiples of the hop. This is the reconstruction
/// for analysis-only windowing: with Hann and `hop = frame_len / 2` a
/// framed signal is recovered exactly away from the edges.
pub fn overlap_add(frames: &[Vec<f64>], spec: &FrameSpec, sample_rate: u32) -> Result<AudioBuffer> {
    AudioBuffer::new(overlap_add_samples(frames, spec)?, sample_rate)
}

pub(crate) fn overlap_add_samples(frames: &[Vec<f64>], spec: &FrameSpec) -> Result<Vec<f64>> {
    check_frame_lengths(frames, spec)?;
    let mut out = vec![0.0; spec.span(frames.len())];
    for (i, frame) in frames.iter().enumerate() {
        let start = i * spec.hop;
        for (o, x) in out[start..start + spec.frame_len].iter_mut().zip(frame) {
            *o += x;
        }
    }
    Ok(out)
}

/// Weighted overlap-add: each frame is multiplied by the synthesis window
/// and the sum is divided by the summed squared window at each sample.
/// Samples where that energy is (near) zero are left at zero.
pub fn overlap_add_weighted(frames: &[Vec<f64>], spec: &FrameSpec, sample_rate: u32) -> Result<AudioBuffer> {
    check_frame_lengths(frames, spec)?;
    let window = spec.window.coefficients(spec.frame_len);
    let span = spec.span(frames.len());
    let mut out = vec![0.0; span];
    let mut norm = vec![0.0; span];
    for (i, frame) in frames.iter().enumerate() {
        let start = i * spec.hop;
        for (k, (x, w)) in frame.iter().zip(&window).enumerate() {
            out[start + k] += x * w;
            norm[start + k] += w * w;
        }
    }
    for (o, n) in out.iter_mut().zip(&norm) {
        *o = if *n > 1e-12 { *o / n } else { 0.0 };
    }
    AudioBuffer::new(out, sample_rate)
}

fn check_frame_lengths(frames: &[Vec<f64>], spec: &FrameSpec) -> Result<()> {
    match frames.iter().position(|f| f.len() != spec.frame_len) {
        Some(i) => Err(Error::arg(format!("frame {i} has length {}, expected {}", frames[i].len(), spec.frame_len))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(len: usize, hop: usize, w: Window) -> FrameSpec {
        FrameSpec::new(len, hop, w).unwrap()
    }

    #[test]
    fn rejects_bad_buffers_and_specs() {
        assert!(AudioBuffer::new(vec![0.0], 0).is_err());
        assert!(AudioBuffer::new(vec![f64::NAN], 16000).is_err());
        assert!(AudioBuffer::new(vec![f64::INFINITY], 16000).is_err());
        assert!(FrameSpec::new(4, 5, Window::Hann).is_err());
        assert!(FrameSpec::new(0, 0, Window::Hann).is_err());
    }

    #[test]
    fn mel_default_is_600_by_240_at_24k() {
        let s = FrameSpec::mel_default(24_000).unwrap();
        assert_eq!((s.frame_len(), s.hop()), (600, 240));
    }

    #[test]
    fn frame_count_examples() {
        let s = spec(600, 240, Window::Hann);
        let buf = AudioBuffer::new(vec![0.0; 1000], 24_000).unwrap();
        assert_eq!(frames(&buf, &s).len(), 2);
        assert_eq!(s.frame_count(599), 0);
    }

    #[test]
    fn frames_start_at_multiples_of_hop() {
        let s = spec(4, 3, Window::Rectangular);
        let buf = AudioBuffer::new((0..10).map(f64::from).collect(), 8000).unwrap();
        let f = frames(&buf, &s);
        assert_eq!(f, vec![vec![0.0, 1.0, 2.0, 3.0], vec![3.0, 4.0, 5.0, 6.0], vec![6.0, 7.0, 8.0, 9.0]]);
    }

    #[test]
    fn hann_frame_of_ones_is_the_window() {
        let s = spec(4, 2, Window::Hann);
        let buf = AudioBuffer::new(vec![1.0; 4], 8000).unwrap();
        assert_eq!(frames(&buf, &s), vec![Window::Hann.coefficients(4)]);
        for (w, want) in Window::Hann.coefficients(4).iter().zip([0.0, 0.5, 1.0, 0.5]) {
            assert!((w - want).abs() < 1e-15);
        }
    }

    #[test]
    fn single_frame_overlap_add_is_verbatim() {
        let s = spec(3, 1, Window::Hann);
        let out = overlap_add(&[vec![1.0, -2.0, 3.0]], &s, 8000).unwrap();
        assert_eq!(out.samples(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn rectangular_no_overlap_concatenates() {
        let s = spec(2, 2, Window::Rectangular);
        let out = overlap_add(&[vec![1.0, 1.0], vec![2.0, 2.0]], &s, 8000).unwrap();
        assert_eq!(out.samples(), &[1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn overlap_add_rejects_ragged_frames() {
        let s = spec(2, 1, Window::Hann);
        assert!(matches!(overlap_add(&[vec![1.0, 1.0], vec![1.0]], &s, 8000), Err(Error::Argument(_))));
    }

    #[test]
    fn constant_signal_hann_cola() {
        let s = spec(600, 300, Window::Hann);
        let buf = AudioBuffer::new(vec![1.0; 6000], 24_000).unwrap();
        let out = overlap_add(&frames(&buf, &s), &s, 24_000).unwrap();
        assert_eq!(out.len(), s.span(s.frame_count(6000)));
        for &v in &out.samples()[300..out.len() - 300] {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn weighted_overlap_add_reconstructs_windowed_frames() {
        let s = spec(8, 2, Window::Hann);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let out = overlap_add_weighted(&frame_samples(&x, &s), &s, 8000).unwrap();
        for i in 4..out.len() - 4 {
            assert!((out.samples()[i] - x[i]).abs() < 1e-12, "sample {i}");
        }
    }

    #[test]
    fn pcm16_quantizer_edges() {
        assert_eq!(pcm16_quantize(1.5), i16::MAX);
        assert_eq!(pcm16_quantize(-1.0), i16::MIN);
        assert_eq!(pcm16_quantize(0.5), 16384);
    }

    proptest! {
        #[test]
        fn frame_count_formula(len in 0usize..5000, frame_len in 1usize..700, hop_frac in 0.01f64..1.0) {
            let hop = ((frame_len as f64 * hop_frac).ceil() as usize).clamp(1, frame_len);
            let s = spec(frame_len, hop, Window::Rectangular);
            let x = vec![0.25; len];
            let f = frame_samples(&x, &s);
            let expected = if len < frame_len { 0 } else { (len - frame_len) / hop + 1 };
            prop_assert_eq!(f.len(), expected);
            if let Some(last) = f.len().checked_sub(1) {
                prop_assert!(last * hop + frame_len <= len);
                prop_assert!((last + 1) * hop + frame_len > len);
            }
        }

        #[test]
        fn hann_half_overlap_round_trip(x in proptest::collection::vec(-1.0f64..1.0, 64..600), half in 2usize..32) {
            let s = spec(2 * half, half, Window::Hann);
            let out = overlap_add_samples(&frame_samples(&x, &s), &s).unwrap();
            for i in half..out.len().saturating_sub(half) {
                prop_assert!((out[i] - x[i]).abs() < 1e-9);
            }
        }
    }
}
