use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;

use stylekit::convert::{enhance, whisperize, EnhanceConfig, WhisperConfig};
use stylekit::embedding::{embed, init_random, EncoderOptions};
use stylekit::lpc::{autocorrelate, levinson, poles};
use stylekit::signals::{synthetic_vowel, white_noise};
use stylekit::spectral::{stft, Frontend};
use stylekit::{AudioBuffer, EncoderDims, FrameSpec};

fn lpc(c: &mut Criterion) {
    let frame = synthetic_vowel(24_000, 0.025);
    let mut g = c.benchmark_group("lpc");
    for order in [12usize, 26] {
        let r = autocorrelate(&frame, order).unwrap();
        g.bench_with_input(BenchmarkId::new("levinson", order), &order, |b, &p| {
            b.iter(|| levinson(black_box(&r), p).unwrap())
        });
        let a = levinson(&r, order).unwrap().coeffs;
        g.bench_with_input(BenchmarkId::new("poles", order), &a, |b, a| b.iter(|| poles(black_box(a)).unwrap()));
    }
    g.finish();
}

fn frontend(c: &mut Criterion) {
    let x = AudioBuffer::new(white_noise(1, 24_000, 0.1), 24_000).unwrap();
    let spec = FrameSpec::mel_default(24_000).unwrap();
    let fe = Frontend::for_rate(24_000).unwrap();
    c.bench_function("stft 1 s @ 24 kHz", |b| b.iter(|| stft(black_box(&x), &spec, 1024).unwrap()));
    c.bench_function("cepstra 1 s @ 24 kHz", |b| b.iter(|| fe.features(black_box(&x)).unwrap()));
}

fn conversion(c: &mut Criterion) {
    let x = AudioBuffer::new(synthetic_vowel(24_000, 1.0), 24_000).unwrap();
    let wcfg = WhisperConfig::for_rate(24_000).unwrap();
    let ecfg = EnhanceConfig::default();
    let mut g = c.benchmark_group("convert 1 s @ 24 kHz");
    g.sample_size(20);
    g.bench_function("whisperize", |b| b.iter(|| whisperize(black_box(&x), &wcfg).unwrap()));
    g.bench_function("enhance", |b| b.iter(|| enhance(black_box(&x), &ecfg).unwrap()));
    g.finish();
}

fn encoder(c: &mut Criterion) {
    let opts = EncoderOptions::default();
    let mut g = c.benchmark_group("embed 100 frames");
    g.sample_size(20);
    for (name, dims) in [("desk", EncoderDims::DESK), ("512-128", EncoderDims::paper(20))] {
        let w = init_random(0, dims);
        let feats = Array2::from_shape_vec((100, dims.input), white_noise(2, 100 * dims.input, 1.0)).unwrap();
        g.bench_function(name, |b| b.iter(|| embed(black_box(feats.view()), &w, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, lpc, frontend, conversion, encoder);
criterion_main!(benches);
