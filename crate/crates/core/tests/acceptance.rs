//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Every check computes its expected values independently of the library
//! (scalar loops, dense solves, closed forms) and compares with the
//! tolerances the criteria state.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array2, Axis};
use num_complex::Complex64;

use stylekit::analysis::{pca_fit, silhouette, voicing_ratio, Metric};
use stylekit::audio::{frames, write_wav};
use stylekit::convert::{
    enhance, mix_components, rms_of, whisperize, whisperize_with_stats, EnhanceConfig, NoiseMixSpec, WhisperConfig,
};
use stylekit::embedding::{
    attention_pool, embed, embed_raw, init_random, lstm_forward, softmax_rows, EncoderDims, EncoderOptions,
    EncoderWeights,
};
use stylekit::eval::{ab_summary, mos_mean, wrr, AbCounts};
use stylekit::lpc::{
    autocorrelate, from_reflection, inverse_filter, levinson, modify_formants, poles, reconstruct, shift_formants,
    synthesis_filter, FormantShift, LpcFrame,
};
use stylekit::signals::{seeded_rng, speech_shaped_noise, synthetic_vowel, white_noise};
use stylekit::spectral::{dct_matrix, mean_spectral_centroid, stft};
use stylekit::{AudioBuffer, FrameSpec, SampleCodec, Window};

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Check>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

fn uniform(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

// 1. Whisperization efficacy

fn ac1_whisperization() -> Check {
    let fs = 24_000;
    let speech = lib(AudioBuffer::new(synthetic_vowel(fs, 2.0), fs))?;
    let cfg = lib(WhisperConfig::for_rate(fs))?;
    let start = Instant::now();
    let out = lib(whisperize_with_stats(&speech, &cfg))?;
    let secs = start.elapsed().as_secs_f64();
    let before = lib(voicing_ratio(&speech))?;
    let after = lib(voicing_ratio(&out.audio))?;
    ensure(before > 0.5, format!("input voicing {before:.3} <= 0.5"))?;
    ensure(after < 0.25, format!("output voicing {after:.3} >= 0.25"))?;
    let mut worst = 0.0f64;
    for f in out.frames.iter().filter(|f| f.residual_rms > 0.0) {
        worst = worst.max(db(f.excitation_rms / f.residual_rms).abs());
    }
    ensure(worst <= 1.0, format!("excitation RMS off by {worst:.3} dB"))?;
    ensure(secs < 5.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("voicing {before:.3} -> {after:.3}, worst excitation RMS error {worst:.2e} dB, {secs:.2} s"))
}

// 2. LPC core

fn toeplitz_solve(r: &[f64], p: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(p, p, |i, j| r[i.abs_diff(j)]);
    let rhs = DVector::from_fn(p, |i, _| -r[i + 1]);
    m.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

fn ac2_lpc_core() -> Check {
    // inverse -> synthesis round trip on zero-state random signals
    let mut worst_rt = 0.0f64;
    for seed in 0..20u64 {
        let p = 1 + (seed as usize % 30);
        let k = uniform(seed, p, -0.95, 0.95);
        let a = from_reflection(&k);
        let x = white_noise(100 + seed, 2000, 1.0);
        let y = lib(synthesis_filter(&inverse_filter(&x, &a), &a))?;
        worst_rt = x.iter().zip(&y).fold(worst_rt, |m, (u, v)| m.max((u - v).abs()));
    }
    ensure(worst_rt <= 1e-12, format!("inverse/synthesis round trip error {worst_rt:.2e}"))?;

    // Levinson against a dense Toeplitz solve
    let mut worst_lev = 0.0f64;
    for seed in 0..12u64 {
        let p = 1 + seed as usize;
        let mut x = white_noise(200 + seed, 1500, 1.0);
        for i in 1..x.len() {
            x[i] += 0.8 * x[i - 1];
        }
        let r = lib(autocorrelate(&x, p))?;
        let sol = lib(levinson(&r, p))?;
        let dense = toeplitz_solve(&r, p);
        worst_lev = sol.coeffs.iter().zip(&dense).fold(worst_lev, |m, (u, v)| m.max((u - v).abs()));
    }
    ensure(worst_lev <= 1e-9, format!("Levinson vs Toeplitz error {worst_lev:.2e}"))?;

    // pole decomposition round trip up to order 30
    let mut worst_pole = 0.0f64;
    for p in 1..=30usize {
        let k = uniform(300 + p as u64, p, -0.9, 0.9);
        let a = from_reflection(&k);
        let back = reconstruct(&lib(poles(&a))?);
        worst_pole = a.iter().zip(&back).fold(worst_pole, |m, (u, v)| m.max((u - v).abs()));
    }
    ensure(worst_pole <= 1e-6, format!("pole round trip error {worst_pole:.2e}"))?;

    // AR(2) recovery: x[n] = 1.3 x[n-1] - 0.6 x[n-2] + e[n]  =>  a = [-1.3, 0.6]
    let e = white_noise(77, 100_000, 1.0);
    let mut x = vec![0.0; e.len()];
    for n in 0..x.len() {
        let x1 = if n >= 1 { x[n - 1] } else { 0.0 };
        let x2 = if n >= 2 { x[n - 2] } else { 0.0 };
        x[n] = 1.3 * x1 - 0.6 * x2 + e[n];
    }
    let fit = lib(LpcFrame::analyze(&x, 2, 0.0))?;
    let ar_err = (fit.coeffs[0] + 1.3).abs().max((fit.coeffs[1] - 0.6).abs());
    ensure(ar_err <= 0.05, format!("AR(2) estimate {:?}", fit.coeffs))?;

    Ok(format!("round trip {worst_rt:.1e}, Levinson {worst_lev:.1e}, poles {worst_pole:.1e}, AR(2) {ar_err:.1e}"))
}

// 3. Formant modification

fn response_peak_hz(a: &[f64], fs: f64, lo: f64, hi: f64) -> f64 {
    let mut best = (0.0, lo);
    let mut f = lo;
    while f <= hi {
        let w = 2.0 * PI * f / fs;
        let mut den = Complex64::new(1.0, 0.0);
        for (i, c) in a.iter().enumerate() {
            den += c * Complex64::from_polar(1.0, -w * (i + 1) as f64);
        }
        let mag = 1.0 / den.norm();
        if mag > best.0 {
            best = (mag, f);
        }
        f += 0.1;
    }
    best.1
}

fn ac3_formants() -> Check {
    let fs = 24_000.0;
    // narrow enough that the response peak sits on the pole angle
    let (rho, theta) = (0.995, 2.0 * PI * 500.0 / fs);
    let a = vec![-2.0 * rho * theta.cos(), rho * rho];
    let before = response_peak_hz(&a, fs, 100.0, 2000.0);
    ensure((before - 500.0).abs() <= 0.5, format!("reference resonance at {before:.1} Hz"))?;
    let shift = FormantShift { freq_scale: 1.1, bw_exponent: 1.0, freq_cutoff_hz: 2000.0 };
    let edited = reconstruct(&lib(modify_formants(&lib(poles(&a))?, &shift, fs))?.poles);
    let peak = response_peak_hz(&edited, fs, 100.0, 2000.0);
    ensure((peak - 550.0).abs() <= 0.02 * 550.0, format!("resonance at {peak:.1} Hz"))?;

    let mut worst = 0.0f64;
    let x = synthetic_vowel(24_000, 0.2);
    for (i, frame) in x.chunks_exact(600).enumerate() {
        let lpc = lib(LpcFrame::analyze(frame, 26, 1e-6))?;
        let ps = lib(poles(&lpc.coeffs))?;
        let unit = FormantShift { freq_scale: 1.0, bw_exponent: 1.0, freq_cutoff_hz: 2000.0 };
        for shift in [FormantShift::IDENTITY, unit] {
            let same = lib(modify_formants(&ps, &shift, fs))?;
            ensure(same.poles == ps, format!("identity edit moved poles in frame {i}"))?;
            let (again, _) = lib(shift_formants(&lpc.coeffs, &shift, fs))?;
            worst = lpc.coeffs.iter().zip(&again).fold(worst, |m, (u, v)| m.max((u - v).abs()));
        }
    }
    ensure(worst <= 1e-12, format!("identity edit coefficient change {worst:.2e}"))?;
    Ok(format!("resonance {before:.1} Hz -> {peak:.1} Hz, identity deviation {worst:.1e}"))
}

// 4. Frontend

fn ac4_frontend() -> Check {
    let spec = lib(FrameSpec::new(600, 240, Window::Hann))?;
    for n in [600usize, 601, 839, 840, 841, 24_000, 48_123] {
        let want = (n - 600) / 240 + 1;
        let buf = lib(AudioBuffer::new(vec![0.1; n], 24_000))?;
        let got = frames(&buf, &spec).len();
        ensure(got == want, format!("N = {n}: {got} frames, expected {want}"))?;
    }
    let x = lib(AudioBuffer::new(white_noise(5, 12_000, 0.3), 24_000))?;
    let sp = lib(stft(&x, &spec, 1024))?;
    let fr = frames(&x, &spec);
    let mut worst = 0.0f64;
    for (i, f) in fr.iter().enumerate() {
        let time: f64 = f.iter().map(|v| v * v).sum();
        let freq = sp.two_sided_energy(i) / 1024.0;
        worst = worst.max((time - freq).abs() / time);
    }
    ensure(worst <= 1e-6, format!("Parseval relative error {worst:.2e}"))?;
    let mut ortho = 0.0f64;
    for n in [20usize, 40, 80] {
        let d = dct_matrix(n);
        let g = d.dot(&d.t());
        for ((i, j), v) in g.indexed_iter() {
            ortho = ortho.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(ortho <= 1e-9, format!("DCT orthonormality error {ortho:.2e}"))?;
    Ok(format!("frame counts exact, Parseval {worst:.1e}, DCT {ortho:.1e}"))
}

// 5. Noise mixing

fn ac5_mixing() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let speech_len = 3000 + 997 * seed as usize;
        let noise_len = 500 + 1543 * seed as usize;
        let speech = lib(AudioBuffer::new(speech_shaped_noise(seed, 16_000, speech_len), 16_000))?;
        let noise = lib(AudioBuffer::new(white_noise(50 + seed, noise_len, 0.01 + seed as f64), 16_000))?;
        let m = lib(mix_components(&speech, &NoiseMixSpec { snr_db: -4.0, noise }))?;
        let added: Vec<f64> = m.mixed.samples().iter().zip(speech.samples()).map(|(y, s)| y - s).collect();
        let snr = db(rms_of(speech.samples()) / rms_of(&added));
        worst = worst.max((snr + 4.0).abs());
    }
    ensure(worst <= 0.01, format!("SNR error {worst:.2e} dB"))?;
    let tone: Vec<f64> = (0..4800).map(|n| (n as f64 * 0.05).sin()).collect();
    let flipped: Vec<f64> = tone.iter().map(|v| -v).collect();
    let m = lib(mix_components(
        &lib(AudioBuffer::new(tone, 16_000))?,
        &NoiseMixSpec { snr_db: -4.0, noise: lib(AudioBuffer::new(flipped, 16_000))? },
    ))?;
    let closed = 10f64.powf(0.2);
    ensure((m.noise_gain - closed).abs() < 1e-9, format!("gain {} vs {closed}", m.noise_gain))?;
    Ok(format!("worst SNR error {worst:.1e} dB, equal-RMS gain {:.5}", m.noise_gain))
}

// 6. Enhancement

fn ac6_enhancement() -> Check {
    let fs = 24_000;
    let cfg = EnhanceConfig::default();
    let noise = lib(AudioBuffer::new(speech_shaped_noise(9, fs, 2 * fs as usize), fs))?;
    let vowel = lib(AudioBuffer::new(synthetic_vowel(fs, 1.0), fs))?;
    let mut worst_rms = 0.0f64;
    for x in [&noise, &vowel] {
        let y = lib(enhance(x, &cfg))?;
        worst_rms = worst_rms.max(db(rms_of(y.samples()) / rms_of(x.samples())).abs());
    }
    ensure(worst_rms <= 0.1, format!("rms_match off by {worst_rms:.3} dB"))?;

    let tone = |amp: f64| (0..12_000).map(move |n| amp * (2.0 * PI * 1000.0 * n as f64 / fs as f64).sin());
    let burst: Vec<f64> = tone(0.05).chain(tone(0.5)).collect();
    let statik = EnhanceConfig { attack_ms: 0.0, release_ms: 0.0, ..cfg.clone() };
    let y = lib(enhance(&lib(AudioBuffer::new(burst, fs))?, &statik))?;
    let s = y.samples();
    let contrast = db(rms_of(&s[13_200..22_800]) / rms_of(&s[1_200..10_800]));
    ensure((contrast - 10.0).abs() <= 0.5, format!("20 dB contrast became {contrast:.2} dB"))?;

    let spec = lib(FrameSpec::mel_default(fs))?;
    let c_in = mean_spectral_centroid(&lib(stft(&noise, &spec, 1024))?);
    let c_out = mean_spectral_centroid(&lib(stft(&lib(enhance(&noise, &cfg))?, &spec, 1024))?);
    ensure(c_out > c_in, format!("centroid {c_in:.0} -> {c_out:.0} Hz"))?;
    Ok(format!("rms error {worst_rms:.1e} dB, 20 dB -> {contrast:.2} dB, centroid {c_in:.0} -> {c_out:.0} Hz"))
}

// 7. Encoder

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Scalar-loop LSTM stack.
fn naive_lstm(x: &[Vec<f64>], w: &EncoderWeights) -> Vec<Vec<f64>> {
    let mut seq = x.to_vec();
    for layer in &w.lstm {
        let hd = layer.w_hh.ncols();
        let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
        let mut out = Vec::new();
        for xt in &seq {
            let mut z = vec![0.0; 4 * hd];
            for (r, zr) in z.iter_mut().enumerate() {
                let mut acc = layer.bias[r];
                for (i, xi) in xt.iter().enumerate() {
                    acc += layer.w_ih[[r, i]] * xi;
                }
                for (j, hj) in h.iter().enumerate() {
                    acc += layer.w_hh[[r, j]] * hj;
                }
                *zr = acc;
            }
            for j in 0..hd {
                let (ig, fg, gg, og) =
                    (sigmoid(z[j]), sigmoid(z[hd + j]), z[2 * hd + j].tanh(), sigmoid(z[3 * hd + j]));
                c[j] = fg * c[j] + ig * gg;
                h[j] = og * c[j].tanh();
            }
            out.push(h.clone());
        }
        seq = out;
    }
    seq
}

fn matmul(a: &[Vec<f64>], b: &Array2<f64>) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| (0..b.ncols()).map(|j| row.iter().enumerate().map(|(k, v)| v * b[[k, j]]).sum()).collect())
        .collect()
}

/// Scalar-loop attention pooling with 1/sqrt(D) scaling.
#[allow(clippy::needless_range_loop)]
fn naive_attention(h: &[Vec<f64>], w: &EncoderWeights) -> Vec<f64> {
    let (q, k, v) = (matmul(h, &w.w_q), matmul(h, &w.w_k), matmul(h, &w.w_v));
    let d = w.w_q.ncols() as f64;
    let l = h.len();
    let mut ctx = vec![f64::NEG_INFINITY; v[0].len()];
    for t in 0..l {
        let s: Vec<f64> = (0..l).map(|u| q[t].iter().zip(&k[u]).map(|(a, b)| a * b).sum::<f64>() / d.sqrt()).collect();
        let m = s.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let e: Vec<f64> = s.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = e.iter().sum();
        for (j, cj) in ctx.iter_mut().enumerate() {
            let o: f64 = (0..l).map(|u| e[u] / z * v[u][j]).sum();
            *cj = cj.max(o);
        }
    }
    ctx
}

fn ac7_encoder() -> Check {
    let dims = EncoderDims { input: 3, hidden: 4, embedding: 5, layers: 2 };
    let opts = EncoderOptions::default();
    let mut worst = 0.0f64;
    let mut worst_softmax = 0.0f64;
    for seed in 0..10u64 {
        let w = init_random(seed, dims);
        let x = Array2::from_shape_vec((3, 3), white_noise(seed + 20, 9, 1.0)).unwrap();
        let rows: Vec<Vec<f64>> = x.outer_iter().map(|r| r.to_vec()).collect();
        let h = lib(lstm_forward(x.view(), &w))?;
        let h_ref = naive_lstm(&rows, &w);
        for (t, row) in h_ref.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((h[[t, j]] - v).abs());
            }
        }
        let ctx = lib(attention_pool(h.view(), &w, true))?;
        let ctx_ref = naive_attention(&h_ref, &w);
        worst = ctx.iter().zip(&ctx_ref).fold(worst, |m, (a, b)| m.max((a - b).abs()));

        // end to end, before normalisation
        let mut joined = ctx_ref.clone();
        joined.extend(h_ref.last().unwrap());
        let raw_ref: Vec<f64> = (0..dims.embedding)
            .map(|e| w.embed_bias[e] + joined.iter().enumerate().map(|(i, v)| v * w.embed_weight[[i, e]]).sum::<f64>())
            .collect();
        let raw = lib(embed_raw(x.view(), &w, &opts))?;
        worst = raw.iter().zip(&raw_ref).fold(worst, |m, (a, b)| m.max((a - b).abs()));

        let s = Array2::from_shape_vec((3, 3), white_noise(seed, 9, 20.0)).unwrap();
        for row in softmax_rows(s).rows() {
            worst_softmax = worst_softmax.max((row.sum() - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, format!("oracle mismatch {worst:.2e}"))?;
    ensure(worst_softmax <= 1e-6, format!("softmax row sum error {worst_softmax:.2e}"))?;

    // time permutation invariance of the pooled context
    let w = init_random(99, dims);
    let h = Array2::from_shape_vec((6, 4), white_noise(98, 24, 0.5)).unwrap();
    let perm = [3usize, 0, 5, 1, 4, 2];
    let a = lib(attention_pool(h.view(), &w, true))?;
    let b = lib(attention_pool(h.select(Axis(0), &perm).view(), &w, true))?;
    let perm_err = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    ensure(perm_err <= 1e-12, format!("context changed under permutation by {perm_err:.2e}"))?;

    // unit norm and paper-scale timing
    let big = EncoderDims::paper(20);
    let wb = init_random(1, big);
    let shapes_ok = wb.lstm[0].w_ih.dim() == (2048, 20)
        && wb.lstm[1].w_ih.dim() == (2048, 512)
        && wb.w_q.dim() == (512, 512)
        && wb.embed_weight.dim() == (1024, 128);
    ensure(shapes_ok, "paper-scale tensor shapes")?;
    let feats = Array2::from_shape_vec((100, 20), white_noise(3, 2000, 1.0)).unwrap();
    let start = Instant::now();
    let e = lib(embed(feats.view(), &wb, &opts))?;
    let secs = start.elapsed().as_secs_f64();
    let norm = e.vector().dot(e.vector()).sqrt();
    ensure(e.dim() == 128, format!("embedding dim {}", e.dim()))?;
    ensure((norm - 1.0).abs() <= 1e-6, format!("embedding norm {norm}"))?;
    ensure(secs < 1.0, format!("paper-scale forward took {secs:.2} s"))?;
    Ok(format!(
        "oracle error {worst:.1e}, softmax {worst_softmax:.1e}, permutation {perm_err:.1e}, 100-frame 512/128 pass {secs:.3} s"
    ))
}

// 8. Clustering methodology

fn ac8_clustering() -> Check {
    let (dim, per, sigma) = (32usize, 50usize, 1.0);
    // orthogonal centroids at pairwise distance 5x the RMS within-cluster spread
    let spread = sigma * (dim as f64).sqrt();
    let offset = 5.0 * spread / 2f64.sqrt();
    let mut data = Array2::zeros((3 * per, dim));
    let mut labels = Vec::new();
    for c in 0..3 {
        let noise = white_noise(400 + c as u64, per * dim, sigma);
        for i in 0..per {
            let mut row = data.row_mut(c * per + i);
            for j in 0..dim {
                row[j] = noise[i * dim + j] + if j == c { offset } else { 0.0 };
            }
            labels.push(["normal", "lombard", "whisper"][c]);
        }
    }
    let model = lib(pca_fit(&data, 2))?;
    let proj = lib(model.project(&data))?;
    let report = lib(silhouette(&proj, &labels, Metric::Euclidean))?;
    ensure(report.silhouette > 0.5, format!("silhouette {:.3}", report.silhouette))?;

    // brute-force eigendecomposition oracle on 5 x 3 inputs
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let x = Array2::from_shape_vec((5, 3), uniform(500 + seed, 15, -2.0, 2.0)).unwrap();
        let m = lib(pca_fit(&x, 3))?;
        let mean = x.mean_axis(Axis(0)).unwrap();
        let c = &x - &mean;
        let cov = DMatrix::from_fn(3, 3, |i, j| (0..5).map(|r| c[[r, i]] * c[[r, j]]).sum::<f64>() / 4.0);
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for (rank, &idx) in order.iter().enumerate() {
            worst = worst.max((eig.eigenvalues[idx] - m.explained_variance[rank]).abs());
            let v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            for (j, vj) in v.iter().enumerate() {
                worst = worst.max((vj * lead.signum() - m.components[[rank, j]]).abs());
            }
        }
    }
    ensure(worst <= 1e-9, format!("PCA vs oracle {worst:.2e}"))?;
    Ok(format!("silhouette {:.3} after PCA to 2, oracle error {worst:.1e}", report.silhouette))
}

// 9. Evaluation statistics

/// Wilson bounds as the roots of (p_hat - p)^2 = z^2 p (1 - p) / n.
fn wilson_oracle(c: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let (p, n) = (c as f64 / n as f64, n as f64);
    let qa = 1.0 + z * z / n;
    let qb = -(2.0 * p + z * z / n);
    let qc = p * p;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    ((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa))
}

fn ac9_evaluation() -> Check {
    let p = lib(ab_summary(AbCounts { a: 47, b: 35, no_pref: 18 }))?;
    let row = format!("{} % {} % {} %", p.a, p.b, p.no_pref);
    ensure(row == "47 % 35 % 18 %", format!("AB row {row}"))?;

    let mut worst = 0.0f64;
    for (c, n) in [(45u64, 60u64), (0, 10), (10, 10), (1, 3), (73, 120), (299, 300), (5, 1000)] {
        let r = lib(wrr(c, n, 0.95))?;
        let (lo, hi) = wilson_oracle(c, n);
        worst = worst.max((r.ci_low - lo).abs()).max((r.ci_high - hi).abs());
    }
    ensure(worst <= 1e-9, format!("Wilson mismatch {worst:.2e}"))?;

    // 25 ratings summing to 102 average exactly 4.08
    let mut ratings = vec![4u8; 25];
    for r in ratings.iter_mut().take(2) {
        *r = 5;
    }
    let m = lib(mos_mean(&ratings))?;
    ensure(m.display() == "4.08", format!("MOS shown as {}", m.display()))?;
    // 30 simulated ratings near that mean keep the two-decimal convention
    let sim: Vec<u8> = uniform(6, 30, 0.0, 1.0)
        .iter()
        .map(|u| {
            if *u < 0.1 {
                3
            } else if *u < 0.75 {
                4
            } else {
                5
            }
        })
        .collect();
    let shown = lib(mos_mean(&sim))?.display();
    let well_formed = shown.len() == 4 && shown.as_bytes()[1] == b'.' && shown.parse::<f64>().is_ok();
    ensure(well_formed, format!("MOS formatting {shown}"))?;
    Ok(format!("AB {row}, Wilson error {worst:.1e}, MOS {} (simulated {shown})", m.display()))
}

// 10. Determinism

fn ac10_determinism(suite_start: Instant) -> Check {
    let fs = 24_000;
    let speech = lib(AudioBuffer::new(synthetic_vowel(fs, 0.5), fs))?;
    let cfg = lib(WhisperConfig::for_rate(fs))?.with_seed(2024);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in 0..2 {
        let out = lib(whisperize(&speech, &cfg))?;
        let path = dir.path().join(format!("run{run}.wav"));
        lib(write_wav(&out, &path, SampleCodec::Float32))?;
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(files[0] == files[1], "whisperize output differs between runs")?;
    let other = lib(whisperize(&speech, &cfg.clone().with_seed(2025)))?;
    let first = lib(whisperize(&speech, &cfg))?;
    ensure(other.samples() != first.samples(), "different seeds gave identical output")?;

    let dims = EncoderDims::DESK;
    let bits =
        |w: &EncoderWeights| w.tensors().into_iter().flat_map(|(_, _, v)| v).map(f64::to_bits).collect::<Vec<_>>();
    ensure(bits(&init_random(7, dims)) == bits(&init_random(7, dims)), "weight init differs between runs")?;
    let noise_a: Vec<u64> = white_noise(11, 1000, 1.0).into_iter().map(f64::to_bits).collect();
    let noise_b: Vec<u64> = white_noise(11, 1000, 1.0).into_iter().map(f64::to_bits).collect();
    ensure(noise_a == noise_b, "noise generator differs between runs")?;

    let secs = suite_start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("acceptance suite took {secs:.1} s"))?;
    Ok(format!("whisper WAV bytes, weights and noise identical under fixed seeds; suite {secs:.1} s"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [Criterion; 10] = [
        ("AC1 whisperization efficacy", Box::new(ac1_whisperization)),
        ("AC2 LPC core", Box::new(ac2_lpc_core)),
        ("AC3 formant modification", Box::new(ac3_formants)),
        ("AC4 frontend", Box::new(ac4_frontend)),
        ("AC5 noise mixing", Box::new(ac5_mixing)),
        ("AC6 enhancement", Box::new(ac6_enhancement)),
        ("AC7 encoder", Box::new(ac7_encoder)),
        ("AC8 clustering methodology", Box::new(ac8_clustering)),
        ("AC9 evaluation statistics", Box::new(ac9_evaluation)),
        ("AC10 determinism", Box::new(move || ac10_determinism(start))),
    ];
    let mut failed = 0;
    for (name, check) in criteria.iter() {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
