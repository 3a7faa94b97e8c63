use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Pitch search range in Hz.
pub const DEFAULT_F0_RANGE: (f64, f64) = (60.0, 400.0);

/// Ratios below this count as unvoiced.
pub const UNVOICED_THRESHOLD: f64 = 0.25;

const WINDOW_SECS: f64 = 0.040;

/// [`voicing_ratio_in`] over the default 60-400 Hz pitch range.
pub fn voicing_ratio(buffer: &AudioBuffer) -> Result<f64> {
    voicing_ratio_in(buffer, DEFAULT_F0_RANGE)
}

/// Peak over pitch lags of the normalised autocorrelation, averaged over
/// 40 ms windows.
///
/// Each window is mean-removed and, for every lag `k` in
/// `[fs / f0_max, fs / f0_min]`, contributes the normalised
/// cross-correlation `sum x[n] x[n+k] / sqrt(sum x[n]^2 * sum x[n+k]^2)`
/// over its overlapping part. These curves are averaged over the windows
/// that carry energy and the maximum of the average is returned, clamped
/// to `[0, 1]`. Averaging before the maximum keeps the estimate close to
/// the true autocorrelation; maximising each window separately and then
/// averaging reads even white noise as about 0.1.
pub fn voicing_ratio_in(buffer: &AudioBuffer, (f0_min, f0_max): (f64, f64)) -> Result<f64> {
    if !(0.0 < f0_min && f0_min < f0_max) {
        return Err(Error::arg(format!("invalid f0 range [{f0_min}, {f0_max}]")));
    }
    let fs = buffer.sample_rate() as f64;
    let min_lag = (fs / f0_max).ceil().max(1.0) as usize;
    let max_lag = (fs / f0_min).floor() as usize;
    if buffer.len() < 2 * max_lag {
        return Err(Error::arg(format!("voicing needs at least {} samples, got {}", 2 * max_lag, buffer.len())));
    }
    let win = ((WINDOW_SECS * fs).round() as usize).max(2 * max_lag);
    let x = buffer.samples();
    let windows: Vec<&[f64]> = if x.len() < win { vec![x] } else { x.chunks_exact(win).collect() };

    let mut sum = vec![0.0; max_lag + 1 - min_lag];
    let mut count = 0usize;
    for w in windows {
        if let Some(curve) = window_nccf(w, min_lag, max_lag) {
            sum.iter_mut().zip(curve).for_each(|(s, c)| *s += c);
            count += 1;
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    let peak = sum.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) / count as f64;
    Ok(peak.clamp(0.0, 1.0))
}

/// NCCF at lags `min_lag..=max_lag`, or `None` for a window without energy.
fn window_nccf(w: &[f64], min_lag: usize, max_lag: usize) -> Option<Vec<f64>> {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let x: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy <= 1e-20 * x.len() as f64 {
        return None;
    }
    // prefix sums of squares for the two overlapping segments
    let mut cum = vec![0.0; x.len() + 1];
    for (i, v) in x.iter().enumerate() {
        cum[i + 1] = cum[i] + v * v;
    }
    let n = x.len();
    Some(
        (min_lag..=max_lag)
            .map(|k| {
                if k >= n {
                    return 0.0;
                }
                let denom = (cum[n - k] * (cum[n] - cum[k])).sqrt();
                if denom <= 0.0 {
                    return 0.0;
                }
                let num: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
                num / denom
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{pulse_train, white_noise};

    fn buf(x: Vec<f64>) -> AudioBuffer {
        AudioBuffer::new(x, 24_000).unwrap()
    }

    #[test]
    fn pulse_train_is_voiced() {
        let r = voicing_ratio(&buf(pulse_train(120.0, 24_000, 24_000))).unwrap();
        assert!(r > 0.9, "{r}");
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let r = voicing_ratio(&buf(white_noise(1234, 24_000, 0.1))).unwrap();
        assert!(r < 0.2, "{r}");
        // the averaged estimate sits close to the true (zero) correlation
        assert!(r < 0.05, "{r}");
    }

    #[test]
    fn dc_and_silence_score_zero() {
        assert_eq!(voicing_ratio(&buf(vec![0.7; 4800])).unwrap(), 0.0);
        assert_eq!(voicing_ratio(&buf(vec![0.0; 4800])).unwrap(), 0.0);
    }

    #[test]
    fn resonant_noise_reads_its_true_correlation() {
        // AR(1) noise with a = 0.97 has autocorrelation 0.97^k, 0.16 at lag 60
        let e = white_noise(5, 48_000, 1.0);
        let mut x = Vec::with_capacity(e.len());
        let mut prev = 0.0;
        for v in e {
            prev = 0.97 * prev + v;
            x.push(prev);
        }
        let r = voicing_ratio(&buf(x)).unwrap();
        assert!((r - 0.97f64.powi(60)).abs() < 0.08, "{r}");
    }

    #[test]
    fn short_input_is_rejected() {
        assert!(matches!(voicing_ratio(&buf(vec![0.1; 799])), Err(Error::Argument(_))));
        // exactly 2 * fs / 60 is accepted even though it is shorter than one window
        assert!(voicing_ratio(&buf(pulse_train(120.0, 24_000, 800))).is_ok());
    }
}
