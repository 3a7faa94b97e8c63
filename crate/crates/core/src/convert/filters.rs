use std::f64::consts::PI;

use num_complex::Complex64;

/// First-order shelving filter whose gain change over a reference band
/// matches a requested slope in dB per octave.
///
/// The analog prototype `(s + wz) / (s + wp)` has its zero and pole placed
/// symmetrically in log frequency about the geometric centre `fc` of the
/// band, at `fc / r` and `fc * r`. It is discretised with a pre-warped
/// bilinear transform and normalised to unit gain at `fc`. `r` is found by
/// bisection so that the gain at the top of the band exceeds the gain at
/// the bottom by `slope * octaves` dB. One section cannot rise faster than
/// 6 dB/octave; steeper requests saturate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltFilter {
    b0: f64,
    b1: f64,
    a1: f64,
}

impl TiltFilter {
    /// Band used to fit the slope, clipped to 40 % of the sample rate.
    pub const REFERENCE_BAND: (f64, f64) = (250.0, 8000.0);

    pub fn new(db_per_octave: f64, sample_rate: u32) -> Self {
        let (lo, hi) = Self::band(sample_rate);
        let target = db_per_octave * (hi / lo).log2();
        let rise = |log_r: f64| {
            let f = Self::with_ratio(log_r.exp(), sample_rate);
            20.0 * (f.magnitude(hi, sample_rate) / f.magnitude(lo, sample_rate)).log10()
        };
        // rise is increasing in log r; 12 covers any realisable slope
        let (mut a, mut b) = (-12.0f64, 12.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if rise(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Self::with_ratio((0.5 * (a + b)).exp(), sample_rate)
    }

    fn band(sample_rate: u32) -> (f64, f64) {
        let fs = sample_rate as f64;
        (Self::REFERENCE_BAND.0.min(0.05 * fs), Self::REFERENCE_BAND.1.min(0.4 * fs))
    }

    fn with_ratio(r: f64, sample_rate: u32) -> Self {
        let fs = sample_rate as f64;
        let (lo, hi) = Self::band(sample_rate);
        let fc = (lo * hi).sqrt();
        let limit = 0.49 * fs;
        let fz = (fc / r).clamp(1e-3, limit);
        let fp = (fc * r).clamp(1e-3, limit);
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (wz, wp, k) = (warp(fz), warp(fp), 2.0 * fs);
        let norm = k + wp;
        let mut f = Self { b0: (k + wz) / norm, b1: (wz - k) / norm, a1: (wp - k) / norm };
        let g = f.magnitude(fc, sample_rate);
        f.b0 /= g;
        f.b1 /= g;
        f
    }

    pub fn magnitude(&self, freq: f64, sample_rate: u32) -> f64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate as f64);
        ((self.b0 + self.b1 * z1) / (1.0 + self.a1 * z1)).norm()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut y1) = (0.0, 0.0);
        x.iter()
            .map(|&v| {
                let y = self.b0 * v + self.b1 * x1 - self.a1 * y1;
                x1 = v;
                y1 = y;
                y
            })
            .collect()
    }
}
