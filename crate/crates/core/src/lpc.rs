//! Linear prediction: autocorrelation analysis, Levinson-Durbin, inverse and
//! synthesis filtering, and formant editing in the pole domain.
//!
//! Predictor polynomials use the analysis-filter sign convention
//! `A(z) = 1 + a1 z^-1 + ... + ap z^-p`; slices of coefficients hold
//! `a1..ap` without the leading one.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::csvout::write_matrix;
use crate::error::{Error, Result};

/// Relative white-noise correction added to `r[0]` before the recursion.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
pub const DEFAULT_PRE_EMPHASIS: f64 = 0.97;

/// One pole pair per kHz plus two for spectral tilt (26 at 24 kHz).
pub fn default_order(sample_rate: u32) -> usize {
    sample_rate as usize / 1000 + 2
}

/// `r[k] = sum_n x[n] x[n + k]` for `k = 0..=max_lag`.
pub fn autocorrelate(frame: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= frame.len() {
        return Err(Error::arg(format!("lag {max_lag} needs a frame longer than {} samples", frame.len())));
    }
    Ok((0..=max_lag).map(|k| frame.iter().zip(&frame[k..]).map(|(a, b)| a * b).sum()).collect())
}

/// Output of the Levinson-Durbin recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonSolution {
    pub coeffs: Vec<f64>,
    /// Final prediction-error energy.
    pub error: f64,
    pub reflection: Vec<f64>,
    /// Set when `r[0] <= 0`; the predictor is then all zeros with zero error.
    pub degenerate: bool,
}

impl LevinsonSolution {
    pub fn gain(&self) -> f64 {
        self.error.max(0.0).sqrt()
    }
}

/// Solves the order-`order` normal equations for autocorrelation `r`.
pub fn levinson(r: &[f64], order: usize) -> Result<LevinsonSolution> {
    if order == 0 {
        return Err(Error::arg("LPC order must be at least 1"));
    }
    if r.len() < order + 1 {
        return Err(Error::arg(format!("order {order} needs {} autocorrelation lags, got {}", order + 1, r.len())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("autocorrelation is not finite".into()));
    }
    if r[0] <= 0.0 {
        return Ok(LevinsonSolution {
            coeffs: vec![0.0; order],
            error: 0.0,
            reflection: vec![0.0; order],
            degenerate: true,
        });
    }

    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut reflection = vec![0.0; order];
    let mut error = r[0];
    for m in 0..order {
        let acc = r[m + 1] + (0..m).map(|j| prev[j] * r[m - j]).sum::<f64>();
        let k = -acc / error;
        reflection[m] = k;
        a[m] = k;
        for j in 0..m {
            a[j] = prev[j] + k * prev[m - 1 - j];
        }
        error *= 1.0 - k * k;
        prev[..=m].copy_from_slice(&a[..=m]);
        if error <= 0.0 {
            // perfectly predictable input; higher orders add nothing
            error = 0.0;
            break;
        }
    }
    Ok(LevinsonSolution { coeffs: a, error, reflection, degenerate: false })
}

/// Step-up recursion from reflection coefficients to a direct-form
/// predictor. Any `|k| < 1` yields a minimum-phase `A(z)`.
pub fn from_reflection(reflection: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(reflection.len());
    for &k in reflection {
        let prev = a.clone();
        let m = prev.len();
        for j in 0..m {
            a[j] = prev[j] + k * prev[m - 1 - j];
        }
        a.push(k);
    }
    a
}

/// `e[n] = x[n] + sum_i a_i x[n - i]`, zero initial state.
pub fn inverse_filter(frame: &[f64], coeffs: &[f64]) -> Vec<f64> {
    (0..frame.len())
        .map(|n| {
            let past: f64 = coeffs.iter().take(n).enumerate().map(|(i, a)| a * frame[n - 1 - i]).sum();
            frame[n] + past
        })
        .collect()
}

/// All-pole filtering by `1 / A(z)`, zero initial state. Exact inverse of
/// [`inverse_filter`].
pub fn synthesis_filter(excitation: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(excitation.len());
    for (n, e) in excitation.iter().enumerate() {
        let past: f64 = coeffs.iter().take(n).enumerate().map(|(i, a)| a * out[n - 1 - i]).sum();
        let y = e - past;
        if !y.is_finite() {
            return Err(Error::Numeric(format!("synthesis output not finite at sample {n}")));
        }
        out.push(y);
    }
    Ok(out)
}

/// `y[n] = x[n] - alpha x[n - 1]`.
pub fn pre_emphasis(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter()
        .map(|&v| {
            let y = v - alpha * prev;
            prev = v;
            y
        })
        .collect()
}

/// Inverse of [`pre_emphasis`]: `y[n] = x[n] + alpha y[n - 1]`.
pub fn de_emphasis(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter()
        .map(|&v| {
            prev = v + alpha * prev;
            prev
        })
        .collect()
}

/// Per-frame source-filter decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcFrame {
    pub order: usize,
    pub coeffs: Vec<f64>,
    /// Square root of the prediction-error energy.
    pub gain: f64,
    pub residual: Vec<f64>,
    pub degenerate: bool,
}

impl LpcFrame {
    /// Autocorrelation-method analysis of one (already windowed) frame.
    /// `regularization` scales `r[0]` by `1 + regularization`.
    pub fn analyze(frame: &[f64], order: usize, regularization: f64) -> Result<Self> {
        let mut r = autocorrelate(frame, order)?;
        r[0] *= 1.0 + regularization;
        let sol = levinson(&r, order)?;
        let residual = inverse_filter(frame, &sol.coeffs);
        Ok(Self { order, gain: sol.gain(), coeffs: sol.coeffs, residual, degenerate: sol.degenerate })
    }
}

/// CSV with columns `frame,gain,a1..ap`.
pub fn write_frames_csv<W: Write>(frames: &[LpcFrame], w: W) -> Result<()> {
    let order = frames.iter().map(|f| f.order).max().unwrap_or(0);
    let mut header = vec!["frame".to_string(), "gain".to_string()];
    header.extend((1..=order).map(|i| format!("a{i}")));
    let rows = frames.iter().enumerate().map(|(i, f)| {
        let mut row = vec![i.to_string(), f.gain.to_string()];
        row.extend(f.coeffs.iter().map(|a| a.to_string()));
        row
    });
    write_matrix(w, &header, rows)?;
    Ok(())
}

/// Roots of `z^p A(z)`, stored so conjugate closure holds by construction:
/// each complex pair is kept once by its upper-half-plane member.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub pairs: Vec<Complex64>,
    pub real: Vec<f64>,
}

impl PoleSet {
    pub fn order(&self) -> usize {
        2 * self.pairs.len() + self.real.len()
    }

    /// Every pole, conjugates included.
    pub fn all(&self) -> Vec<Complex64> {
        self.pairs
            .iter()
            .flat_map(|p| [*p, p.conj()])
            .chain(self.real.iter().map(|&r| Complex64::new(r, 0.0)))
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.all().iter().fold(0.0, |m, p| m.max(p.norm()))
    }
}

/// Resonance frequency of a pole in Hz.
pub fn pole_frequency(pole: Complex64, sample_rate: f64) -> f64 {
    pole.arg() * sample_rate / (2.0 * PI)
}

/// 3 dB bandwidth of a pole in Hz, `-(fs / pi) ln |pole|`.
pub fn pole_bandwidth(pole: Complex64, sample_rate: f64) -> f64 {
    -(sample_rate / PI) * pole.norm().ln()
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    // z^p + a1 z^{p-1} + ... + ap and its derivative
    let mut f = Complex64::new(1.0, 0.0);
    let mut df = Complex64::new(0.0, 0.0);
    for &a in coeffs {
        df = df * z + f;
        f = f * z + a;
    }
    (f, df)
}

fn polish(coeffs: &[f64], mut z: Complex64, real: bool) -> Complex64 {
    let mut best = horner(coeffs, z).0.norm();
    for _ in 0..8 {
        let (f, df) = horner(coeffs, z);
        if df.norm() == 0.0 {
            break;
        }
        let mut next = z - f / df;
        if real {
            next.im = 0.0;
        }
        let err = horner(coeffs, next).0.norm();
        if !(err < best) {
            break;
        }
        best = err;
        z = next;
    }
    z
}

/// Pole decomposition by companion-matrix eigenvalues with a few Newton
/// polishing steps on each root.
pub fn poles(coeffs: &[f64]) -> Result<PoleSet> {
    let p = coeffs.len();
    if p == 0 {
        return Err(Error::arg("predictor order must be at least 1"));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numeric("predictor coefficients not finite".into()));
    }
    let companion = DMatrix::from_fn(p, p, |i, j| {
        if i == 0 {
            -coeffs[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::RootFinding { frame: None });
    }

    const IMAG_TOL: f64 = 1e-10;
    let mut pairs = Vec::new();
    let mut lower = 0usize;
    let mut real = Vec::new();
    for z in eig.iter() {
        if z.im > IMAG_TOL {
            pairs.push(polish(coeffs, *z, false));
        } else if z.im < -IMAG_TOL {
            lower += 1;
        } else {
            real.push(polish(coeffs, Complex64::new(z.re, 0.0), true).re);
        }
    }
    if lower != pairs.len() || pairs.iter().any(|z| z.im <= 0.0) {
        return Err(Error::RootFinding { frame: None });
    }
    pairs.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    real.sort_by(|a, b| b.total_cmp(a));
    Ok(PoleSet { pairs, real })
}

/// Expands the pole set back into predictor coefficients `a1..ap`.
pub fn reconstruct(poles: &PoleSet) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul = |factor: &[f64]| {
        let mut out = vec![0.0; poly.len() + factor.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        poly = out;
    };
    for p in &poles.pairs {
        mul(&[1.0, -2.0 * p.re, p.norm_sqr()]);
    }
    for &r in &poles.real {
        mul(&[1.0, -r]);
    }
    poly.split_off(1)
}

/// Parameters of a pole-domain formant edit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantShift {
    /// Multiplier applied to the angle of complex poles below `freq_cutoff_hz`.
    pub freq_scale: f64,
    /// Radii become `rho^bw_exponent`; values above one widen bandwidths.
    pub bw_exponent: f64,
    pub freq_cutoff_hz: f64,
}

impl FormantShift {
    pub const IDENTITY: FormantShift =
        FormantShift { freq_scale: 1.0, bw_exponent: 1.0, freq_cutoff_hz: f64::INFINITY };

    /// Raise the low formants by 15 % and widen every resonance.
    pub const WHISPER: FormantShift = FormantShift { freq_scale: 1.15, bw_exponent: 1.2, freq_cutoff_hz: 2000.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_scale > 0.0 && self.freq_scale.is_finite()) {
            return Err(Error::arg("freq_scale must be positive"));
        }
        if !(self.bw_exponent >= 1.0 && self.bw_exponent.is_finite()) {
            return Err(Error::arg("bw_exponent must be at least 1"));
        }
        if self.freq_cutoff_hz.is_nan() || self.freq_cutoff_hz < 0.0 {
            return Err(Error::arg("freq_cutoff must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormantEdit {
    pub poles: PoleSet,
    /// Number of poles whose scaled angle reached pi and was clamped.
    pub clamped: usize,
}

const MAX_ANGLE: f64 = PI - 1e-6;

/// Shifts low formants in frequency and widens every complex resonance.
/// Real poles are left alone.
pub fn modify_formants(poles: &PoleSet, shift: &FormantShift, sample_rate: f64) -> Result<FormantEdit> {
    shift.validate()?;
    if !(sample_rate > 0.0) {
        return Err(Error::arg("sample rate must be positive"));
    }
    let mut clamped = 0;
    let pairs = poles
        .pairs
        .iter()
        .map(|&p| {
            let shift_angle = shift.freq_scale != 1.0 && pole_frequency(p, sample_rate) < shift.freq_cutoff_hz;
            let widen = shift.bw_exponent != 1.0;
            if !shift_angle && !widen {
                return p;
            }
            let (mut rho, mut theta) = p.to_polar();
            if shift_angle {
                theta *= shift.freq_scale;
                if theta >= MAX_ANGLE {
                    theta = MAX_ANGLE;
                    clamped += 1;
                }
            }
            if widen {
                rho = rho.powf(shift.bw_exponent);
            }
            Complex64::from_polar(rho, theta)
        })
        .collect();
    Ok(FormantEdit { poles: PoleSet { pairs, real: poles.real.clone() }, clamped })
}

/// Applies `shift` directly to predictor coefficients. An edit that moves
/// no pole returns `coeffs` unchanged without a root-finding round trip.
pub fn shift_formants(coeffs: &[f64], shift: &FormantShift, sample_rate: f64) -> Result<(Vec<f64>, usize)> {
    shift.validate()?;
    if shift.freq_scale == 1.0 && shift.bw_exponent == 1.0 {
        return Ok((coeffs.to_vec(), 0));
    }
    let edit = modify_formants(&poles(coeffs)?, shift, sample_rate)?;
    Ok((reconstruct(&edit.poles), edit.clamped))
}
