//! `whisperize`, `enhance` and `mix`.

use std::path::{Path, PathBuf};

use clap::Args;
use stylekit::convert::{enhance, mix_at_snr, whisperize, EnhanceConfig, NoiseMixSpec, WhisperConfig};
use stylekit::lpc::FormantShift;
use stylekit::{AudioBuffer, FrameSpec, SampleCodec, Style, Window};

use crate::common::{check_manifest_inputs, input_file, load_wav, path_component, record_seed, Ctx};
use crate::error::{CliError, CliResult};
use crate::manifest::{self, Record};
use crate::output::{parse_codec, Staged};

/// Single-file or manifest-driven batch conversion.
#[derive(Args, Debug)]
pub struct ConvertIo {
    /// Input WAV file
    #[arg(long, value_name = "WAV")]
    input: Option<PathBuf>,
    /// Output WAV file
    #[arg(long, value_name = "WAV")]
    output: Option<PathBuf>,
    /// Corpus manifest; every `normal` record is converted
    #[arg(long, value_name = "CSV", conflicts_with_all = ["input", "output"])]
    manifest: Option<PathBuf>,
    /// Batch output directory; receives <style>/<speaker>/<utterance_id>.wav and manifest.csv
    #[arg(long, value_name = "DIR", requires = "manifest")]
    out_dir: Option<PathBuf>,
    /// Output sample format: pcm16 or float32 [default: pcm16]
    #[arg(long)]
    format: Option<String>,
}

enum Job {
    Single { input: PathBuf, output: PathBuf },
    Batch { records: Vec<Record>, out_dir: PathBuf },
}

impl ConvertIo {
    fn resolve(self, ctx: &mut Ctx) -> CliResult<(Job, SampleCodec)> {
        ctx.settings.flag("format", self.format);
        let codec = ctx.settings.take::<String>("format")?.map_or(Ok(SampleCodec::Pcm16), |s| parse_codec(&s))?;
        let job = match (self.input, self.output, self.manifest, self.out_dir) {
            (Some(input), Some(output), None, None) => {
                input_file(&input)?;
                Job::Single { input, output }
            }
            (None, None, Some(manifest), Some(out_dir)) => {
                let records: Vec<Record> =
                    manifest::read(input_file(&manifest)?)?.into_iter().filter(|r| r.style == Style::Normal).collect();
                if records.is_empty() {
                    return Err(CliError::usage(format!("{}: no `normal` records to convert", manifest.display())));
                }
                for r in &records {
                    path_component(&r.speaker, "speaker", r.line)?;
                    path_component(&r.utterance_id, "utterance_id", r.line)?;
                }
                check_manifest_inputs(&records)?;
                Job::Batch { records, out_dir }
            }
            (Some(_), None, ..) => return Err(CliError::usage("--input requires --output")),
            (None, Some(_), ..) => return Err(CliError::usage("--output requires --input")),
            (.., Some(_), None) => return Err(CliError::usage("--manifest requires --out-dir")),
            _ => return Err(CliError::usage("give either --input/--output or --manifest/--out-dir")),
        };
        Ok((job, codec))
    }
}

/// Runs `convert` on every input of `job` and commits the outputs together.
fn run_job(
    ctx: &Ctx,
    job: Job,
    codec: SampleCodec,
    style: Style,
    convert: impl Fn(&AudioBuffer, u64) -> CliResult<AudioBuffer> + Sync + Send,
) -> CliResult<()> {
    let mut staged = Staged::default();
    match job {
        Job::Single { input, output } => {
            let audio = load_wav(&input)?;
            let out = convert(&audio, ctx.seed).map_err(|e| e.context(input.display()))?;
            staged.wav(&output, &out, codec)?;
        }
        Job::Batch { records, out_dir } => {
            let outputs = ctx.par_map(&records, |r| {
                let audio = load_wav(&r.path)?;
                convert(&audio, record_seed(ctx.seed, &r.speaker, &r.utterance_id))
                    .map_err(|e| e.context(r.path.display()))
            })?;
            let mut converted = Vec::with_capacity(records.len());
            for (r, audio) in records.iter().zip(&outputs) {
                let rel = Path::new(style.as_str()).join(&r.speaker).join(format!("{}.wav", r.utterance_id));
                staged.wav(&out_dir.join(&rel), audio, codec)?;
                converted.push(Record { style, path: rel, ..r.clone() });
            }
            staged.text(&out_dir.join("manifest.csv"), |w| manifest::write(w, &converted))?;
        }
    }
    staged.commit()
}

#[derive(Args, Debug)]
pub struct WhisperArgs {
    #[command(flatten)]
    io: ConvertIo,
    /// LPC order [default: sample rate in kHz + 2]
    #[arg(long)]
    order: Option<usize>,
    /// Angle multiplier for poles below the cutoff [default: 1.15]
    #[arg(long)]
    freq_scale: Option<f64>,
    /// Pole radii become r^bw_exponent [default: 1.2]
    #[arg(long)]
    bw_exponent: Option<f64>,
    /// Only poles below this frequency are shifted [default: 2000]
    #[arg(long)]
    freq_cutoff_hz: Option<f64>,
    /// Spectral tilt change in dB/octave [default: 3]
    #[arg(long)]
    tilt_db_per_octave: Option<f64>,
    /// Pre-emphasis coefficient, or `off` [default: 0.97]
    #[arg(long)]
    pre_emphasis: Option<String>,
    /// Analysis frame length in ms, hop is half of it [default: 25]
    #[arg(long)]
    frame_ms: Option<f64>,
    /// Levinson diagonal loading [default: 1e-6]
    #[arg(long)]
    regularization: Option<f64>,
}

#[derive(Debug, Default)]
struct WhisperParams {
    order: Option<usize>,
    freq_scale: Option<f64>,
    bw_exponent: Option<f64>,
    freq_cutoff_hz: Option<f64>,
    tilt: Option<f64>,
    pre_emphasis: Option<Option<f64>>,
    frame_ms: Option<f64>,
    regularization: Option<f64>,
}

impl WhisperParams {
    fn config(&self, rate: u32, seed: u64) -> CliResult<WhisperConfig> {
        let mut cfg = WhisperConfig::for_rate(rate)?.with_seed(seed);
        if let Some(ms) = self.frame_ms {
            if !(ms > 0.0 && ms.is_finite()) {
                return Err(CliError::usage("frame_ms must be positive"));
            }
            let len = ((ms * rate as f64 / 1000.0).round() as usize).max(2) & !1;
            cfg.frame = FrameSpec::new(len, len / 2, Window::Hann)?;
        }
        let d = FormantShift::WHISPER;
        cfg.shift = FormantShift {
            freq_scale: self.freq_scale.unwrap_or(d.freq_scale),
            bw_exponent: self.bw_exponent.unwrap_or(d.bw_exponent),
            freq_cutoff_hz: self.freq_cutoff_hz.unwrap_or(d.freq_cutoff_hz),
        };
        cfg.order = self.order.unwrap_or(cfg.order);
        cfg.tilt_db_per_octave = self.tilt.unwrap_or(cfg.tilt_db_per_octave);
        cfg.pre_emphasis = self.pre_emphasis.unwrap_or(cfg.pre_emphasis);
        cfg.regularization = self.regularization.unwrap_or(cfg.regularization);
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn whisperize_cmd(mut ctx: Ctx, a: WhisperArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("order", a.order);
    s.flag("freq_scale", a.freq_scale);
    s.flag("bw_exponent", a.bw_exponent);
    s.flag("freq_cutoff_hz", a.freq_cutoff_hz);
    s.flag("tilt_db_per_octave", a.tilt_db_per_octave);
    s.flag("pre_emphasis", a.pre_emphasis);
    s.flag("frame_ms", a.frame_ms);
    s.flag("regularization", a.regularization);
    let params = WhisperParams {
        order: s.take("order")?,
        freq_scale: s.take("freq_scale")?,
        bw_exponent: s.take("bw_exponent")?,
        freq_cutoff_hz: s.take("freq_cutoff_hz")?,
        tilt: s.take("tilt_db_per_octave")?,
        pre_emphasis: match s.take::<String>("pre_emphasis")? {
            None => None,
            Some(v) if v.eq_ignore_ascii_case("off") => Some(None),
            Some(v) => Some(Some(
                v.parse()
                    .map_err(|_| CliError::usage(format!("pre_emphasis expects a coefficient or `off`, got `{v}`")))?,
            )),
        },
        frame_ms: s.take("frame_ms")?,
        regularization: s.take("regularization")?,
    };
    let (job, codec) = a.io.resolve(&mut ctx)?;
    std::mem::take(&mut ctx.settings).finish()?;
    // catch bad values before any audio is read
    params.config(16_000, 0)?;
    run_job(&ctx, job, codec, Style::Whisper, |audio, seed| {
        let cfg = params.config(audio.sample_rate(), seed)?;
        Ok(whisperize(audio, &cfg)?)
    })
}

#[derive(Args, Debug)]
pub struct EnhanceArgs {
    #[command(flatten)]
    io: ConvertIo,
    /// Lower edge of the boosted band in Hz [default: 1000]
    #[arg(long)]
    band_low_hz: Option<f64>,
    /// Upper edge of the boosted band in Hz [default: 4000]
    #[arg(long)]
    band_high_hz: Option<f64>,
    /// Band boost in dB [default: 6]
    #[arg(long)]
    band_boost_db: Option<f64>,
    /// Tilt corner frequency in Hz [default: 1000]
    #[arg(long)]
    tilt_start_hz: Option<f64>,
    /// Gain slope above the corner in dB/octave [default: 2]
    #[arg(long)]
    tilt_db_per_octave: Option<f64>,
    /// Compression ratio, 1 disables compression [default: 2]
    #[arg(long)]
    ratio: Option<f64>,
    /// Envelope attack time in ms [default: 5]
    #[arg(long)]
    attack_ms: Option<f64>,
    /// Envelope release time in ms [default: 50]
    #[arg(long)]
    release_ms: Option<f64>,
    /// Restore the input RMS after processing [default: true]
    #[arg(long)]
    rms_match: Option<bool>,
    /// Odd length of the shaping FIR [default: 257]
    #[arg(long)]
    fir_taps: Option<usize>,
}

pub fn enhance_cmd(mut ctx: Ctx, a: EnhanceArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("band_low_hz", a.band_low_hz);
    s.flag("band_high_hz", a.band_high_hz);
    s.flag("band_boost_db", a.band_boost_db);
    s.flag("tilt_start_hz", a.tilt_start_hz);
    s.flag("tilt_db_per_octave", a.tilt_db_per_octave);
    s.flag("ratio", a.ratio);
    s.flag("attack_ms", a.attack_ms);
    s.flag("release_ms", a.release_ms);
    s.flag("rms_match", a.rms_match);
    s.flag("fir_taps", a.fir_taps);
    let d = EnhanceConfig::default();
    let cfg = EnhanceConfig {
        band_hz: (s.take("band_low_hz")?.unwrap_or(d.band_hz.0), s.take("band_high_hz")?.unwrap_or(d.band_hz.1)),
        band_boost_db: s.take("band_boost_db")?.unwrap_or(d.band_boost_db),
        tilt_start_hz: s.take("tilt_start_hz")?.unwrap_or(d.tilt_start_hz),
        tilt_db_per_octave: s.take("tilt_db_per_octave")?.unwrap_or(d.tilt_db_per_octave),
        ratio: s.take("ratio")?.unwrap_or(d.ratio),
        attack_ms: s.take("attack_ms")?.unwrap_or(d.attack_ms),
        release_ms: s.take("release_ms")?.unwrap_or(d.release_ms),
        rms_match: s.take_bool("rms_match")?.unwrap_or(d.rms_match),
        fir_taps: s.take("fir_taps")?.unwrap_or(d.fir_taps),
    };
    let (job, codec) = a.io.resolve(&mut ctx)?;
    std::mem::take(&mut ctx.settings).finish()?;
    run_job(&ctx, job, codec, Style::Lombard, |audio, _| Ok(enhance(audio, &cfg)?))
}

#[derive(Args, Debug)]
pub struct MixArgs {
    /// Speech WAV file
    #[arg(long, value_name = "WAV")]
    speech: PathBuf,
    /// Noise WAV file; looped or truncated to the speech length
    #[arg(long, value_name = "WAV")]
    noise: PathBuf,
    /// Output WAV file
    #[arg(long, value_name = "WAV")]
    output: PathBuf,
    /// Speech-to-noise ratio in dB (config key `snr_db`)
    #[arg(long, value_name = "DB")]
    snr: Option<f64>,
    /// Output sample format: pcm16 or float32 [default: pcm16]
    #[arg(long)]
    format: Option<String>,
}

pub fn mix_cmd(mut ctx: Ctx, a: MixArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("snr_db", a.snr);
    s.flag("format", a.format);
    let snr_db: f64 = s.take("snr_db")?.ok_or_else(|| CliError::usage("missing --snr (or `snr_db` in the config)"))?;
    let codec = s.take::<String>("format")?.map_or(Ok(SampleCodec::Pcm16), |v| parse_codec(&v))?;
    std::mem::take(&mut ctx.settings).finish()?;
    let speech = load_wav(&a.speech)?;
    let noise = load_wav(&a.noise)?;
    let mixed = mix_at_snr(&speech, &NoiseMixSpec { snr_db, noise })?;
    let mut staged = Staged::default();
    staged.wav(&a.output, &mixed, codec)?;
    staged.commit()
}
