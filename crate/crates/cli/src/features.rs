//! `mel`, `embed` and `voicing`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stylekit::analysis::{voicing_ratio, UNVOICED_THRESHOLD};
use stylekit::embedding::{embed, init_random, load_weights, write_embeddings_csv, Combine, EncoderOptions};
use stylekit::spectral::{log_mel, mel_cepstra, stft, Frontend, MelBank};
use stylekit::{EncoderDims, EncoderWeights};

use crate::common::{check_manifest_inputs, input_file, load_wav, Ctx};
use crate::error::{CliError, CliResult};
use crate::manifest;
use crate::output::Staged;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    /// One-sided power spectrogram
    Power,
    /// Natural-log mel energies
    LogMel,
    /// Orthonormal DCT of the log-mel energies
    Cepstra,
}

#[derive(Args, Debug)]
pub struct MelArgs {
    /// Input WAV file
    #[arg(long, value_name = "WAV")]
    input: PathBuf,
    /// Output CSV, one row per frame
    #[arg(long, value_name = "CSV")]
    output: PathBuf,
    /// Which representation to write [default: cepstra]
    #[arg(long, value_enum)]
    kind: Option<FeatureKind>,
    /// Number of mel filters [default: 80]
    #[arg(long)]
    n_mels: Option<usize>,
    /// Number of cepstral coefficients [default: 20]
    #[arg(long)]
    n_ceps: Option<usize>,
    /// FFT length [default: next power of two above the 25 ms frame]
    #[arg(long)]
    fft_size: Option<usize>,
}

pub fn mel_cmd(mut ctx: Ctx, a: MelArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("kind", a.kind.and_then(|k| k.to_possible_value()).map(|v| v.get_name().to_string()));
    s.flag("n_mels", a.n_mels);
    s.flag("n_ceps", a.n_ceps);
    s.flag("fft_size", a.fft_size);
    let kind = match s.take::<String>("kind")? {
        None => FeatureKind::Cepstra,
        Some(v) => {
            FeatureKind::from_str(&v, true).map_err(|_| CliError::usage(format!("unknown feature kind `{v}`")))?
        }
    };
    let n_mels: Option<usize> = s.take("n_mels")?;
    let n_ceps: Option<usize> = s.take("n_ceps")?;
    let fft_size: Option<usize> = s.take("fft_size")?;
    std::mem::take(&mut ctx.settings).finish()?;

    let audio = load_wav(&a.input)?;
    let rate = audio.sample_rate();
    let mut fe = Frontend::for_rate(rate)?;
    if let Some(n) = fft_size {
        fe.fft_size = n;
    }
    if n_mels.is_some() || fft_size.is_some() {
        fe.bank = MelBank::new(n_mels.unwrap_or(fe.bank.n_mels()), fe.fft_size, rate, 0.0, rate as f64 / 2.0)?;
    }
    if let Some(n) = n_ceps {
        fe = fe.with_n_ceps(n);
    }
    let spec = stft(&audio, &fe.frame_spec, fe.fft_size)?;
    let mut staged = Staged::default();
    match kind {
        FeatureKind::Power => staged.text(&a.output, |w| Ok(spec.write_csv(w)?))?,
        FeatureKind::LogMel => {
            let mel = log_mel(&spec, &fe.bank, fe.floor)?;
            staged.text(&a.output, |w| Ok(mel.write_csv(w, false)?))?
        }
        FeatureKind::Cepstra => {
            let mel = mel_cepstra(log_mel(&spec, &fe.bank, fe.floor)?, fe.n_ceps)?;
            staged.text(&a.output, |w| Ok(mel.write_csv(w, true)?))?
        }
    }
    staged.commit()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CombineArg {
    /// Concatenate the pooled context with the final hidden state
    Final,
    /// Concatenate the pooled context with the time-averaged hidden state
    Mean,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Corpus manifest
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,
    /// Embeddings CSV: utterance_id,speaker,style,e1..eN
    #[arg(long, value_name = "CSV")]
    output: PathBuf,
    /// Weight descriptor; without it weights are drawn from --seed
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// Cepstral input dimension of random weights [default: 20]
    #[arg(long, conflicts_with = "weights")]
    input_dim: Option<usize>,
    /// LSTM width of random weights [default: 64]
    #[arg(long, conflicts_with = "weights")]
    hidden: Option<usize>,
    /// Embedding size of random weights [default: 32]
    #[arg(long, conflicts_with = "weights")]
    embedding: Option<usize>,
    /// LSTM layers of random weights [default: 2]
    #[arg(long, conflicts_with = "weights")]
    layers: Option<usize>,
    /// Summary vector joined to the attention context [default: final]
    #[arg(long, value_enum)]
    combine: Option<CombineArg>,
    /// Divide attention scores by sqrt(D) [default: true]
    #[arg(long)]
    scale_scores: Option<bool>,
}

pub fn embed_cmd(mut ctx: Ctx, a: EmbedArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("weights", a.weights.as_ref().map(|p| p.display().to_string()));
    s.flag("input_dim", a.input_dim);
    s.flag("hidden", a.hidden);
    s.flag("embedding", a.embedding);
    s.flag("layers", a.layers);
    s.flag("combine", a.combine.and_then(|k| k.to_possible_value()).map(|v| v.get_name().to_string()));
    s.flag("scale_scores", a.scale_scores);
    let weights_path: Option<PathBuf> = s.take("weights")?;
    let d = EncoderDims::DESK;
    let dims = EncoderDims {
        input: s.take("input_dim")?.unwrap_or(d.input),
        hidden: s.take("hidden")?.unwrap_or(d.hidden),
        embedding: s.take("embedding")?.unwrap_or(d.embedding),
        layers: s.take("layers")?.unwrap_or(d.layers),
    };
    let combine = match s.take::<String>("combine")?.as_deref() {
        None | Some("final") => Combine::FinalState,
        Some("mean") => Combine::MeanOverTime,
        Some(v) => return Err(CliError::usage(format!("combine expects final or mean, got `{v}`"))),
    };
    let opts = EncoderOptions { combine, scale_scores: s.take_bool("scale_scores")?.unwrap_or(true) };
    std::mem::take(&mut ctx.settings).finish()?;

    let weights: EncoderWeights = match weights_path {
        Some(p) => load_weights(input_file(&p)?).map_err(|e| CliError::from(e).context(p.display()))?,
        None => {
            dims.validate()?;
            init_random(ctx.seed, dims)
        }
    };
    let records = manifest::read(input_file(&a.manifest)?)?;
    check_manifest_inputs(&records)?;
    let input_dim = weights.dims().input;
    let rows = ctx.par_map(&records, |r| {
        let audio = load_wav(&r.path)?;
        let fe = Frontend::for_rate(audio.sample_rate())?.with_n_ceps(input_dim);
        let feats = fe.features(&audio).map_err(|e| CliError::from(e).context(r.path.display()))?;
        if feats.mel_cepstra.nrows() == 0 {
            return Err(CliError::failed(format!("{}: shorter than one analysis frame", r.path.display())));
        }
        let e = embed(feats.mel_cepstra.view(), &weights, &opts)
            .map_err(|e| CliError::from(e).context(r.path.display()))?;
        Ok((r.utterance_id.clone(), e.with_labels(Some(r.speaker.clone()), Some(r.style))))
    })?;
    let mut staged = Staged::default();
    staged.text(&a.output, |w| Ok(write_embeddings_csv(w, &rows)?))?;
    staged.commit()
}

#[derive(Args, Debug)]
pub struct VoicingArgs {
    /// Input WAV files
    #[arg(long, value_name = "WAV", num_args = 1.., conflicts_with = "manifest")]
    input: Vec<PathBuf>,
    /// Corpus manifest
    #[arg(long, value_name = "CSV")]
    manifest: Option<PathBuf>,
    /// Output CSV [default: standard output]
    #[arg(long, value_name = "CSV")]
    output: Option<PathBuf>,
}

pub fn voicing_cmd(mut ctx: Ctx, a: VoicingArgs) -> CliResult<()> {
    std::mem::take(&mut ctx.settings).finish()?;
    let (mut header, rows): (Vec<&str>, Vec<(Vec<String>, PathBuf)>) = match &a.manifest {
        Some(m) => {
            let records = manifest::read(input_file(m)?)?;
            check_manifest_inputs(&records)?;
            let rows =
                records.into_iter().map(|r| (vec![r.speaker, r.style.to_string(), r.utterance_id], r.path)).collect();
            (vec!["speaker", "style", "utterance_id"], rows)
        }
        None if a.input.is_empty() => return Err(CliError::usage("give --input files or --manifest")),
        None => {
            for p in &a.input {
                input_file(p)?;
            }
            (vec!["path"], a.input.iter().map(|p| (vec![p.display().to_string()], p.clone())).collect())
        }
    };
    header.extend(["voicing", "unvoiced"]);
    let values = ctx.par_map(&rows, |(_, path)| {
        let audio = load_wav(path)?;
        voicing_ratio(&audio).map_err(|e| CliError::from(e).context(path.display()))
    })?;
    let write = |w: &mut dyn Write| -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CliError::failed(e.to_string());
        out.write_record(&header).map_err(io)?;
        for ((key, _), v) in rows.iter().zip(&values) {
            let mut rec = key.clone();
            rec.push(format!("{v:.4}"));
            rec.push((*v < UNVOICED_THRESHOLD).to_string());
            out.write_record(&rec).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    };
    match &a.output {
        Some(path) => {
            let mut staged = Staged::default();
            staged.text(path, write)?;
            staged.commit()
        }
        None => write(&mut std::io::stdout().lock()),
    }
}
