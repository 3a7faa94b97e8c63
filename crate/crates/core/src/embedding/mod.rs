//! Style encoder forward pass.
//!
//! Mel-cepstral frames go through a stack of LSTM layers. The last layer's
//! outputs `H` (L x D) are pooled by QKV self-attention: `O = softmax(Q Kᵀ /
//! √D) V`, then the column-wise max over time of `O`. The pooled context is
//! concatenated with the final hidden state, mapped affinely to the
//! embedding size and L2-normalised.
//!
//! There is no training here; weights are seeded or loaded from disk.

mod weights;

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::csvout::{csv_err, write_matrix};
use crate::error::{Error, Result};

pub use weights::{init_random, load_weights, save_weights};

/// The three speaking styles of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Style {
    Normal,
    Lombard,
    Whisper,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Normal, Style::Lombard, Style::Whisper];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::Normal => "normal",
            Style::Lombard => "lombard",
            Style::Whisper => "whisper",
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Style::Normal),
            "lombard" => Ok(Style::Lombard),
            "whisper" => Ok(Style::Whisper),
            other => Err(Error::arg(format!("unknown style `{other}` (expected normal, lombard or whisper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderDims {
    pub input: usize,
    /// LSTM width, also the attention width `D`.
    pub hidden: usize,
    pub embedding: usize,
    pub layers: usize,
}

impl EncoderDims {
    /// Small dims for tests and desk-scale runs.
    pub const DESK: EncoderDims = EncoderDims { input: 20, hidden: 64, embedding: 32, layers: 2 };

    /// Full-size encoder over `input`-dimensional frames.
    pub const fn paper(input: usize) -> Self {
        EncoderDims { input, hidden: 512, embedding: 128, layers: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.hidden == 0 || self.embedding == 0 || self.layers == 0 {
            return Err(Error::arg(format!("encoder dimensions must be positive: {self:?}")));
        }
        Ok(())
    }

    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input
        } else {
            self.hidden
        }
    }
}

impl Default for EncoderDims {
    fn default() -> Self {
        Self::DESK
    }
}

/// One LSTM layer. Gate rows are stacked in the order input, forget, cell,
/// output, so `w_ih` is `4H x in`, `w_hh` is `4H x H` and `bias` has `4H`
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Encoder parameters. Shapes are checked by [`EncoderWeights::validate`];
/// the forward functions check them again before use.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    pub lstm: Vec<LstmLayer>,
    /// `D x D` each; `Q = H W_q`.
    pub w_q: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
    /// `2D x E`.
    pub embed_weight: Array2<f64>,
    pub embed_bias: Array1<f64>,
}

impl EncoderWeights {
    /// All-zero parameters of the given shape.
    pub fn zeros(dims: EncoderDims) -> Self {
        let (h, e) = (dims.hidden, dims.embedding);
        EncoderWeights {
            lstm: (0..dims.layers)
                .map(|l| LstmLayer {
                    w_ih: Array2::zeros((4 * h, dims.layer_input(l))),
                    w_hh: Array2::zeros((4 * h, h)),
                    bias: Array1::zeros(4 * h),
                })
                .collect(),
            w_q: Array2::zeros((h, h)),
            w_k: Array2::zeros((h, h)),
            w_v: Array2::zeros((h, h)),
            embed_weight: Array2::zeros((2 * h, e)),
            embed_bias: Array1::zeros(e),
        }
    }

    /// Dimensions implied by the first layer and the embedding layer.
    pub fn dims(&self) -> EncoderDims {
        EncoderDims {
            input: self.lstm.first().map_or(0, |l| l.w_ih.ncols()),
            hidden: self.w_q.nrows(),
            embedding: self.embed_bias.len(),
            layers: self.lstm.len(),
        }
    }

    /// `(name, shape, values)` for every tensor in canonical order.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        self.shapes().into_iter().zip(self.flat_values()).map(|((name, shape), v)| (name, shape, v)).collect()
    }

    fn flat_values(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for l in &self.lstm {
            out.extend([l.w_ih.iter().copied().collect(), l.w_hh.iter().copied().collect(), l.bias.to_vec()]);
        }
        for m in [&self.w_q, &self.w_k, &self.w_v, &self.embed_weight] {
            out.push(m.iter().copied().collect());
        }
        out.push(self.embed_bias.to_vec());
        out
    }

    fn shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mat = |a: &Array2<f64>| vec![a.nrows(), a.ncols()];
        let mut out = Vec::new();
        for (i, l) in self.lstm.iter().enumerate() {
            out.push((format!("lstm.{i}.w_ih"), mat(&l.w_ih)));
            out.push((format!("lstm.{i}.w_hh"), mat(&l.w_hh)));
            out.push((format!("lstm.{i}.bias"), vec![l.bias.len()]));
        }
        out.push(("attn.w_q".into(), mat(&self.w_q)));
        out.push(("attn.w_k".into(), mat(&self.w_k)));
        out.push(("attn.w_v".into(), mat(&self.w_v)));
        out.push(("embed.weight".into(), mat(&self.embed_weight)));
        out.push(("embed.bias".into(), vec![self.embed_bias.len()]));
        out
    }

    /// Expected `(name, shape)` list for `dims`, in canonical order.
    pub fn layout(dims: EncoderDims) -> Vec<(String, Vec<usize>)> {
        let (h, e) = (dims.hidden, dims.embedding);
        let mut out = Vec::new();
        for l in 0..dims.layers {
            out.push((format!("lstm.{l}.w_ih"), vec![4 * h, dims.layer_input(l)]));
            out.push((format!("lstm.{l}.w_hh"), vec![4 * h, h]));
            out.push((format!("lstm.{l}.bias"), vec![4 * h]));
        }
        for name in ["attn.w_q", "attn.w_k", "attn.w_v"] {
            out.push((name.into(), vec![h, h]));
        }
        out.push(("embed.weight".into(), vec![2 * h, e]));
        out.push(("embed.bias".into(), vec![e]));
        out
    }

    fn check_shapes(&self) -> Result<()> {
        let dims = self.dims();
        dims.validate()?;
        for ((name, shape), (_, want)) in self.shapes().into_iter().zip(Self::layout(dims)) {
            if shape != want {
                return Err(Error::WeightFormat {
                    tensor: name,
                    reason: format!("shape {shape:?}, expected {want:?}"),
                });
            }
        }
        Ok(())
    }

    /// Shapes consistent with [`EncoderWeights::dims`] and all entries finite.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        for ((name, _), v) in self.shapes().into_iter().zip(self.flat_values()) {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::WeightFormat { tensor: name, reason: "non-finite entry".into() });
            }
        }
        Ok(())
    }
}

/// How the pooled context is combined with the LSTM output sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// Concatenate with the last time step's hidden state.
    #[default]
    FinalState,
    /// Concatenate with the time-averaged hidden state.
    MeanOverTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderOptions {
    /// Divide attention scores by `√D`.
    pub scale_scores: bool,
    pub combine: Combine,
}

impl Default for EncoderOptions {
    fn default() -> Self {
        Self { scale_scores: true, combine: Combine::FinalState }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Runs the LSTM stack over `features` (L x input) from a zero state and
/// returns the last layer's hidden states (L x H).
pub fn lstm_forward(features: ArrayView2<f64>, weights: &EncoderWeights) -> Result<Array2<f64>> {
    weights.check_shapes()?;
    let dims = weights.dims();
    if features.nrows() == 0 {
        return Err(Error::arg("feature sequence is empty"));
    }
    if features.ncols() != dims.input {
        return Err(Error::arg(format!(
            "feature dimension {} does not match encoder input {}",
            features.ncols(),
            dims.input
        )));
    }
    let h_dim = dims.hidden;
    let mut seq = features.to_owned();
    for layer in &weights.lstm {
        // input projections for all steps at once
        let xw = seq.dot(&layer.w_ih.t()) + &layer.bias;
        let mut out = Array2::zeros((seq.nrows(), h_dim));
        let mut h = Array1::<f64>::zeros(h_dim);
        let mut c = Array1::<f64>::zeros(h_dim);
        for t in 0..seq.nrows() {
            let z = &xw.row(t) + &layer.w_hh.dot(&h);
            for j in 0..h_dim {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h_dim + j]);
                let g = z[2 * h_dim + j].tanh();
                let o = sigmoid(z[3 * h_dim + j]);
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
            out.row_mut(t).assign(&h);
        }
        seq = out;
    }
    Ok(seq)
}

/// Numerically stable softmax of each row.
pub fn softmax_rows(mut s: Array2<f64>) -> Array2<f64> {
    for mut row in s.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let z = row.sum();
        row /= z;
    }
    s
}

/// Attention weights `softmax(Q Kᵀ / √D)` (L x L).
pub fn attention_weights(h: ArrayView2<f64>, weights: &EncoderWeights, scale_scores: bool) -> Array2<f64> {
    let q = h.dot(&weights.w_q);
    let k = h.dot(&weights.w_k);
    let mut s = q.dot(&k.t());
    if scale_scores {
        s /= (weights.w_q.ncols() as f64).sqrt();
    }
    softmax_rows(s)
}

/// Column-wise max over time of `softmax(Q Kᵀ / √D) V`.
pub fn attention_pool(h: ArrayView2<f64>, weights: &EncoderWeights, scale_scores: bool) -> Result<Array1<f64>> {
    weights.check_shapes()?;
    if h.nrows() == 0 || h.ncols() != weights.w_q.nrows() {
        return Err(Error::arg(format!(
            "hidden sequence is {}x{}, expected Lx{} with L >= 1",
            h.nrows(),
            h.ncols(),
            weights.w_q.nrows()
        )));
    }
    let a = attention_weights(h, weights, scale_scores);
    let o = a.dot(&h.dot(&weights.w_v));
    Ok(o.fold_axis(Axis(0), f64::NEG_INFINITY, |m, &v| m.max(v)))
}

/// Pre-normalisation embedding: `[context, h] W + b`.
pub fn embed_raw(features: ArrayView2<f64>, weights: &EncoderWeights, options: &EncoderOptions) -> Result<Array1<f64>> {
    let h = lstm_forward(features, weights)?;
    let context = attention_pool(h.view(), weights, options.scale_scores)?;
    let summary = match options.combine {
        Combine::FinalState => h.row(h.nrows() - 1).to_owned(),
        Combine::MeanOverTime => h.mean_axis(Axis(0)).expect("L >= 1"),
    };
    let mut joined = Array1::zeros(2 * summary.len());
    joined.slice_mut(s![..summary.len()]).assign(&context);
    joined.slice_mut(s![summary.len()..]).assign(&summary);
    Ok(joined.dot(&weights.embed_weight) + &weights.embed_bias)
}

/// Unit-norm style embedding of one utterance's feature frames.
pub fn embed(features: ArrayView2<f64>, weights: &EncoderWeights, options: &EncoderOptions) -> Result<StyleEmbedding> {
    StyleEmbedding::from_vector(embed_raw(features, weights, options)?)
}

/// A unit-length embedding with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleEmbedding {
    vector: Array1<f64>,
    pub speaker: Option<String>,
    pub style: Option<Style>,
}

impl StyleEmbedding {
    /// Normalises `v`; fails on zero or non-finite vectors.
    pub fn from_vector(v: Array1<f64>) -> Result<Self> {
        let norm = v.dot(&v).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalise a vector of norm {norm}")));
        }
        Ok(StyleEmbedding { vector: v / norm, speaker: None, style: None })
    }

    pub fn with_labels(mut self, speaker: Option<String>, style: Option<Style>) -> Self {
        self.speaker = speaker;
        self.style = style;
        self
    }

    pub fn vector(&self) -> &Array1<f64> {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &StyleEmbedding, b: &StyleEmbedding) -> f64 {
    a.vector.dot(&b.vector).clamp(-1.0, 1.0)
}

/// Normalised mean of embeddings sharing one style label. The speaker label
/// is kept when it is common to all inputs.
pub fn style_centroid(embeddings: &[StyleEmbedding]) -> Result<StyleEmbedding> {
    let first = embeddings.first().ok_or_else(|| Error::arg("centroid of an empty set"))?;
    let mut sum = Array1::zeros(first.dim());
    for e in embeddings {
        if e.style != first.style {
            return Err(Error::arg(format!("mixed style labels in centroid: {:?} and {:?}", first.style, e.style)));
        }
        if e.dim() != first.dim() {
            return Err(Error::arg("embeddings differ in dimension"));
        }
        sum += &e.vector;
    }
    let speaker = first.speaker.clone().filter(|s| embeddings.iter().all(|e| e.speaker.as_deref() == Some(s)));
    Ok(StyleEmbedding::from_vector(sum / embeddings.len() as f64)?.with_labels(speaker, first.style))
}

/// CSV with `utterance_id,speaker,style,e1..eN`.
pub fn write_embeddings_csv<W: Write>(w: W, rows: &[(String, StyleEmbedding)]) -> Result<()> {
    let dim = rows.first().map_or(0, |(_, e)| e.dim());
    let mut header: Vec<String> = ["utterance_id", "speaker", "style"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=dim).map(|i| format!("e{i}")));
    let records = rows.iter().map(|(id, e)| {
        let mut r =
            vec![id.clone(), e.speaker.clone().unwrap_or_default(), e.style.map(|s| s.to_string()).unwrap_or_default()];
        r.extend(e.vector.iter().map(|v| v.to_string()));
        r
    });
    write_matrix(w, &header, records)?;
    Ok(())
}

/// Reads the layout written by [`write_embeddings_csv`]. Vectors are
/// renormalised; `(speaker, style, utterance_id)` must be unique.
pub fn read_embeddings_csv<R: Read>(r: R) -> Result<Vec<(String, StyleEmbedding)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    let dim = header.len().saturating_sub(3);
    let expected =
        ["utterance_id", "speaker", "style"].into_iter().map(String::from).chain((1..=dim).map(|i| format!("e{i}")));
    if dim == 0 || !header.iter().eq(expected) {
        return Err(Error::Format("embeddings header must be `utterance_id,speaker,style,e1..eN`".into()));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: String| Error::Format(format!("line {line}: {m}"));
        let speaker = Some(rec[1].to_string()).filter(|s| !s.is_empty());
        let style = match &rec[2] {
            "" => None,
            s => Some(s.parse::<Style>().map_err(|e| bad(e.to_string()))?),
        };
        if !seen.insert((rec[1].to_string(), style, rec[0].to_string())) {
            return Err(bad(format!("duplicate entry for utterance `{}`", &rec[0])));
        }
        let values = (3..rec.len())
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("bad value `{}`", &rec[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        let e = StyleEmbedding::from_vector(Array1::from(values)).map_err(|e| bad(e.to_string()))?;
        out.push((rec[0].to_string(), e.with_labels(speaker, style)));
    }
    Ok(out)
}
