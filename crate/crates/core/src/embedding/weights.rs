//! Seeded initialisation and the on-disk weight format.
//!
//! A weight file is a UTF-8 descriptor plus a blob of little-endian `f32`:
//!
//! ```text
//! stylekit-encoder 1
//! blob encoder.bin
//! lstm.0.w_ih 256x20 0
//! lstm.0.w_hh 256x64 20480
//! ...
//! ```
//!
//! Each tensor record is `name shape byte_offset`, fields separated by
//! whitespace, shapes written `AxB` (or `A` for vectors). Tensors are
//! stored row-major. The blob path is relative to the descriptor.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::distr::{Distribution, Uniform};

use super::{EncoderDims, EncoderWeights};
use crate::error::{Error, Result};
use crate::signals::seeded_rng;

const MAGIC: &str = "stylekit-encoder 1";

/// Uniform `±1/√fan_in` weights, rounded to `f32` so that a save/load
/// round trip is exact.
pub fn init_random(seed: u64, dims: EncoderDims) -> EncoderWeights {
    let mut rng = seeded_rng(seed);
    let mut draw = |n: usize, fan_in: usize| -> Vec<f64> {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let u = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        (0..n).map(|_| u.sample(&mut rng) as f32 as f64).collect()
    };
    let mut w = EncoderWeights::zeros(dims);
    let h = dims.hidden;
    for layer in &mut w.lstm {
        let fan_in = layer.w_ih.ncols();
        layer.w_ih = Array2::from_shape_vec(layer.w_ih.raw_dim(), draw(layer.w_ih.len(), fan_in)).unwrap();
        layer.w_hh = Array2::from_shape_vec(layer.w_hh.raw_dim(), draw(layer.w_hh.len(), h)).unwrap();
        layer.bias = Array1::from(draw(layer.bias.len(), h));
    }
    for m in [&mut w.w_q, &mut w.w_k, &mut w.w_v] {
        *m = Array2::from_shape_vec(m.raw_dim(), draw(m.len(), h)).unwrap();
    }
    w.embed_weight = Array2::from_shape_vec(w.embed_weight.raw_dim(), draw(w.embed_weight.len(), 2 * h)).unwrap();
    w.embed_bias = Array1::from(draw(dims.embedding, 2 * h));
    w
}

fn blob_path(descriptor: &Path) -> PathBuf {
    descriptor.with_extension("bin")
}

fn shape_string(shape: &[usize]) -> String {
    shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

/// Writes `descriptor` and a sibling `.bin` blob. Values are stored as
/// `f32`.
pub fn save_weights(weights: &EncoderWeights, descriptor: impl AsRef<Path>) -> Result<()> {
    weights.validate()?;
    let descriptor = descriptor.as_ref();
    let blob = blob_path(descriptor);
    let blob_name = blob
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::arg(format!("unusable weight path {}", descriptor.display())))?;
    if blob == descriptor {
        return Err(Error::arg("weight descriptor must not use the .bin extension"));
    }
    let mut text = format!("{MAGIC}\nblob {blob_name}\n");
    let mut bytes = Vec::new();
    for (name, shape, values) in weights.tensors() {
        text.push_str(&format!("{name} {} {}\n", shape_string(&shape), bytes.len()));
        for v in values {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(&blob, bytes)?;
    fs::write(descriptor, text)?;
    Ok(())
}

struct Record {
    shape: Vec<usize>,
    offset: usize,
}

fn format_err(tensor: &str, reason: impl Into<String>) -> Error {
    Error::WeightFormat { tensor: tensor.to_string(), reason: reason.into() }
}

fn parse_descriptor(text: &str) -> Result<(String, Vec<(String, Record)>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(Error::Format(format!("weight descriptor must start with `{MAGIC}`")));
    }
    let blob = match lines.next().map(|l| l.split_whitespace().collect::<Vec<_>>()) {
        Some(f) if f.len() == 2 && f[0] == "blob" => f[1].to_string(),
        _ => return Err(Error::Format("missing `blob <file>` line".into())),
    };
    let mut records = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let name = fields.first().copied().unwrap_or("");
        if fields.len() != 3 {
            return Err(format_err(name, format!("expected `name shape offset`, got `{line}`")));
        }
        let shape = fields[1]
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| format_err(name, format!("bad shape `{}`", fields[1])))?;
        let offset = fields[2].parse().map_err(|_| format_err(name, format!("bad offset `{}`", fields[2])))?;
        records.push((name.to_string(), Record { shape, offset }));
    }
    Ok((blob, records))
}

/// Reads a descriptor and its blob. Every problem is reported against the
/// tensor it concerns.
pub fn load_weights(descriptor: impl AsRef<Path>) -> Result<EncoderWeights> {
    let descriptor = descriptor.as_ref();
    let (blob_name, records) = parse_descriptor(&fs::read_to_string(descriptor)?)?;
    let blob = fs::read(descriptor.parent().unwrap_or(Path::new("")).join(blob_name))?;

    let mut by_name: HashMap<&str, &Record> = HashMap::new();
    for (name, r) in &records {
        if by_name.insert(name, r).is_some() {
            return Err(format_err(name, "duplicate tensor"));
        }
    }
    let dim_of = |name: &str, axis: usize| -> Result<usize> {
        by_name.get(name).and_then(|r| r.shape.get(axis).copied()).ok_or_else(|| format_err(name, "missing tensor"))
    };
    let layers = (0..).take_while(|l| by_name.contains_key(format!("lstm.{l}.w_ih").as_str())).count();
    let dims = EncoderDims {
        input: dim_of("lstm.0.w_ih", 1)?,
        hidden: dim_of("attn.w_q", 0)?,
        embedding: dim_of("embed.bias", 0)?,
        layers,
    };
    dims.validate()?;

    let layout = EncoderWeights::layout(dims);
    if let Some((extra, _)) = records.iter().find(|(n, _)| !layout.iter().any(|(m, _)| m == n)) {
        return Err(format_err(extra, "unexpected tensor"));
    }
    let mut values: HashMap<String, Vec<f64>> = HashMap::new();
    for (name, want) in &layout {
        let r = by_name.get(name.as_str()).ok_or_else(|| format_err(name, "missing tensor"))?;
        if &r.shape != want {
            return Err(format_err(
                name,
                format!("declared shape {} but expected {}", shape_string(&r.shape), shape_string(want)),
            ));
        }
        let n: usize = want.iter().product();
        let end = r.offset + 4 * n;
        let bytes = blob.get(r.offset..end).ok_or_else(|| {
            format_err(name, format!("bytes {}..{end} past end of {}-byte blob", r.offset, blob.len()))
        })?;
        let v: Vec<f64> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format_err(name, "non-finite entry"));
        }
        values.insert(name.clone(), v);
    }

    let mut take2 = |name: &str, shape: (usize, usize)| {
        Array2::from_shape_vec(shape, values.remove(name).expect("checked")).expect("checked")
    };
    let h = dims.hidden;
    let mut w = EncoderWeights::zeros(dims);
    for l in 0..dims.layers {
        w.lstm[l].w_ih = take2(&format!("lstm.{l}.w_ih"), (4 * h, dims.layer_input(l)));
        w.lstm[l].w_hh = take2(&format!("lstm.{l}.w_hh"), (4 * h, h));
    }
    w.w_q = take2("attn.w_q", (h, h));
    w.w_k = take2("attn.w_k", (h, h));
    w.w_v = take2("attn.w_v", (h, h));
    w.embed_weight = take2("embed.weight", (2 * h, dims.embedding));
    for l in 0..dims.layers {
        w.lstm[l].bias = Array1::from(values.remove(&format!("lstm.{l}.bias")).expect("checked"));
    }
    w.embed_bias = Array1::from(values.remove("embed.bias").expect("checked"));
    Ok(w)
}
