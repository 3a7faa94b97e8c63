//! `centroids`, `pca` and `eval`.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ndarray::Array2;
use stylekit::analysis::{pca_fit, silhouette, write_projection_csv, Metric};
use stylekit::embedding::{read_embeddings_csv, style_centroid};
use stylekit::eval::{read_references, read_responses, EvalReport};
use stylekit::{Style, StyleEmbedding};

use crate::common::{input_file, Ctx};
use crate::error::{CliError, CliResult};
use crate::output::Staged;

fn read_embeddings(path: &Path) -> CliResult<Vec<(String, StyleEmbedding)>> {
    let file = File::open(input_file(path)?)?;
    read_embeddings_csv(file).map_err(|e| CliError::from(e).context(path.display()))
}

#[derive(Args, Debug)]
pub struct CentroidArgs {
    /// Embeddings CSV from `embed`
    #[arg(long, value_name = "CSV")]
    embeddings: PathBuf,
    /// Output CSV: speaker,style,n,e1..eN
    #[arg(long, value_name = "CSV")]
    output: PathBuf,
}

pub fn centroids_cmd(mut ctx: Ctx, a: CentroidArgs) -> CliResult<()> {
    std::mem::take(&mut ctx.settings).finish()?;
    let rows = read_embeddings(&a.embeddings)?;
    let mut groups: BTreeMap<(String, Style), Vec<StyleEmbedding>> = BTreeMap::new();
    for (id, e) in rows {
        let (Some(speaker), Some(style)) = (e.speaker.clone(), e.style) else {
            return Err(CliError::failed(format!("utterance `{id}` lacks a speaker or style label")));
        };
        groups.entry((speaker, style)).or_default().push(e);
    }
    let mut staged = Staged::default();
    staged.text(&a.output, |w| {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CliError::failed(e.to_string());
        let dim = groups.values().next().map_or(0, |g| g[0].dim());
        let mut header: Vec<String> = ["speaker", "style", "n"].map(String::from).to_vec();
        header.extend((1..=dim).map(|i| format!("e{i}")));
        out.write_record(&header).map_err(io)?;
        for ((speaker, style), members) in &groups {
            let c = style_centroid(members)?;
            let mut rec = vec![speaker.clone(), style.to_string(), members.len().to_string()];
            rec.extend(c.vector().iter().map(|v| v.to_string()));
            out.write_record(&rec).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    })?;
    staged.commit()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Args, Debug)]
pub struct PcaArgs {
    /// Embeddings CSV from `embed`
    #[arg(long, value_name = "CSV")]
    embeddings: PathBuf,
    /// Projection CSV: utterance_id,style,pc1..pcK
    #[arg(long, value_name = "CSV")]
    output: PathBuf,
    /// Number of principal components [default: 2]
    #[arg(long)]
    components: Option<usize>,
    /// Also write style centroid distances and the silhouette score here
    #[arg(long, value_name = "CSV")]
    report: Option<PathBuf>,
    /// Distance used for the cluster report [default: euclidean]
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
}

pub fn pca_cmd(mut ctx: Ctx, a: PcaArgs) -> CliResult<()> {
    let s = &mut ctx.settings;
    s.flag("components", a.components);
    s.flag("metric", a.metric.and_then(|m| m.to_possible_value()).map(|v| v.get_name().to_string()));
    let k: usize = s.take("components")?.unwrap_or(2);
    let metric = match s.take::<String>("metric")?.as_deref() {
        None | Some("euclidean") => Metric::Euclidean,
        Some("cosine") => Metric::Cosine,
        Some(v) => return Err(CliError::usage(format!("metric expects euclidean or cosine, got `{v}`"))),
    };
    std::mem::take(&mut ctx.settings).finish()?;

    let rows = read_embeddings(&a.embeddings)?;
    if rows.is_empty() {
        return Err(CliError::failed(format!("{}: no embeddings", a.embeddings.display())));
    }
    let dim = rows[0].1.dim();
    let data = Array2::from_shape_fn((rows.len(), dim), |(i, j)| rows[i].1.vector()[j]);
    let model = pca_fit(&data, k)?;
    let proj = model.project(&data)?;
    let ids: Vec<String> = rows.iter().map(|(id, _)| id.clone()).collect();
    let styles: Vec<String> = rows.iter().map(|(_, e)| e.style.map(|s| s.to_string()).unwrap_or_default()).collect();

    let mut staged = Staged::default();
    staged.text(&a.output, |w| Ok(write_projection_csv(w, &ids, &styles, &proj)?))?;
    let ratios: Vec<String> = model.explained_variance_ratio().iter().map(|r| format!("{r:.3}")).collect();
    println!("explained variance ratio: {}", ratios.join(" "));
    if let Some(path) = &a.report {
        let report = silhouette(&proj, &styles, metric)?;
        println!("silhouette ({metric:?}): {:.3}", report.silhouette);
        staged.text(path, |w| Ok(report.write_csv(w)?))?;
    }
    staged.commit()
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Responses CSV: listener_id,system,utterance_id,payload
    #[arg(long, value_name = "CSV")]
    responses: PathBuf,
    /// Reference transcripts CSV: utterance_id,text
    #[arg(long, value_name = "CSV")]
    references: Option<PathBuf>,
    /// Directory receiving ab.csv, mos.csv and wrr.csv
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

pub fn eval_cmd(mut ctx: Ctx, a: EvalArgs) -> CliResult<()> {
    std::mem::take(&mut ctx.settings).finish()?;
    let responses = read_responses(File::open(input_file(&a.responses)?)?)
        .map_err(|e| CliError::from(e).context(a.responses.display()))?;
    let references = match &a.references {
        Some(p) => read_references(File::open(input_file(p)?)?).map_err(|e| CliError::from(e).context(p.display()))?,
        None => Default::default(),
    };
    let report = EvalReport::from_responses(&responses, &references)?;
    let mut staged = Staged::default();
    staged.text(&a.out_dir.join("ab.csv"), |w| Ok(report.write_ab_csv(w)?))?;
    staged.text(&a.out_dir.join("mos.csv"), |w| Ok(report.write_mos_csv(w)?))?;
    staged.text(&a.out_dir.join("wrr.csv"), |w| Ok(report.write_wrr_csv(w)?))?;
    staged.commit()
}
