use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`.
    Cosine,
}

impl Metric {
    pub fn distance(self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
            Metric::Cosine => {
                let (na, nb) = (a.dot(&a).sqrt(), b.dot(&b).sqrt());
                match (na > 0.0, nb > 0.0) {
                    (true, true) => 1.0 - (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0),
                    (false, false) => 0.0,
                    _ => 1.0,
                }
            }
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::arg(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    /// Mean silhouette over all points, in `[-1, 1]`.
    pub silhouette: f64,
    /// Per-point silhouette values in input order.
    pub samples: Vec<f64>,
    /// Distinct labels, sorted.
    pub labels: Vec<String>,
    /// Distance between every pair of label centroids (mean vectors).
    pub centroid_distances: Vec<(String, String, f64)>,
}

impl ClusterReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label_a,label_b,centroid_distance")?;
        for (a, b, d) in &self.centroid_distances {
            writeln!(w, "{a},{b},{d}")?;
        }
        writeln!(w, "silhouette,,{}", self.silhouette)?;
        Ok(())
    }
}

/// Mean silhouette coefficient `(b - a) / max(a, b)` where `a` is a point's
/// mean distance to its own cluster and `b` the smallest mean distance to
/// another cluster. Points alone in their cluster, and points with
/// `a = b = 0`, score 0.
pub fn silhouette<L: AsRef<str>>(points: &Array2<f64>, labels: &[L], metric: Metric) -> Result<ClusterReport> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::arg(format!("{} labels for {n} points", labels.len())));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::arg("silhouette needs at least two distinct labels"));
    }
    let names: Vec<&str> = groups.keys().copied().collect();
    let member: Vec<usize> = labels.iter().map(|l| names.binary_search(&l.as_ref()).expect("label indexed")).collect();

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut sums = vec![0.0; names.len()];
        for j in 0..n {
            if j != i {
                sums[member[j]] += metric.distance(points.row(i), points.row(j));
            }
        }
        let own = member[i];
        let own_size = groups[names[own]].len();
        if own_size == 1 {
            samples.push(0.0);
            continue;
        }
        let a = sums[own] / (own_size - 1) as f64;
        let b = (0..names.len())
            .filter(|&c| c != own)
            .map(|c| sums[c] / groups[names[c]].len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        samples.push(if denom > 0.0 { (b - a) / denom } else { 0.0 });
    }
    let score = (samples.iter().sum::<f64>() / n as f64).clamp(-1.0, 1.0);

    let centroids: Vec<Array1<f64>> = names
        .iter()
        .map(|name| {
            let idx = &groups[name];
            idx.iter().fold(Array1::zeros(points.ncols()), |acc, &i| acc + points.row(i)) / idx.len() as f64
        })
        .collect();
    let mut centroid_distances = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            centroid_distances.push((
                names[i].to_string(),
                names[j].to_string(),
                metric.distance(centroids[i].view(), centroids[j].view()),
            ));
        }
    }

    Ok(ClusterReport {
        silhouette: score,
        samples,
        labels: names.iter().map(|s| s.to_string()).collect(),
        centroid_distances,
    })
}
