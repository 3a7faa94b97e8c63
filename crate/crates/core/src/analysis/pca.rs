use std::io::Write;

use ndarray::{Array1, Array2, Axis};

use crate::csvout::write_matrix;
use crate::error::{Error, Result};

/// Principal axes of a data set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `k x d`, orthonormal rows. The largest-magnitude entry of each row is
    /// positive.
    pub components: Array2<f64>,
    /// Sample variance (`n - 1` denominator) along each component, sorted
    /// descending.
    pub explained_variance: Vec<f64>,
    /// Trace of the sample covariance.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| if self.total_variance > 0.0 { v / self.total_variance } else { 0.0 })
            .collect()
    }

    /// `(data - mean) . components^T`.
    pub fn project(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.mean.len() {
            return Err(Error::arg(format!("data has {} columns, model expects {}", data.ncols(), self.mean.len())));
        }
        Ok((data - &self.mean).dot(&self.components.t()))
    }
}

/// Fits `k` principal components by eigendecomposition of the sample
/// covariance.
pub fn pca_fit(data: &Array2<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(Error::arg("PCA needs at least two observations"));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::arg(format!("k = {k} out of range 1..={} for {n} x {d} data", n.min(d))));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("data contains non-finite values"));
    }
    let mean = data.mean_axis(Axis(0)).expect("n >= 2");
    let centered = data - &mean;
    let cov = centered.t().dot(&centered) / (n - 1) as f64;
    let total_variance = cov.diag().sum();

    let (values, vectors) = symmetric_eigen(&cov);
    let mut components = Array2::zeros((k, d));
    for i in 0..k {
        let mut v = vectors.column(i).to_owned();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.row_mut(i).assign(&v);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: values[..k].iter().map(|v| v.max(0.0)).collect(),
        total_variance,
    })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues in descending order and the matching eigenvectors as columns.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// CSV with `utterance_id,style,pc1..pck`.
pub fn write_projection_csv<W: Write>(w: W, ids: &[String], styles: &[String], projected: &Array2<f64>) -> Result<()> {
    let mut header = vec!["utterance_id".to_string(), "style".to_string()];
    header.extend((1..=projected.ncols()).map(|i| format!("pc{i}")));
    let rows = projected.outer_iter().enumerate().map(|(i, row)| {
        let mut r = vec![ids[i].clone(), styles[i].clone()];
        r.extend(row.iter().map(|v| v.to_string()));
        r
    });
    write_matrix(w, &header, rows)?;
    Ok(())
}
