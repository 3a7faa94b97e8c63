//! Style-space analysis: PCA projection of embeddings, cluster separation
//! scores and the voicing statistic used to check whisper conversion.

mod cluster;
mod pca;
mod voicing;

pub use cluster::{silhouette, ClusterReport, Metric};
pub use pca::{pca_fit, symmetric_eigen, write_projection_csv, PcaModel};
pub use voicing::{voicing_ratio, voicing_ratio_in, DEFAULT_F0_RANGE, UNVOICED_THRESHOLD};
