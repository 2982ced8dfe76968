//! Isotropic Gaussian blob generator.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::DataMatrix;
use crate::error::{Result, SongError};

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub n_clusters: usize,
    pub cluster_std: f64,
    pub dims: usize,
    pub points_per_cluster: usize,
    pub seed: u64,
    /// Centers are drawn uniformly from this interval in every dimension.
    pub center_box: (f64, f64),
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            n_clusters: 10,
            cluster_std: 1.0,
            dims: 60,
            points_per_cluster: 200,
            seed: 0,
            center_box: (-10.0, 10.0),
        }
    }
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SongError::InvalidHyper(m.to_string()));
        if self.n_clusters == 0 || self.dims == 0 || self.points_per_cluster == 0 {
            return bad("n_clusters, dims and points_per_cluster must be positive");
        }
        if !(self.cluster_std.is_finite() && self.cluster_std >= 0.0) {
            return bad("cluster_std must be finite and non-negative");
        }
        let (lo, hi) = self.center_box;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("center_box must be a finite interval");
        }
        Ok(())
    }
}

/// Generates the blobs and returns them together with their centers.
/// Points are grouped by cluster: rows `c * points_per_cluster ..` belong to
/// cluster `c`, which is also their label.
pub fn make_blobs_with_centers(spec: &BlobSpec) -> Result<(DataMatrix, Array2<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.center_box;
    let centers = Array2::from_shape_simple_fn((spec.n_clusters, spec.dims), || {
        if lo == hi { lo } else { rng.random_range(lo..hi) }
    });
    let n = spec.n_clusters * spec.points_per_cluster;
    let mut rows = Array2::zeros((n, spec.dims));
    let mut labels = Vec::with_capacity(n);
    for (i, mut row) in rows.rows_mut().into_iter().enumerate() {
        let c = i / spec.points_per_cluster;
        labels.push(c as i64);
        for (v, m) in row.iter_mut().zip(centers.row(c)) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = m + spec.cluster_std * z;
        }
    }
    Ok((DataMatrix::new(rows, Some(labels))?, centers))
}

pub fn make_blobs(spec: &BlobSpec) -> Result<DataMatrix> {
    Ok(make_blobs_with_centers(spec)?.0)
}
