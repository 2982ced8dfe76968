//! Principal component projection, fitted through a symmetric eigensolver on
//! the sample covariance.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};

use crate::data::DataMatrix;
use crate::error::{Result, SongError};

/// A fitted linear projection `(x − mean) · componentsᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    mean: Array1<f64>,
    /// One principal axis per row, by decreasing variance.
    components: Array2<f64>,
}

impl Projection {
    pub fn new(mean: Array1<f64>, components: Array2<f64>) -> Result<Self> {
        if components.ncols() != mean.len() {
            return Err(SongError::DimensionMismatch {
                expected: mean.len(),
                found: components.ncols(),
            });
        }
        Ok(Self { mean, components })
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn components(&self) -> &Array2<f64> {
        &self.components
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.nrows()
    }

    /// Projects raw data, keeping its labels.
    pub fn apply(&self, raw: &DataMatrix) -> Result<DataMatrix> {
        raw.check_dim(self.input_dim())?;
        let centered = raw.rows() - &self.mean;
        let projected = centered.dot(&self.components.t());
        DataMatrix::new(projected, raw.labels().map(<[i64]>::to_vec))
    }
}

/// Fits the leading `n_components` principal axes of `data`.
///
/// If the data has rank below `n_components` only the non-degenerate axes
/// are kept and a warning is logged.
pub fn fit_pca(data: &DataMatrix, n_components: usize) -> Result<Projection> {
    if data.len() < 2 {
        return Err(SongError::InvalidData("PCA needs at least two rows".into()));
    }
    if n_components == 0 || n_components > data.dim() {
        return Err(SongError::InvalidHyper(format!(
            "n_components = {n_components} must lie in 1..={}",
            data.dim()
        )));
    }
    let mean = data.rows().mean_axis(Axis(0)).expect("non-empty");
    let centered = data.rows() - &mean;
    let cov = centered.t().dot(&centered) / (data.len() - 1) as f64;
    let dim = cov.nrows();
    let eig = SymmetricEigen::new(DMatrix::from_fn(dim, dim, |i, j| cov[[i, j]]));

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let tol = top * dim as f64 * f64::EPSILON * 16.0;
    let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > tol).count();
    let kept = n_components.min(rank.max(1));
    if kept < n_components {
        log::warn!("data has rank {rank}; keeping {kept} of {n_components} requested components");
    }

    let mut components = Array2::zeros((kept, dim));
    for (r, &i) in order.iter().take(kept).enumerate() {
        let v = eig.eigenvectors.column(i);
        // sign convention: largest-magnitude entry positive
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (c, x) in v.iter().enumerate() {
            components[[r, c]] = sign * x;
        }
    }
    Projection::new(mean, components)
}

/// Fits a projection and applies it to the same data.
pub fn pca_reduce(data: &DataMatrix, n_components: usize) -> Result<(DataMatrix, Projection)> {
    let projection = fit_pca(data, n_components)?;
    Ok((projection.apply(data)?, projection))
}
