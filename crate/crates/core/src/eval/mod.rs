//! Evaluation utilities: clustering, agreement scores, stability, synthetic
//! data and linear dimensionality reduction.

pub mod ami;
pub mod blobs;
pub mod cdy;
pub mod kmeans;
pub mod pca;

pub use ami::adjusted_mutual_information;
pub use blobs::{make_blobs, make_blobs_with_centers, BlobSpec};
pub use cdy::{consecutive_displacement, Displacement};
pub use kmeans::{kmeans, kmeans_with_restarts, Clustering};
pub use pca::{fit_pca, pca_reduce, Projection};
