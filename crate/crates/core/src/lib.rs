//! Incremental nonlinear dimensionality reduction with a growing network of
//! coding vectors whose images form the embedding.
//!
//! ```
//! use song::{fit, HyperParams, SongModel};
//! use song::eval::{make_blobs, BlobSpec};
//!
//! let data = make_blobs(&BlobSpec { n_clusters: 3, dims: 5, points_per_cluster: 30, ..Default::default() })?;
//! let hyper = HyperParams { t_max: 20, ..Default::default() };
//! let mut model = SongModel::init_for(&data, 2, hyper)?;
//! let report = fit(&mut model, &data)?;
//! let embedding = model.transform(&data)?;
//! assert_eq!(embedding.dim(), (90, 2));
//! assert!(report.epochs_run <= 20);
//! # Ok::<(), song::SongError>(())
//! ```

pub mod data;
pub mod edges;
pub mod error;
pub mod eval;
pub mod growth;
pub mod hyper;
pub mod io;
pub mod layout;
pub mod model;
pub mod neighbors;
pub mod organize;
pub mod trainer;

pub use data::DataMatrix;
pub use edges::EdgeGraph;
pub use error::{Result, SongError};
pub use hyper::HyperParams;
pub use model::SongModel;
pub use neighbors::{nearest_coding_vectors, NeighborSet};
pub use trainer::{fit, fit_with_progress, partial_fit, partial_fit_with_progress, TrainReport};

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            mod $name {}
        };
    }
    chapter!(introduction, "introduction.md");
    chapter!(quickstart, "quickstart.md");
    chapter!(model, "concepts/model.md");
    chapter!(edges, "concepts/edges.md");
    chapter!(self_organization, "concepts/self-organization.md");
    chapter!(layout, "concepts/layout.md");
    chapter!(growth, "concepts/growth.md");
    chapter!(training, "concepts/training.md");
    chapter!(evaluation, "evaluation.md");
    chapter!(persistence, "persistence.md");
    chapter!(cli, "cli.md");

    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
