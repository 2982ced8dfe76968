//! Growth: per-vector error accumulation and insertion of new coding vectors
//! (with their embedding images) where the error runs high.

use ndarray::{Array1, ArrayView1};

use crate::model::SongModel;
use crate::neighbors::NeighborSet;

/// `G_{i1} += dist`; returns the new value.
pub fn accumulate_growth(model: &mut SongModel, i1: usize, dist: f64) -> f64 {
    debug_assert!(dist >= 0.0);
    model.growth_error[i1] += dist;
    model.growth_error[i1]
}

/// Result of a growth attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthOutcome {
    Grown(usize),
    /// The model is at its growth capacity.
    AtCapacity,
}

/// Inserts a coding vector at the centroid of the `k` nearest ones (and
/// optionally `x`), with its image at the centroid of their images.
///
/// The new node receives edges of strength 1 from every member of the
/// neighbor set and to every current graph neighbor of the winner. The
/// winner's growth error is reset. Nothing happens once the model is at
/// [`SongModel::growth_capacity`].
pub fn grow(model: &mut SongModel, x: ArrayView1<'_, f64>, neighbors: &NeighborSet) -> GrowthOutcome {
    if model.len() >= model.growth_capacity() {
        return GrowthOutcome::AtCapacity;
    }
    let winner = neighbors.winner();
    let members = neighbors.indices();

    let mut c_new = Array1::<f64>::zeros(model.input_dim);
    let mut y_new = Array1::<f64>::zeros(model.output_dim);
    for &i in members {
        c_new += &model.coding_vectors.row(i);
        y_new += &model.embedding.row(i);
    }
    if model.hyper.centroid_with_input {
        c_new += &x;
        c_new /= (members.len() + 1) as f64;
    } else {
        c_new /= members.len() as f64;
    }
    y_new /= members.len() as f64;

    let winner_neighbors = model.edges.neighbors(winner);
    model
        .coding_vectors
        .push_row(c_new.view())
        .expect("coding vector width");
    model.embedding.push_row(y_new.view()).expect("embedding width");
    model.growth_error.push(0.0);
    let new = model.edges.add_node();

    for &i in members {
        model.edges.set(i, new, 1.0);
    }
    for j in winner_neighbors {
        model.edges.set(new, j, 1.0);
    }
    model.growth_error[winner] = 0.0;
    GrowthOutcome::Grown(new)
}
