//! Self-organization of the coding vectors around a sample.
//!
//! The winner and its graph neighbors move toward the sample `x`, each by
//! `α (x − c) exp(−‖x − c‖² / σ²)` where `σ = ‖x − c_{i_k}‖` is frozen for
//! the step. This is the descent direction of the summand
//! `−(σ²/2) exp(−‖x − c‖² / σ²)` of the self-organization loss.

use ndarray::ArrayView1;

use crate::model::SongModel;
use crate::neighbors::{squared_distance, NeighborSet};

/// One summand of the self-organization loss for a single coding vector.
pub fn organization_loss_term(x: &[f64], c: &[f64], sigma_sq: f64) -> f64 {
    -0.5 * sigma_sq * (-squared_distance(x, c) / sigma_sq).exp()
}

/// The (unscaled) update `(x − c) exp(−‖x − c‖² / σ²)`.
pub fn organization_step(x: &[f64], c: &[f64], sigma_sq: f64) -> Vec<f64> {
    let w = (-squared_distance(x, c) / sigma_sq).exp();
    x.iter().zip(c).map(|(xi, ci)| (xi - ci) * w).collect()
}

/// Moves the winner and every `j` with `E_s(i_1, j) > 0` toward `x`.
/// Returns how many vectors were updated.
///
/// Each step depends only on `x` and the vector being moved, so the result
/// does not depend on neighbor order.
pub fn organize_coding_vectors(
    model: &mut SongModel,
    x: ArrayView1<'_, f64>,
    neighbors: &NeighborSet,
    alpha: f64,
) -> usize {
    let winner = neighbors.winner();
    let floor = model.hyper.dist_floor;
    let sigma_sq = neighbors.boundary_distance().powi(2).max(floor * floor);

    let mut movers = model.edges.neighbors(winner);
    if let Err(pos) = movers.binary_search(&winner) {
        movers.insert(pos, winner);
    }

    let x = x.as_slice().map_or_else(|| x.to_vec().into(), std::borrow::Cow::Borrowed);
    for &j in &movers {
        let mut c = model.coding_vectors.row_mut(j);
        let c = c.as_slice_mut().expect("rows are contiguous");
        let w = alpha * (-squared_distance(&x, c) / sigma_sq).exp();
        c.iter_mut().zip(x.iter()).for_each(|(ci, xi)| *ci += w * (xi - *ci));
    }
    movers.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::HyperParams;
    use crate::neighbors::nearest_coding_vectors;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model_with(c: ndarray::Array2<f64>) -> SongModel {
        let mut m = SongModel::init(c.ncols() + 1, 1, HyperParams { k: 2, ..Default::default() }, None).unwrap();
        let n = c.nrows();
        m.input_dim = c.ncols();
        m.coding_vectors = c;
        m.embedding = ndarray::Array2::zeros((n, 1));
        m.growth_error = vec![0.0; n];
        m.edges = crate::edges::EdgeGraph::new(n);
        m
    }

    #[test]
    fn coincident_vector_does_not_move() {
        assert_eq!(organization_step(&[1.0, 2.0], &[1.0, 2.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn winner_moves_by_kernel_fraction() {
        // sigma^2 = 1 and the winner sits at distance 1 from x.
        let mut m = model_with(array![[0.0, 0.0], [2.0, 0.0]]);
        let x = array![1.0, 0.0];
        let n = nearest_coding_vectors(&m.coding_vectors, x.view(), 2).unwrap();
        assert_eq!(n.boundary_distance(), 1.0);
        let moved = organize_coding_vectors(&mut m, x.view(), &n, 1.0);
        assert_eq!(moved, 1);
        // moves by e^{-1} of its offset, ending 1 - e^{-1} short of x
        let expected = (-1.0f64).exp();
        assert!((m.coding_vectors[[0, 0]] - expected).abs() < 1e-12);
        assert!((1.0 - m.coding_vectors[[0, 0]] - 0.632).abs() < 1e-3);
        assert_eq!(m.coding_vectors[[0, 1]], 0.0);
        assert_eq!(m.coding_vectors.row(1), array![2.0, 0.0]);
    }

    #[test]
    fn far_neighbor_moves_less() {
        let x = [0.0, 0.0];
        let near = organization_step(&x, &[1.0, 0.0], 1.0);
        let far = organization_step(&x, &[3.0, 0.0], 1.0);
        let factor = far[0] / -3.0;
        assert!((factor - (-9.0f64).exp()).abs() < 1e-15);
        assert!(factor < near[0] / -1.0);
    }

    #[test]
    fn graph_neighbors_move_too() {
        let mut m = model_with(array![[0.0], [1.0], [2.0]]);
        m.edges.set(0, 2, 1.0);
        let x = array![0.5];
        let n = nearest_coding_vectors(&m.coding_vectors, x.view(), 2).unwrap();
        assert_eq!(organize_coding_vectors(&mut m, x.view(), &n, 0.5), 2);
        assert!(m.coding_vectors[[2, 0]] < 2.0);
        assert_eq!(m.coding_vectors[[1, 0]], 1.0);
    }

    #[test]
    fn update_matches_numeric_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let sigma_sq = rng.random_range(0.5..4.0);
            let step = organization_step(&x, &c, sigma_sq);
            let numeric: Vec<f64> = (0..4)
                .map(|i| {
                    let (mut cp, mut cm) = (c.clone(), c.clone());
                    cp[i] += h;
                    cm[i] -= h;
                    -(organization_loss_term(&x, &cp, sigma_sq) - organization_loss_term(&x, &cm, sigma_sq))
                        / (2.0 * h)
                })
                .collect();
            let norm = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = step.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err / norm < 1e-5, "relative error {}", err / norm);
        }
    }

    #[test]
    fn repeated_presentation_contracts_to_sample() {
        let mut m = model_with(array![[0.0, 0.0], [5.0, 5.0]]);
        let x = array![1.0, 1.0];
        for _ in 0..50 {
            let n = nearest_coding_vectors(&m.coding_vectors, x.view(), 2).unwrap();
            organize_coding_vectors(&mut m, x.view(), &n, 0.5);
        }
        let d = squared_distance(&m.coding_vectors.row(0).to_vec(), &[1.0, 1.0]).sqrt();
        assert!(d < 1e-6, "distance {d}");
    }

    #[test]
    fn no_overshoot_with_unit_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sigma_sq = rng.random_range(0.01..2.0);
            let step = organization_step(&x, &c, sigma_sq);
            let moved: Vec<f64> = c.iter().zip(&step).map(|(a, s)| a + s).collect();
            // moved = c + t (x - c) with t in [0, 1]; t underflows to 0 far outside sigma
            let t = squared_distance(&moved, &c).sqrt() / squared_distance(&x, &c).sqrt();
            assert!((0.0..=1.0).contains(&t));
            assert!(squared_distance(&moved, &x) <= squared_distance(&c, &x));
        }
    }
}
