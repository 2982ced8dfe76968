//! Exact k-nearest coding vector search.
//!
//! The coding vectors move on every training step, so a spatial index would
//! be rebuilt constantly; a linear scan over the (small) codebook is used.

use ndarray::{Array2, ArrayView1};

use crate::error::{Result, SongError};

/// Ordered indices `i_1..i_k` of the nearest coding vectors and their
/// Euclidean distances, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborSet {
    /// # Panics
    /// If the sequences are empty, differ in length, or distances decrease.
    pub fn new(indices: Vec<usize>, distances: Vec<f64>) -> Self {
        assert!(!indices.is_empty(), "empty neighbor set");
        assert_eq!(indices.len(), distances.len());
        assert!(distances.windows(2).all(|w| w[0] <= w[1]), "distances not sorted");
        Self { indices, distances }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `i_1`.
    pub fn winner(&self) -> usize {
        self.indices[0]
    }

    /// `‖x − c_{i_1}‖`.
    pub fn winner_distance(&self) -> f64 {
        self.distances[0]
    }

    /// `‖x − c_{i_k}‖`, the farthest member.
    pub fn boundary_distance(&self) -> f64 {
        *self.distances.last().unwrap()
    }
}

/// Squared Euclidean distance with four independent accumulators so the
/// loop vectorizes.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| (x - y) * (x - y)).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// The `min(k, |C|)` coding vectors nearest to `x`, ascending by distance,
/// ties broken by lower index.
pub fn nearest_coding_vectors(
    coding_vectors: &Array2<f64>,
    x: ArrayView1<'_, f64>,
    k: usize,
) -> Result<NeighborSet> {
    if x.len() != coding_vectors.ncols() {
        return Err(SongError::DimensionMismatch {
            expected: coding_vectors.ncols(),
            found: x.len(),
        });
    }
    if k == 0 {
        return Err(SongError::InvalidHyper("k must be positive".into()));
    }
    let x = x.to_vec();
    let k = k.min(coding_vectors.nrows());
    // (squared distance, index), kept sorted; insertion after equal keys
    // preserves the lower index first.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (idx, c) in coding_vectors.rows().into_iter().enumerate() {
        let d2 = match c.as_slice() {
            Some(s) => squared_distance(s, &x),
            None => squared_distance(&c.to_vec(), &x),
        };
        if best.len() == k && d2 >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(d, _)| d <= d2);
        best.insert(pos, (d2, idx));
        best.truncate(k);
    }
    let (distances, indices) = best.into_iter().map(|(d2, i)| (d2.sqrt(), i)).unzip();
    Ok(NeighborSet::new(indices, distances))
}
