//! The parametric state: coding vectors, their edges, their images in the
//! embedding, and the per-vector growth error.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;
use crate::edges::EdgeGraph;
use crate::error::{Result, SongError};
use crate::eval::pca::Projection;
use crate::hyper::{HyperParams, MIN_GROWTH_CAPACITY};
use crate::neighbors::{nearest_coding_vectors, squared_distance};

/// A trained (or freshly initialized) model.
///
/// Row `i` of `coding_vectors`, row `i` of `embedding` and `growth_error[i]`
/// always describe the same node; all three grow together.
#[derive(Debug, Clone, PartialEq)]
pub struct SongModel {
    pub(crate) coding_vectors: Array2<f64>,
    pub(crate) edges: EdgeGraph,
    pub(crate) embedding: Array2<f64>,
    pub(crate) growth_error: Vec<f64>,
    pub(crate) input_dim: usize,
    pub(crate) output_dim: usize,
    pub(crate) hyper: HyperParams,
    /// Growth threshold in effect; `None` until resolved by the first epoch.
    pub(crate) theta_g: Option<f64>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) epoch: usize,
    /// Data retained for replay during incremental training.
    pub(crate) reference: Option<Array2<f64>>,
    /// Input projection applied to raw data before it reaches the model.
    pub(crate) projection: Option<Projection>,
}

impl SongModel {
    /// Places `d + 1` coding vectors uniformly inside `data_bounds` (or the
    /// unit cube) and their images uniformly in `[-1, 1]^d`, with no edges.
    pub fn init(
        input_dim: usize,
        output_dim: usize,
        hyper: HyperParams,
        data_bounds: Option<&[(f64, f64)]>,
    ) -> Result<Self> {
        if output_dim == 0 || output_dim >= input_dim {
            return Err(SongError::InvalidHyper(format!(
                "output_dim = {output_dim} must satisfy 0 < output_dim < input_dim = {input_dim}"
            )));
        }
        hyper.validate(output_dim)?;
        if let Some(b) = data_bounds {
            if b.len() != input_dim {
                return Err(SongError::DimensionMismatch {
                    expected: input_dim,
                    found: b.len(),
                });
            }
            if b.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
                return Err(SongError::InvalidData("malformed data bounds".into()));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let n = output_dim + 1;
        let coding_vectors = Array2::from_shape_fn((n, input_dim), |(_, j)| {
            let (lo, hi) = data_bounds.map_or((0.0, 1.0), |b| b[j]);
            lo + (hi - lo) * rng.random::<f64>()
        });
        let embedding = Array2::from_shape_fn((n, output_dim), |_| rng.random_range(-1.0..=1.0));

        Ok(Self {
            coding_vectors,
            edges: EdgeGraph::new(n),
            embedding,
            growth_error: vec![0.0; n],
            input_dim,
            output_dim,
            theta_g: hyper.theta_g,
            hyper,
            rng,
            epoch: 0,
            reference: None,
            projection: None,
        })
    }

    /// [`SongModel::init`] with bounds taken from the first data batch.
    pub fn init_for(data: &DataMatrix, output_dim: usize, hyper: HyperParams) -> Result<Self> {
        let bounds = data.bounds();
        Self::init(data.dim(), output_dim, hyper, bounds.as_deref())
    }

    pub fn coding_vectors(&self) -> &Array2<f64> {
        &self.coding_vectors
    }

    pub fn embedding(&self) -> &Array2<f64> {
        &self.embedding
    }

    pub fn edges(&self) -> &EdgeGraph {
        &self.edges
    }

    pub fn growth_error(&self) -> &[f64] {
        &self.growth_error
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    /// Mutable access for settings that may change between sessions
    /// (epochs, learning rate, replay policy). The shape-defining fields are
    /// validated again before the next training call.
    pub fn hyper_mut(&mut self) -> &mut HyperParams {
        &mut self.hyper
    }

    pub fn theta_g(&self) -> Option<f64> {
        self.theta_g
    }

    /// Epochs completed by the most recent training call.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Number of coding vectors, `|C|`.
    pub fn len(&self) -> usize {
        self.coding_vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reference(&self) -> Option<&Array2<f64>> {
        self.reference.as_ref()
    }

    pub fn projection(&self) -> Option<&Projection> {
        self.projection.as_ref()
    }

    pub fn set_projection(&mut self, projection: Option<Projection>) -> Result<()> {
        if let Some(p) = &projection {
            if p.output_dim() != self.input_dim {
                return Err(SongError::DimensionMismatch {
                    expected: self.input_dim,
                    found: p.output_dim(),
                });
            }
        }
        self.projection = projection;
        Ok(())
    }

    /// Number of coding vectors growth may reach: `coding_vector_ratio` times
    /// the retained data size (at least [`MIN_GROWTH_CAPACITY`]), bounded by
    /// `max_coding_vectors`. Without retained data only the hard cap applies.
    pub fn growth_capacity(&self) -> usize {
        let hard = self.hyper.max_coding_vectors;
        match &self.reference {
            Some(r) => {
                let relative = (self.hyper.coding_vector_ratio * r.nrows() as f64).ceil();
                let relative = if relative.is_finite() { relative as usize } else { usize::MAX };
                relative.max(MIN_GROWTH_CAPACITY).min(hard)
            }
            None => hard,
        }
    }

    /// Applies the stored projection (if any) to raw data.
    pub fn prepare_input(&self, raw: &DataMatrix) -> Result<DataMatrix> {
        match &self.projection {
            Some(p) => p.apply(raw),
            None => {
                raw.check_dim(self.input_dim)?;
                Ok(raw.clone())
            }
        }
    }

    /// Index of the coding vector nearest to each point.
    pub fn winners(&self, points: &DataMatrix) -> Result<Vec<usize>> {
        points.check_dim(self.input_dim)?;
        points
            .rows()
            .rows()
            .into_iter()
            .map(|x| nearest_coding_vectors(&self.coding_vectors, x, 1).map(|n| n.winner()))
            .collect()
    }

    /// Maps each point to the embedding row of its nearest coding vector.
    pub fn transform(&self, points: &DataMatrix) -> Result<Array2<f64>> {
        let winners = self.winners(points)?;
        Ok(self.embedding.select(Axis(0), &winners))
    }

    /// Mean of `½‖x − c_{i_1}‖²` over `points`.
    pub fn quantization_error(&self, points: &DataMatrix) -> Result<f64> {
        if points.is_empty() {
            return Err(SongError::EmptyData);
        }
        let winners = self.winners(points)?;
        let total: f64 = winners
            .iter()
            .zip(points.rows().rows())
            .map(|(&w, x)| {
                let c = self.coding_vectors.row(w);
                0.5 * squared_distance(&x.to_vec(), &c.to_vec())
            })
            .sum();
        Ok(total / points.len() as f64)
    }

    /// Verifies the structural invariants; used after loading and in tests.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.coding_vectors.nrows();
        let broken = |msg: String| Err(SongError::Format(msg));
        if self.coding_vectors.ncols() != self.input_dim || self.embedding.ncols() != self.output_dim {
            return broken("array widths disagree with declared dimensions".into());
        }
        if self.embedding.nrows() != n || self.growth_error.len() != n || self.edges.len() != n {
            return broken(format!(
                "node counts disagree: C={n}, Y={}, G={}, E={}",
                self.embedding.nrows(),
                self.growth_error.len(),
                self.edges.len()
            ));
        }
        if n < self.output_dim + 1 {
            return broken(format!("only {n} coding vectors"));
        }
        for i in 0..n {
            for &(j, v) in self.edges.outgoing(i) {
                if j >= n || j == i || !(v > 0.0 && v <= 1.0) {
                    return broken(format!("bad edge {i} -> {j} = {v}"));
                }
            }
        }
        self.check_finite()?;
        if self.growth_error.iter().any(|&g| g < 0.0) {
            return broken("negative growth error".into());
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if !self.coding_vectors.iter().all(|v| v.is_finite()) {
            return Err(SongError::NonFiniteState("coding vectors".into()));
        }
        if !self.embedding.iter().all(|v| v.is_finite()) {
            return Err(SongError::NonFiniteState("embedding".into()));
        }
        if !self.growth_error.iter().all(|v| v.is_finite()) {
            return Err(SongError::NonFiniteState("growth error".into()));
        }
        Ok(())
    }
}
