//! Training hyperparameters.

use crate::error::{Result, SongError};

/// Smallest growth capacity derived from `coding_vector_ratio`.
pub const MIN_GROWTH_CAPACITY: usize = 16;

/// Every tunable of the algorithm.
///
/// Defaults reproduce the published configuration (`k`, `t_max`, `alpha_0`,
/// `a`, `b`); the remaining values are not published and were chosen for
/// this implementation.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Neighborhood size: how many nearest coding vectors form `I^(k)`.
    pub k: usize,
    /// Maximum number of epochs per `fit` / `partial_fit` call.
    pub t_max: usize,
    /// Initial learning rate, decayed linearly to zero over `t_max` epochs.
    pub alpha_0: f64,
    /// Output kernel coefficient.
    pub a: f64,
    /// Output kernel exponent.
    pub b: f64,
    /// Multiplier applied to unrenewed outgoing edges of the winner. Edges
    /// left unrenewed for `log(e_min) / log(epsilon_decay)` wins are pruned.
    pub epsilon_decay: f64,
    /// Edges decayed below this strength are removed.
    pub e_min: f64,
    /// Growth threshold. `None` resolves it from the data during the first
    /// epoch as `theta_g_factor` times the mean winner distance.
    pub theta_g: Option<f64>,
    pub theta_g_factor: f64,
    /// Negative samples drawn per positive edge of the winner.
    pub neg_rate: usize,
    /// Lower clamp on embedding distances inside the layout gradients.
    pub dist_floor: f64,
    /// Upper bound on the length of a single embedding displacement.
    /// `f64::INFINITY` disables the bound.
    pub max_step: f64,
    /// Hard cap on the number of coding vectors.
    pub max_coding_vectors: usize,
    /// Growth stops once the model holds this many coding vectors per
    /// retained data point (never fewer than [`MIN_GROWTH_CAPACITY`]).
    pub coding_vector_ratio: f64,
    /// Include the sample itself in the centroid that places a new vector.
    pub centroid_with_input: bool,
    /// `partial_fit` replays previously seen data together with the increment.
    pub replay_reference: bool,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            k: 3,
            t_max: 100,
            alpha_0: 1.0,
            a: 1.577,
            b: 0.895,
            epsilon_decay: 0.8,
            e_min: 0.01,
            theta_g: None,
            theta_g_factor: 5.0,
            neg_rate: 1,
            dist_floor: 1e-3,
            max_step: 4.0,
            max_coding_vectors: 4096,
            coding_vector_ratio: 0.1,
            centroid_with_input: false,
            replay_reference: true,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks every field, given the embedding dimension the model will use.
    pub fn validate(&self, output_dim: usize) -> Result<()> {
        let bad = |msg: String| Err(SongError::InvalidHyper(msg));
        if self.k < output_dim + 1 {
            return bad(format!(
                "k = {} must be at least output_dim + 1 = {}",
                self.k,
                output_dim + 1
            ));
        }
        if self.t_max == 0 {
            return bad("t_max must be positive".into());
        }
        for (name, v) in [
            ("alpha_0", self.alpha_0),
            ("a", self.a),
            ("b", self.b),
            ("theta_g_factor", self.theta_g_factor),
            ("dist_floor", self.dist_floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be positive and finite"));
            }
        }
        for (name, v) in [("max_step", self.max_step), ("coding_vector_ratio", self.coding_vector_ratio)] {
            if v.is_nan() || v <= 0.0 {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if let Some(t) = self.theta_g {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("theta_g = {t} must be positive and finite"));
            }
        }
        for (name, v) in [("epsilon_decay", self.epsilon_decay), ("e_min", self.e_min)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if self.neg_rate == 0 {
            return bad("neg_rate must be positive".into());
        }
        if self.max_coding_vectors < output_dim + 1 {
            return bad(format!(
                "max_coding_vectors = {} cannot hold the initial {} vectors",
                self.max_coding_vectors,
                output_dim + 1
            ));
        }
        Ok(())
    }

    /// Learning rate at `epoch`: `alpha_0 * (1 - epoch / t_max)`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.alpha_0 * (1.0 - epoch as f64 / self.t_max as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_for_2d() {
        HyperParams::default().validate(2).unwrap();
    }

    #[test]
    fn k_below_output_dim_plus_one_rejected() {
        let h = HyperParams {
            k: 3,
            ..Default::default()
        };
        assert!(h.validate(3).is_err());
        assert!(h.validate(2).is_ok());
    }

    #[test]
    fn decay_outside_unit_interval_rejected() {
        for eps in [0.0, 1.0, 1.5] {
            let h = HyperParams {
                epsilon_decay: eps,
                ..Default::default()
            };
            assert!(h.validate(2).is_err(), "epsilon_decay = {eps}");
        }
    }

    #[test]
    fn schedule_is_linear() {
        let h = HyperParams::default();
        assert_eq!(h.learning_rate(0), 1.0);
        assert_eq!(h.learning_rate(50), 0.5);
        assert!(h.learning_rate(99) > 0.0);
    }
}
