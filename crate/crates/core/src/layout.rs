//! Embedding layout: attraction along graph edges and repulsion from
//! negative-sampled non-edges, around the winner's image `y_{i_1}`.
//!
//! Output similarity is the rational quadratic kernel
//! `q = 1 / (1 + a‖Δ‖^{2b})`. Only `y_j` moves; the winner's image is the
//! fixed anchor of each step.

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::SongModel;
use crate::neighbors::squared_distance;

/// Shape parameters of the output kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub a: f64,
    pub b: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { a: 1.577, b: 0.895 }
    }
}

/// Gradient clamps shared by attraction and repulsion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLimits {
    /// Distances below this are treated as this value.
    pub dist_floor: f64,
    /// Upper bound on the Euclidean length of one displacement.
    pub max_step: f64,
}

impl SongModel {
    pub fn kernel(&self) -> KernelParams {
        KernelParams {
            a: self.hyper.a,
            b: self.hyper.b,
        }
    }

    pub(crate) fn step_limits(&self) -> StepLimits {
        StepLimits {
            dist_floor: self.hyper.dist_floor,
            max_step: self.hyper.max_step,
        }
    }
}

/// `1 / (1 + a‖y1 − y2‖^{2b})`.
pub fn kernel_q(y1: &[f64], y2: &[f64], kp: KernelParams) -> f64 {
    let d2 = squared_distance(y1, y2);
    1.0 / (1.0 + kp.a * d2.powf(kp.b))
}

fn clip(mut step: Vec<f64>, max_len: f64) -> Vec<f64> {
    let len = step.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len > max_len {
        let s = max_len / len;
        step.iter_mut().for_each(|v| *v *= s);
    }
    step
}

/// Displacement of `y_j` toward the anchor `y_i`:
/// `α (y_i − y_j) · 2ab ê ‖Δ‖^{2b−2} / (1 + ‖Δ‖^{2b})`.
pub fn attraction_displacement(
    y_i: &[f64],
    y_j: &[f64],
    e_hat: f64,
    alpha: f64,
    kp: KernelParams,
    limits: StepLimits,
) -> Vec<f64> {
    let dist = squared_distance(y_i, y_j).sqrt().max(limits.dist_floor);
    let coef = 2.0 * kp.a * kp.b * e_hat * dist.powf(2.0 * kp.b - 2.0) / (1.0 + dist.powf(2.0 * kp.b));
    let step = y_i.iter().zip(y_j).map(|(a, b)| alpha * coef * (a - b)).collect();
    clip(step, limits.max_step)
}

/// Displacement of `y_j` away from the anchor `y_i`:
/// `−α (y_i − y_j) · 2b / (‖Δ‖² (1 + ‖Δ‖^{2b}))`.
///
/// Exactly coincident points are separated along a random unit direction
/// drawn from `rng`, with the magnitude the clamped formula gives at
/// distance `dist_floor`.
pub fn repulsion_displacement<R: Rng + ?Sized>(
    y_i: &[f64],
    y_j: &[f64],
    alpha: f64,
    kp: KernelParams,
    limits: StepLimits,
    rng: &mut R,
) -> Vec<f64> {
    let raw = squared_distance(y_i, y_j).sqrt();
    let dist = raw.max(limits.dist_floor);
    let coef = 2.0 * kp.b / (dist * dist * (1.0 + dist.powf(2.0 * kp.b)));
    let step = if raw == 0.0 {
        let dir = random_unit(y_i.len(), rng);
        dir.into_iter().map(|u| alpha * coef * dist * u).collect()
    } else {
        y_i.iter().zip(y_j).map(|(a, b)| -alpha * coef * (a - b)).collect()
    };
    clip(step, limits.max_step)
}

fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn row_slice(m: &ndarray::Array2<f64>, i: usize) -> &[f64] {
    let row = m.row(i);
    row.to_slice().expect("rows are contiguous")
}

fn embedding_row(model: &SongModel, i: usize) -> &[f64] {
    row_slice(&model.embedding, i)
}

fn apply(model: &mut SongModel, j: usize, step: Vec<f64>) -> Vec<f64> {
    let mut row = model.embedding.row_mut(j);
    for (y, s) in row.iter_mut().zip(&step) {
        *y += s;
    }
    step
}

/// Pulls `y_j` toward `y_{i1}` with edge strength `e_hat`; returns the
/// displacement applied.
pub fn attract(model: &mut SongModel, i1: usize, j: usize, e_hat: f64, alpha: f64) -> Vec<f64> {
    debug_assert_ne!(i1, j);
    let step = attraction_displacement(
        embedding_row(model, i1),
        embedding_row(model, j),
        e_hat,
        alpha,
        model.kernel(),
        model.step_limits(),
    );
    apply(model, j, step)
}

/// Pushes `y_j` away from `y_{i1}`; returns the displacement applied.
pub fn repulse(model: &mut SongModel, i1: usize, j: usize, alpha: f64) -> Vec<f64> {
    debug_assert_ne!(i1, j);
    let (kp, limits) = (model.kernel(), model.step_limits());
    let y = &model.embedding;
    let (y_i, y_j) = (row_slice(y, i1), row_slice(y, j));
    let step = repulsion_displacement(y_i, y_j, alpha, kp, limits, &mut model.rng);
    apply(model, j, step)
}

/// Counts of moves made by one [`layout_step`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LayoutCounts {
    pub attractions: usize,
    pub repulsions: usize,
}

/// Attracts every graph neighbor of `i1`, then repulses
/// `neg_rate × (number of neighbors)` distinct non-neighbors drawn uniformly.
pub fn layout_step(model: &mut SongModel, i1: usize, alpha: f64) -> LayoutCounts {
    let row = model.edges.symmetric_row(i1);
    for &(j, e_hat) in &row {
        attract(model, i1, j, e_hat, alpha);
    }
    let negatives = sample_non_edges(model, i1, &row);
    for &j in &negatives {
        repulse(model, i1, j, alpha);
    }
    LayoutCounts {
        attractions: row.len(),
        repulsions: negatives.len(),
    }
}

/// Draws distinct `j ≠ i1` with `E_s(i1, j) = 0`, uniformly without
/// replacement. `positives` must be sorted by index.
fn sample_non_edges(model: &mut SongModel, i1: usize, positives: &[(usize, f64)]) -> Vec<usize> {
    let n = model.len();
    let pool = n - 1 - positives.len();
    let wanted = (model.hyper.neg_rate * positives.len()).min(pool);
    if wanted == 0 {
        return Vec::new();
    }
    let is_edge = |j: usize| positives.binary_search_by_key(&j, |&(p, _)| p).is_ok();
    if wanted * 4 <= pool {
        let mut chosen = Vec::with_capacity(wanted);
        while chosen.len() < wanted {
            let j = model.rng.random_range(0..n);
            if j != i1 && !is_edge(j) && !chosen.contains(&j) {
                chosen.push(j);
            }
        }
        chosen
    } else {
        let candidates: Vec<usize> = (0..n).filter(|&j| j != i1 && !is_edge(j)).collect();
        index::sample(&mut model.rng, pool, wanted)
            .into_iter()
            .map(|k| candidates[k])
            .collect()
    }
}

/// Total cross entropy `Σ_{i≠j} −p log q − (1 − p) log(1 − q)` of an
/// embedding against a dense symmetric edge matrix.
pub fn cross_entropy(embedding: &Array2<f64>, edges_sym: &Array2<f64>, kp: KernelParams) -> f64 {
    let n = embedding.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let yi: Vec<f64> = embedding.row(i).to_vec();
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = kernel_q(&yi, &embedding.row(j).to_vec(), kp).clamp(1e-12, 1.0 - 1e-12);
            let p = edges_sym[[i, j]];
            total += -p * q.ln() - (1.0 - p) * (1.0 - q).ln();
        }
    }
    total
}
