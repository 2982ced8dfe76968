//! The training loop: epochs with a linearly decaying learning rate, each a
//! random pass over the data running edge curation, self-organization,
//! embedding layout and growth per sample.

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;

use crate::data::DataMatrix;
use crate::edges::curate_edges;
use crate::error::{Result, SongError};
use crate::growth::{accumulate_growth, grow, GrowthOutcome};
use crate::layout::layout_step;
use crate::model::SongModel;
use crate::neighbors::{nearest_coding_vectors, squared_distance};
use crate::organize::organize_coding_vectors;

/// Diagnostics from one `fit` or `partial_fit` call. The per-epoch vectors
/// all have length `epochs_run`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Stopped before `t_max` because an epoch changed no neighbor sets.
    pub terminated_early: bool,
    /// Samples whose winner's neighbor set changed, per epoch.
    pub edge_changes_per_epoch: Vec<usize>,
    /// Mean `½‖x − c_{i1}‖²` seen by the samples of each epoch.
    pub qe_per_epoch: Vec<f64>,
    pub growth_per_epoch: Vec<usize>,
    pub alpha_per_epoch: Vec<f64>,
    pub growth_events: usize,
    /// Growth triggers refused because the model was at capacity.
    pub growth_skipped: usize,
    /// Quantization error of the training data after the last epoch.
    pub final_qe: f64,
    pub final_alpha: f64,
    pub coding_vectors: usize,
}

/// Trains a model on `data`, which becomes the model's retained reference set.
pub fn fit(model: &mut SongModel, data: &DataMatrix) -> Result<TrainReport> {
    fit_with_progress(model, data, |_| {})
}

/// [`fit`] with a callback invoked after every epoch.
pub fn fit_with_progress<F: FnMut(&TrainReport)>(
    model: &mut SongModel,
    data: &DataMatrix,
    progress: F,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(SongError::EmptyData);
    }
    data.check_dim(model.input_dim)?;
    model.reference = Some(data.rows().clone());
    run_epochs(model, data.rows(), progress)
}

/// Continues training a model with new data, keeping its coding vectors,
/// edges and embedding. The learning-rate schedule restarts at `alpha_0`.
///
/// With `replay_reference` set (the default) training runs over the
/// retained data plus the increment; otherwise over the increment alone.
/// The increment is appended to the retained data either way.
pub fn partial_fit(model: &mut SongModel, new_data: &DataMatrix) -> Result<TrainReport> {
    partial_fit_with_progress(model, new_data, |_| {})
}

pub fn partial_fit_with_progress<F: FnMut(&TrainReport)>(
    model: &mut SongModel,
    new_data: &DataMatrix,
    progress: F,
) -> Result<TrainReport> {
    if new_data.is_empty() {
        return Ok(TrainReport {
            coding_vectors: model.len(),
            ..Default::default()
        });
    }
    new_data.check_dim(model.input_dim)?;
    let combined = match model.reference.take() {
        Some(old) => concatenate(Axis(0), &[old.view(), new_data.rows().view()])
            .expect("reference width matches input_dim"),
        None => new_data.rows().clone(),
    };
    let training = if model.hyper.replay_reference {
        combined.clone()
    } else {
        new_data.rows().clone()
    };
    model.reference = Some(combined);
    run_epochs(model, &training, progress)
}

fn run_epochs<F: FnMut(&TrainReport)>(
    model: &mut SongModel,
    rows: &Array2<f64>,
    progress: F,
) -> Result<TrainReport> {
    run_epochs_observed(model, rows, progress, |_, _| {})
}

/// The epoch loop; `visit(epoch, row)` sees every sample as it is presented.
fn run_epochs_observed<F, V>(
    model: &mut SongModel,
    rows: &Array2<f64>,
    mut progress: F,
    mut visit: V,
) -> Result<TrainReport>
where
    F: FnMut(&TrainReport),
    V: FnMut(usize, usize),
{
    model.hyper.validate(model.output_dim)?;
    let n = rows.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport::default();

    for epoch in 0..model.hyper.t_max {
        model.epoch = epoch;
        let alpha = model.hyper.learning_rate(epoch);
        order.shuffle(&mut model.rng);

        let resolving_threshold = model.theta_g.is_none();
        let (mut changes, mut grown, mut qe_sum, mut dist_sum) = (0usize, 0usize, 0.0, 0.0);

        for &i in &order {
            visit(epoch, i);
            let x = rows.row(i);
            let neighbors = nearest_coding_vectors(&model.coding_vectors, x, model.hyper.k)?;
            let winner = neighbors.winner();
            qe_sum += 0.5 * neighbors.winner_distance().powi(2);

            let outcome = curate_edges(
                &mut model.edges,
                &neighbors,
                model.hyper.epsilon_decay,
                model.hyper.e_min,
            );
            if outcome.neighbor_set_changed {
                changes += 1;
            }
            organize_coding_vectors(model, x, &neighbors, alpha);
            layout_step(model, winner, alpha);

            let dist = squared_distance(
                x.as_slice().expect("rows are contiguous"),
                model.coding_vectors.row(winner).as_slice().expect("rows are contiguous"),
            )
            .sqrt();
            dist_sum += dist;
            let g = accumulate_growth(model, winner, dist);
            if let Some(threshold) = model.theta_g {
                if g > threshold {
                    match grow(model, x, &neighbors) {
                        GrowthOutcome::Grown(_) => grown += 1,
                        GrowthOutcome::AtCapacity => report.growth_skipped += 1,
                    }
                }
            }
        }

        if resolving_threshold {
            let mean = dist_sum / n as f64;
            model.theta_g = Some(model.hyper.theta_g_factor * mean.max(f64::MIN_POSITIVE));
        }
        model.check_finite()?;

        report.epochs_run = epoch + 1;
        report.edge_changes_per_epoch.push(changes);
        report.qe_per_epoch.push(qe_sum / n as f64);
        report.growth_per_epoch.push(grown);
        report.alpha_per_epoch.push(alpha);
        report.growth_events += grown;
        report.final_alpha = alpha;
        report.coding_vectors = model.len();
        progress(&report);

        if changes == 0 {
            report.terminated_early = epoch + 1 < model.hyper.t_max;
            break;
        }
    }
    if report.growth_skipped > 0 {
        log::warn!(
            "growth skipped {} times: model is at its capacity of {} coding vectors",
            report.growth_skipped,
            model.growth_capacity()
        );
    }
    model.epoch = report.epochs_run;
    report.final_qe = model.quantization_error(&DataMatrix::unlabeled(rows.clone())?)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{adjusted_mutual_information, kmeans, make_blobs, BlobSpec};
    use crate::hyper::HyperParams;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(n_clusters: usize, std: f64, dims: usize, per: usize, seed: u64) -> DataMatrix {
        make_blobs(&BlobSpec {
            n_clusters,
            cluster_std: std,
            dims,
            points_per_cluster: per,
            seed,
            ..Default::default()
        })
        .unwrap()
    }

    fn quick(t_max: usize) -> HyperParams {
        HyperParams { t_max, ..Default::default() }
    }

    #[test]
    fn same_seed_same_state() {
        let data = blobs(3, 1.0, 6, 30, 1);
        let run = || {
            let mut m = SongModel::init_for(&data, 2, quick(15)).unwrap();
            let r = fit(&mut m, &data).unwrap();
            (m, r)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn every_row_visited_once_per_epoch() {
        let data = blobs(2, 1.0, 4, 25, 3);
        let mut m = SongModel::init_for(&data, 2, quick(6)).unwrap();
        let mut seen = vec![vec![0usize; data.len()]; 6];
        let mut orders: Vec<Vec<usize>> = vec![Vec::new(); 6];
        let report = run_epochs_observed(&mut m, data.rows(), |_| {}, |e, i| {
            seen[e][i] += 1;
            orders[e].push(i);
        })
        .unwrap();
        for (e, counts) in seen.iter().take(report.epochs_run).enumerate() {
            assert!(counts.iter().all(|&c| c == 1), "epoch {e}");
        }
        assert_ne!(orders[0], orders[1]);
    }

    #[test]
    fn learning_rate_schedule_is_linear() {
        let data = blobs(2, 2.0, 4, 20, 0);
        let mut m = SongModel::init_for(&data, 2, quick(10)).unwrap();
        let r = fit(&mut m, &data).unwrap();
        for (t, &a) in r.alpha_per_epoch.iter().enumerate() {
            assert_eq!(a, 1.0 - t as f64 / 10.0);
        }
        assert!(r.final_alpha > 0.0);
        assert_eq!(r.edge_changes_per_epoch.len(), r.epochs_run);
        assert_eq!(r.qe_per_epoch.len(), r.epochs_run);
    }

    #[test]
    fn initial_positions_are_a_fixed_point() {
        let mut m = SongModel::init(5, 2, HyperParams::default(), None).unwrap();
        let data = DataMatrix::unlabeled(m.coding_vectors().clone()).unwrap();
        let qe_before = m.quantization_error(&data).unwrap();
        let r = fit(&mut m, &data).unwrap();
        assert_eq!(qe_before, 0.0);
        assert!(r.terminated_early, "{r:?}");
        assert_eq!(*r.edge_changes_per_epoch.last().unwrap(), 0);
        // Neighbor pulls move non-winning vectors, so QE is small relative to
        // the spread of the data rather than exactly zero.
        let c = data.rows();
        let mut spread = 0.0;
        for i in 0..c.nrows() {
            for j in 0..i {
                spread += 0.5 * squared_distance(c.row(i).as_slice().unwrap(), c.row(j).as_slice().unwrap());
            }
        }
        spread /= 3.0;
        assert!(r.final_qe < 0.25 * spread, "final qe {} vs spread {spread}", r.final_qe);
    }

    #[test]
    fn tight_unit_separated_blobs_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = 10;
        let centers: Vec<Array1<f64>> = (0..3)
            .map(|c| Array1::from_shape_fn(dims, |j| if j == c { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 }))
            .collect();
        let mut rows = Array2::zeros((300, dims));
        let mut labels = Vec::new();
        for (i, mut row) in rows.rows_mut().into_iter().enumerate() {
            let c = i % 3;
            labels.push(c as i64);
            for (v, m) in row.iter_mut().zip(&centers[c]) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = m + 0.05 * z;
            }
        }
        let data = DataMatrix::new(rows, Some(labels)).unwrap();
        let mut m = SongModel::init_for(&data, 2, HyperParams::default()).unwrap();
        fit(&mut m, &data).unwrap();
        let y = m.transform(&data).unwrap();
        let found: Vec<i64> = kmeans(&y, 3, 0).unwrap().into_iter().map(|l| l as i64).collect();
        let ami = adjusted_mutual_information(data.labels().unwrap(), &found).unwrap();
        assert!(ami >= 0.95, "AMI {ami}");
    }

    #[test]
    fn two_clusters_trigger_early_growth() {
        let data = blobs(2, 0.5, 5, 100, 8);
        let mut m = SongModel::init_for(&data, 2, HyperParams::default()).unwrap();
        let r = fit(&mut m, &data).unwrap();
        let early: usize = r.growth_per_epoch.iter().take(5).sum();
        assert!(early >= 1, "{:?}", r.growth_per_epoch);
        assert_eq!(r.growth_per_epoch[0], 0);
        assert!(m.len() <= m.growth_capacity());
    }

    #[test]
    fn early_stop_means_quiet_last_epoch() {
        for seed in 0..5 {
            let data = blobs(2, 0.01, 3, 10, seed);
            let mut m = SongModel::init_for(&data, 2, quick(60).with_seed(seed)).unwrap();
            let r = fit(&mut m, &data).unwrap();
            if r.terminated_early {
                assert_eq!(*r.edge_changes_per_epoch.last().unwrap(), 0);
                assert!(r.epochs_run < 60);
            }
        }
    }

    #[test]
    fn bounded_random_data_never_goes_non_finite() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(5..60);
            let dims = rng.random_range(3..8);
            let scale = 10f64.powi(rng.random_range(-3..4));
            let rows = Array2::from_shape_fn((n, dims), |_| scale * rng.random_range(-1.0..1.0));
            let data = DataMatrix::unlabeled(rows).unwrap();
            let mut m = SongModel::init_for(&data, 2, quick(20).with_seed(seed)).unwrap();
            fit(&mut m, &data).unwrap();
            m.check_invariants().unwrap();
        }
    }

    #[test]
    fn dimension_mismatch_and_empty_data_rejected() {
        let data = blobs(2, 1.0, 4, 10, 0);
        let mut m = SongModel::init_for(&data, 2, quick(2)).unwrap();
        let wrong = blobs(2, 1.0, 5, 10, 0);
        assert!(matches!(fit(&mut m, &wrong), Err(SongError::DimensionMismatch { .. })));
        assert!(matches!(partial_fit(&mut m, &wrong), Err(SongError::DimensionMismatch { .. })));
        let empty = DataMatrix::unlabeled(Array2::zeros((0, 4))).unwrap();
        assert!(matches!(fit(&mut m, &empty), Err(SongError::EmptyData)));
    }

    #[test]
    fn empty_increment_changes_nothing() {
        let data = blobs(2, 1.0, 4, 20, 0);
        let mut m = SongModel::init_for(&data, 2, quick(5)).unwrap();
        fit(&mut m, &data).unwrap();
        let before = m.clone();
        let r = partial_fit(&mut m, &DataMatrix::unlabeled(Array2::zeros((0, 4))).unwrap()).unwrap();
        assert_eq!(r.epochs_run, 0);
        assert_eq!(m, before);
    }

    #[test]
    fn partial_fit_appends_reference_and_keeps_vectors() {
        let data = blobs(3, 1.0, 5, 40, 2);
        let first = data.select(&(0..80).collect::<Vec<_>>());
        let second = data.select(&(80..120).collect::<Vec<_>>());
        let mut m = SongModel::init_for(&first, 2, quick(10)).unwrap();
        fit(&mut m, &first).unwrap();
        let before = m.len();
        let r = partial_fit(&mut m, &second).unwrap();
        assert!(m.len() >= before);
        assert_eq!(m.reference().unwrap().nrows(), 120);
        assert_eq!(r.alpha_per_epoch[0], 1.0);

        let mut fresh_only = SongModel::init_for(&first, 2, HyperParams { replay_reference: false, ..quick(10) }).unwrap();
        fit(&mut fresh_only, &first).unwrap();
        partial_fit(&mut fresh_only, &second).unwrap();
        assert_eq!(fresh_only.reference().unwrap().nrows(), 120);
    }
}
