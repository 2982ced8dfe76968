//! Lloyd's k-means with k-means++ seeding and best-of-n restarts. Each Lloyd
//! fixpoint is refined by Hartigan single-point moves.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SongError};
use crate::neighbors::squared_distance;

pub const DEFAULT_RESTARTS: usize = 5;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centers: Array2<f64>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

/// Cluster labels for `points` using [`DEFAULT_RESTARTS`] restarts.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(kmeans_with_restarts(points, k, seed, DEFAULT_RESTARTS)?.labels)
}

/// Runs `restarts` independent seedings and keeps the lowest inertia.
pub fn kmeans_with_restarts(
    points: &Array2<f64>,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<Clustering> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(SongError::InvalidData(format!(
            "k = {k} must lie in 1..={n} (number of points)"
        )));
    }
    let rows: Vec<Vec<f64>> = points.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(&rows, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

fn plus_plus_seed(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![rows[first].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| squared_distance(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            while d2[idx] == 0.0 {
                idx -= 1;
            }
            idx
        } else {
            // every point coincides with a center; take an unused one
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(rows[pick].clone());
        let c = centers.last().unwrap();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, c));
        }
    }
    centers
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(i, c)| (i, squared_distance(row, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn lloyd(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Clustering {
    let dim = rows[0].len();
    let mut centers = plus_plus_seed(rows, k, rng);
    let mut labels = vec![usize::MAX; rows.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (label, row) in labels.iter_mut().zip(rows) {
            let (c, _) = nearest(row, &centers);
            if *label != c {
                *label = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, row) in labels.iter().zip(rows) {
            counts[l] += 1;
            sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // re-seed an empty cluster at the worst-fit point
                let far = (0..rows.len())
                    .max_by(|&a, &b| {
                        let da = squared_distance(&rows[a], &centers[labels[a]]);
                        let db = squared_distance(&rows[b], &centers[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap();
                centers[c] = rows[far].clone();
            }
        }
    }
    hartigan_refine(rows, &mut labels, &mut centers);
    let inertia = labels
        .iter()
        .zip(rows)
        .map(|(&l, r)| squared_distance(r, &centers[l]))
        .sum();
    let flat: Vec<f64> = centers.into_iter().flatten().collect();
    Clustering {
        labels,
        centers: Array2::from_shape_vec((k, dim), flat).unwrap(),
        inertia,
    }
}

/// Moves single points between clusters while a move lowers the inertia.
/// Moving `x` from `A` to `B` changes the inertia by
/// `n_B/(n_B+1)·‖x−c_B‖² − n_A/(n_A−1)·‖x−c_A‖²`.
fn hartigan_refine(rows: &[Vec<f64>], labels: &mut [usize], centers: &mut [Vec<f64>]) {
    let k = centers.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for _ in 0..MAX_ITERATIONS {
        let mut moved = false;
        for (i, row) in rows.iter().enumerate() {
            let from = labels[i];
            if counts[from] < 2 {
                continue;
            }
            let nf = counts[from] as f64;
            let loss = nf / (nf - 1.0) * squared_distance(row, &centers[from]);
            let best = (0..k)
                .filter(|&c| c != from)
                .map(|c| {
                    let nc = counts[c] as f64;
                    (c, nc / (nc + 1.0) * squared_distance(row, &centers[c]))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((to, gain)) = best else { continue };
            if gain < loss * (1.0 - 1e-12) {
                let (nt, nf_new) = (counts[to] as f64, nf - 1.0);
                centers[to].iter_mut().zip(row).for_each(|(c, x)| *c += (x - *c) / (nt + 1.0));
                centers[from].iter_mut().zip(row).for_each(|(c, x)| *c -= (x - *c) / nf_new);
                counts[to] += 1;
                counts[from] -= 1;
                labels[i] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Within-cluster sum of squares of an arbitrary labelling.
pub fn within_cluster_ss(points: &Array2<f64>, labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let dim = points.ncols();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (&l, row) in labels.iter().zip(points.rows()) {
        counts[l] += 1;
        sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|v| v / c.max(1) as f64).collect())
        .collect();
    labels
        .iter()
        .zip(points.rows())
        .map(|(&l, r): (&usize, ArrayView1<f64>)| squared_distance(&r.to_vec(), &means[l]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ami::adjusted_mutual_information;
    use ndarray::array;

    #[test]
    fn separated_groups_recovered() {
        let pts = array![[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [10.0, 10.0], [10.1, 10.0], [10.0, 10.2]];
        let labels = kmeans(&pts, 2, 3).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[1], labels[2]);
        assert_eq!(labels[3], labels[4]);
        assert_eq!(labels[4], labels[5]);
        assert_ne!(labels[0], labels[3]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts = array![[0.0], [1.0], [5.0], [7.0]];
        let mut labels = kmeans(&pts, 4, 0).unwrap();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_above_n_rejected() {
        assert!(kmeans(&array![[0.0], [1.0]], 3, 0).is_err());
        assert!(kmeans(&array![[0.0], [1.0]], 0, 0).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let pts = Array2::from_shape_fn((40, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        assert_eq!(kmeans(&pts, 3, 9).unwrap(), kmeans(&pts, 3, 9).unwrap());
    }

    fn best_two_partition(points: &Array2<f64>) -> f64 {
        let n = points.nrows();
        (1..(1u32 << n) - 1)
            .map(|mask| {
                let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
                within_cluster_ss(points, &labels)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn two_clusters_near_exhaustive_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..40 {
            let n = rng.random_range(4..=12);
            let pts = Array2::from_shape_fn((n, 2), |_| rng.random_range(-4.0..4.0));
            let got = kmeans_with_restarts(&pts, 2, rng.random(), DEFAULT_RESTARTS).unwrap();
            assert!(got.inertia <= 1.05 * best_two_partition(&pts), "{pts}");
            assert!((got.inertia - within_cluster_ss(&pts, &got.labels)).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let pts = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let labels = kmeans(&pts, 3, 1).unwrap();
        assert_eq!(labels.len(), 4);
        assert_ne!(labels[0], labels[3]);
    }

    #[test]
    fn recovers_labels_for_ami() {
        let pts = Array2::from_shape_fn((60, 2), |(i, j)| (i / 20) as f64 * 50.0 + ((i * 13 + j * 7) % 5) as f64);
        let truth: Vec<i64> = (0..60).map(|i| (i / 20) as i64).collect();
        let labels: Vec<i64> = kmeans(&pts, 3, 0).unwrap().into_iter().map(|l| l as i64).collect();
        assert!((adjusted_mutual_information(&truth, &labels).unwrap() - 1.0).abs() < 1e-12);
    }
}
