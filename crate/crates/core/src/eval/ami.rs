//! Adjusted Mutual Information under the permutation (hypergeometric)
//! model, with natural-log entropies and the arithmetic-mean normalizer.

use std::collections::BTreeMap;

use crate::error::{Result, SongError};

struct Contingency {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    cells: Vec<Vec<usize>>,
}

fn contingency(a: &[i64], b: &[i64]) -> Contingency {
    let index = |labels: &[i64]| -> (BTreeMap<i64, usize>, Vec<usize>) {
        let mut map = BTreeMap::new();
        for &l in labels {
            let next = map.len();
            map.entry(l).or_insert(next);
        }
        let ids = labels.iter().map(|l| map[l]).collect();
        (map, ids)
    };
    let (ma, ia) = index(a);
    let (mb, ib) = index(b);
    let mut cells = vec![vec![0usize; mb.len()]; ma.len()];
    for (&x, &y) in ia.iter().zip(&ib) {
        cells[x][y] += 1;
    }
    let rows = cells.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..mb.len()).map(|j| cells.iter().map(|r| r[j]).sum()).collect();
    Contingency {
        n: a.len(),
        rows,
        cols,
        cells,
    }
}

fn entropy(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &Contingency) -> f64 {
    let n = t.n as f64;
    let mut mi = 0.0;
    for (i, row) in t.cells.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (t.rows[i] as f64 * t.cols[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// `ln(k!)` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Expected mutual information of two random labelings with the given
/// marginals.
fn expected_mutual_information(t: &Contingency) -> f64 {
    let n = t.n;
    let lf = log_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in &t.rows {
        for &b in &t.cols {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lf[a] + lf[b] + lf[n - a] + lf[n - b] - lf[n];
            for nij in lo..=hi {
                let term = nij as f64 / nf * (nf * nij as f64 / (a as f64 * b as f64)).ln();
                let log_p = fixed - lf[nij] - lf[a - nij] - lf[b - nij] - lf[n + nij - a - b];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// `(MI − E[MI]) / (mean(H_a, H_b) − E[MI])`.
///
/// Equals 1 for identical partitions (up to relabeling) and is close to 0
/// for independent ones.
pub fn adjusted_mutual_information(labels_a: &[i64], labels_b: &[i64]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(SongError::InvalidData(format!(
            "label lengths differ: {} vs {}",
            labels_a.len(),
            labels_b.len()
        )));
    }
    if labels_a.len() < 2 {
        return Err(SongError::InvalidData("need at least two labels".into()));
    }
    let t = contingency(labels_a, labels_b);
    if t.rows.len() == t.cols.len() && (t.rows.len() == 1 || t.rows.len() == t.n) {
        // both trivial partitions of the same kind: perfect agreement
        return Ok(1.0);
    }
    let mi = mutual_information(&t);
    let emi = expected_mutual_information(&t);
    let h_mean = 0.5 * (entropy(&t.rows, t.n) + entropy(&t.cols, t.n));
    let mut denom = h_mean - emi;
    if denom.abs() < f64::EPSILON {
        denom = if denom < 0.0 { -f64::EPSILON } else { f64::EPSILON };
    }
    Ok((mi - emi) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_is_one() {
        let a = [0, 0, 1, 1, 2, 2, 2];
        assert!((adjusted_mutual_information(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relabeling_is_one() {
        let a = [0, 0, 1, 1, 2, 2, 2, 0];
        let b = [7, 7, -3, -3, 5, 5, 5, 7];
        assert!((adjusted_mutual_information(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_carries_no_information() {
        let a = [0, 1, 2, 0, 1, 2, 0, 1];
        let b = [4; 8];
        assert!(adjusted_mutual_information(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(adjusted_mutual_information(&[0, 1], &[0]).is_err());
    }

    fn permutations(items: &mut Vec<i64>, k: usize, out: &mut Vec<Vec<i64>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }

    /// AMI with E[MI] averaged over every permutation of `b`.
    fn brute_force_ami(a: &[i64], b: &[i64]) -> f64 {
        let mi = |x: &[i64], y: &[i64]| mutual_information(&contingency(x, y));
        let mut perms = Vec::new();
        permutations(&mut b.to_vec(), 0, &mut perms);
        let emi = perms.iter().map(|p| mi(a, p)).sum::<f64>() / perms.len() as f64;
        let t = contingency(a, b);
        let h = 0.5 * (entropy(&t.rows, t.n) + entropy(&t.cols, t.n));
        (mi(a, b) - emi) / (h - emi)
    }

    #[test]
    fn matches_permutation_enumeration() {
        let cases: [(&[i64], &[i64]); 3] = [
            (&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]),
            (&[0, 1, 1, 2, 2, 2, 0], &[1, 1, 0, 0, 1, 0, 1]),
            (&[0, 0, 1, 1, 2, 3, 3, 3], &[0, 1, 1, 1, 2, 2, 0, 0]),
        ];
        for (a, b) in cases {
            let got = adjusted_mutual_information(a, b).unwrap();
            let want = brute_force_ami(a, b);
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn symmetric_and_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let a: Vec<i64> = (0..60).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<i64> = a.iter().map(|&x| if rng.random_bool(0.3) { rng.random_range(0..5) } else { x }).collect();
            let ab = adjusted_mutual_information(&a, &b).unwrap();
            let ba = adjusted_mutual_information(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            let renamed: Vec<i64> = b.iter().map(|&x| 10 - 3 * x).collect();
            assert!((ab - adjusted_mutual_information(&a, &renamed).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_labelings_near_zero() {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<i64> = (0..1000).map(|_| rng.random_range(0..5)).collect();
            let b: Vec<i64> = (0..1000).map(|_| rng.random_range(0..5)).collect();
            let ami = adjusted_mutual_information(&a, &b).unwrap();
            assert!(ami.abs() < 0.05, "seed {seed}: {ami}");
            total += ami;
        }
        assert!((total / 20.0).abs() < 0.05);
    }
}
