//! Consecutive displacement: how far each point moves between two
//! embeddings of the same data.

use ndarray::Array2;

use crate::error::{Result, SongError};

#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub per_point: Vec<f64>,
}

/// Euclidean displacement of each shared point. `previous` may hold fewer
/// rows than `current`; only its rows are compared.
pub fn consecutive_displacement(previous: &Array2<f64>, current: &Array2<f64>) -> Result<Displacement> {
    if previous.ncols() != current.ncols() {
        return Err(SongError::DimensionMismatch {
            expected: previous.ncols(),
            found: current.ncols(),
        });
    }
    if previous.nrows() > current.nrows() {
        return Err(SongError::InvalidData(format!(
            "previous embedding has {} rows but current only {}",
            previous.nrows(),
            current.nrows()
        )));
    }
    if previous.nrows() == 0 {
        return Err(SongError::EmptyData);
    }
    let per_point: Vec<f64> = previous
        .rows()
        .into_iter()
        .zip(current.rows())
        .map(|(p, c)| p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    let n = per_point.len() as f64;
    let mean = per_point.iter().sum::<f64>() / n;
    let var = per_point.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok(Displacement {
        mean,
        std: var.sqrt(),
        per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_embeddings_have_zero_displacement() {
        let y = array![[0.0, 1.0], [2.0, -3.0]];
        let d = consecutive_displacement(&y, &y).unwrap();
        assert_eq!(d.mean, 0.0);
        assert_eq!(d.std, 0.0);
    }

    #[test]
    fn uniform_shift() {
        let y = array![[0.0, 0.0], [1.0, 1.0], [5.0, -2.0]];
        let shifted = &y + &array![3.0, 4.0];
        let d = consecutive_displacement(&y, &shifted).unwrap();
        assert!((d.mean - 5.0).abs() < 1e-12);
        assert!(d.std < 1e-12);
    }

    #[test]
    fn extra_rows_in_current_ignored() {
        let prev = array![[0.0], [1.0]];
        let cur = array![[1.0], [4.0], [100.0]];
        let d = consecutive_displacement(&prev, &cur).unwrap();
        assert_eq!(d.per_point, vec![1.0, 3.0]);
        assert_eq!(d.mean, 2.0);
        assert_eq!(d.std, 1.0);
    }

    #[test]
    fn shape_errors() {
        assert!(consecutive_displacement(&array![[0.0, 1.0]], &array![[0.0]]).is_err());
        assert!(consecutive_displacement(&array![[0.0], [1.0]], &array![[0.0]]).is_err());
    }
}
