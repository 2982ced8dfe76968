//! Dense input datasets.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Result, SongError};

/// `N × D` row-major points with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: Array2<f64>,
    labels: Option<Vec<i64>>,
}

impl DataMatrix {
    /// Wraps `rows`, rejecting NaN/Inf entries and label-length mismatches.
    ///
    /// A zero-row matrix is allowed here (an empty increment is a valid
    /// input to `partial_fit`); operations that need data check for it.
    pub fn new(rows: Array2<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        if let Some((idx, _)) = rows.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let cols = rows.ncols().max(1);
            return Err(SongError::InvalidData(format!(
                "non-finite value at row {}, column {}",
                idx / cols,
                idx % cols
            )));
        }
        if let Some(l) = &labels {
            if l.len() != rows.nrows() {
                return Err(SongError::InvalidData(format!(
                    "{} labels for {} rows",
                    l.len(),
                    rows.nrows()
                )));
            }
        }
        Ok(Self { rows, labels })
    }

    pub fn unlabeled(rows: Array2<f64>) -> Result<Self> {
        Self::new(rows, None)
    }

    /// Builds a matrix from row vectors, all of which must share a length.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<i64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(SongError::InvalidData(format!(
                "row {bad} has {} values, expected {dim}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((rows.len(), dim), flat)
            .map_err(|e| SongError::InvalidData(e.to_string()))?;
        Self::new(arr, labels)
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn into_parts(self) -> (Array2<f64>, Option<Vec<i64>>) {
        (self.rows, self.labels)
    }

    /// Rows selected by index, labels carried along.
    pub fn select(&self, indices: &[usize]) -> DataMatrix {
        let rows = self.rows.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        DataMatrix { rows, labels }
    }

    /// Per-dimension `(min, max)`; `None` for an empty matrix.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.is_empty() {
            return None;
        }
        Some(
            self.rows
                .axis_iter(Axis(1))
                .map(|col| {
                    col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
                })
                .collect(),
        )
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(SongError::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_nan() {
        let err = DataMatrix::unlabeled(array![[1.0, f64::NAN]]).unwrap_err();
        assert!(err.to_string().contains("row 0, column 1"));
    }

    #[test]
    fn rejects_label_mismatch() {
        assert!(DataMatrix::new(array![[1.0], [2.0]], Some(vec![1])).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]], None).is_err());
    }

    #[test]
    fn bounds_per_column() {
        let d = DataMatrix::unlabeled(array![[1.0, -2.0], [3.0, 5.0]]).unwrap();
        assert_eq!(d.bounds().unwrap(), vec![(1.0, 3.0), (-2.0, 5.0)]);
    }
}
