//! Embedding export.

use std::path::Path;

use crate::data::DataMatrix;
use crate::error::Result;
use crate::io::csv::write_csv;
use crate::model::SongModel;

/// Writes one CSV row per point: its `d` embedding coordinates, followed by
/// its label when `data` is labelled.
pub fn export_embedding(model: &SongModel, data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    let y = model.transform(data)?;
    write_csv(path, &y, data.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::HyperParams;
    use crate::io::csv::load_csv;
    use ndarray::Array2;

    fn setup(labelled: bool) -> (SongModel, DataMatrix) {
        let rows = Array2::from_shape_fn((5, 3), |(i, j)| (i * 3 + j) as f64 / 7.0);
        let labels = labelled.then(|| vec![0, 1, 0, 1, 2]);
        let data = DataMatrix::new(rows, labels).unwrap();
        (SongModel::init_for(&data, 2, HyperParams::default()).unwrap(), data)
    }

    #[test]
    fn labelled_export_has_label_column() {
        let (m, d) = setup(true);
        let f = tempfile::NamedTempFile::new().unwrap();
        export_embedding(&m, &d, f.path()).unwrap();
        let back = load_csv(f.path(), false, Some(2)).unwrap();
        assert_eq!(back.rows().dim(), (5, 2));
        assert_eq!(back.labels(), d.labels());
        assert_eq!(back.rows(), &m.transform(&d).unwrap());
    }

    #[test]
    fn unlabelled_export_has_only_coordinates() {
        let (m, d) = setup(false);
        let f = tempfile::NamedTempFile::new().unwrap();
        export_embedding(&m, &d, f.path()).unwrap();
        let back = load_csv(f.path(), false, None).unwrap();
        assert_eq!(back.rows(), &m.transform(&d).unwrap());
    }
}
