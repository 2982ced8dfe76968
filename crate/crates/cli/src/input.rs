//! Dataset loading with format detection by file name.

use std::path::Path;

use anyhow::{bail, Context, Result};
use song::io::{load_csv, load_idx};
use song::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Idx,
}

pub fn detect(path: &Path) -> Result<Format> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if name.ends_with(".csv") || name.ends_with(".txt") {
        Ok(Format::Csv)
    } else if name.contains("idx") || name.contains("ubyte") {
        Ok(Format::Idx)
    } else {
        bail!("cannot tell the format of {}: expected .csv/.txt or an IDX file name", path.display())
    }
}

pub fn load(path: &Path, header: bool, label_column: Option<usize>, labels: Option<&Path>) -> Result<DataMatrix> {
    let data = match detect(path)? {
        Format::Csv => {
            if labels.is_some() {
                bail!("--labels applies to IDX files; use --label-column for CSV");
            }
            load_csv(path, header, label_column)
        }
        Format::Idx => {
            if header || label_column.is_some() {
                bail!("--header and --label-column apply to CSV files");
            }
            load_idx(path, labels)
        }
    };
    data.with_context(|| format!("reading {}", path.display()))
}

pub fn load_args(args: &crate::DataArgs) -> Result<DataMatrix> {
    load(&args.data, args.header, args.label_column, args.labels.as_deref())
}
