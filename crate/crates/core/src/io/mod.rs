//! Dataset loading, model persistence and embedding export.

pub mod csv;
pub mod export;
pub mod idx;
pub mod model_file;

pub use self::csv::{load_csv, write_csv};
pub use export::export_embedding;
pub use idx::load_idx;
pub use model_file::{load_model, save_model};
