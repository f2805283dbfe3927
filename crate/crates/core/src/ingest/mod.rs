//! File formats and dataset catalogs.

pub mod csv;
pub mod manifest;
pub mod npy;
pub mod prompts;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kinematics::KinematicsError;

pub use self::csv::{read_accel_csv, write_accel_csv, write_samples_csv, ACCEL_HEADER};
pub use manifest::{catalog_dataset, CatalogEntry, DatasetCatalog, ManifestEntry};
pub use npy::{read_motion_array, write_motion_array, write_npy, NpyDtype};
pub use prompts::{generate_prompt_variants, parse_tags, rewrite_prompt, PromptCatalog, VariantTag};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("format error: {0}")]
    Format(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("series has no samples")]
    EmptySeries,
    #[error("incompatible array shape or dtype: {0}")]
    Shape(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("unknown variant tag `{0}`")]
    UnknownTag(String),
    #[error("prompt catalog error: {0}")]
    Prompt(String),
    #[error("{}: {source}", .path.display())]
    InFile { path: PathBuf, source: Box<IngestError> },
    #[error("i/o error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

impl IngestError {
    pub(crate) fn in_file(self, path: &Path) -> Self {
        IngestError::InFile { path: path.to_path_buf(), source: Box::new(self) }
    }
}
