//! JSON dataset manifests and the validated catalog built from them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{csv::read_accel_csv, npy::read_motion_array, IngestError};
use crate::kinematics::{
    differentiate_with, extract_joint, AccelSeries, Differencing, Label, Provenance, SensorPlacement, SeriesMeta,
};

/// One manifest record as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub subject: String,
    pub activity: Label,
    pub path: String,
    pub rate_hz: f64,
    pub placement: String,
    pub provenance: Provenance,
    /// Fine-grained activity type, e.g. `"forward_fall"` or `"walking"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Dataset or generator name. Defaults to the manifest file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub subject_id: String,
    pub activity: Label,
    pub kind: Option<String>,
    pub path: PathBuf,
    pub sampling_rate: f64,
    pub placement: SensorPlacement,
    pub provenance: Provenance,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetCatalog {
    entries: Vec<CatalogEntry>,
}

/// Validates manifest records whose relative paths resolve against `base_dir`.
pub fn catalog_dataset(
    records: &[ManifestEntry],
    base_dir: &Path,
    default_source: &str,
) -> Result<DatasetCatalog, IngestError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if r.subject.trim().is_empty() {
            return Err(IngestError::Manifest(format!("entry {i}: empty subject id")));
        }
        if !(r.rate_hz.is_finite() && r.rate_hz > 0.0) {
            return Err(IngestError::Manifest(format!("entry {i}: rate_hz must be positive, got {}", r.rate_hz)));
        }
        let placement: SensorPlacement = r
            .placement
            .parse()
            .map_err(|_| IngestError::Manifest(format!("entry {i}: unknown placement `{}`", r.placement)))?;
        let path = base_dir.join(&r.path);
        if !path.is_file() {
            return Err(IngestError::MissingFile(path));
        }
        if !seen.insert(path.clone()) {
            return Err(IngestError::Manifest(format!("duplicate file entry `{}`", r.path)));
        }
        entries.push(CatalogEntry {
            subject_id: r.subject.clone(),
            activity: r.activity,
            kind: r.kind.clone(),
            path,
            sampling_rate: r.rate_hz,
            placement,
            provenance: r.provenance,
            source: r.source.clone().unwrap_or_else(|| default_source.to_string()),
        });
    }
    Ok(DatasetCatalog { entries })
}

impl DatasetCatalog {
    /// Loads and validates a manifest file.
    pub fn load(manifest: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(manifest).map_err(|e| IngestError::Io { path: manifest.to_path_buf(), source: e })?;
        let records: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| IngestError::Manifest(format!("{}: {e}", manifest.display())))?;
        let base = manifest.parent().unwrap_or(Path::new("."));
        let stem = manifest.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
        catalog_dataset(&records, base, stem)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn subjects(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.subject_id.clone()).collect()
    }

    pub fn count(&self, activity: Label) -> usize {
        self.entries.iter().filter(|e| e.activity == activity).count()
    }

    /// Entry counts keyed by `(activity, kind)`.
    pub fn activity_histogram(&self) -> BTreeMap<(Label, Option<String>), usize> {
        let mut hist = BTreeMap::new();
        for e in &self.entries {
            *hist.entry((e.activity, e.kind.clone())).or_insert(0) += 1;
        }
        hist
    }

    /// Concatenates two catalogs; duplicate files across them are rejected.
    pub fn merge(mut self, other: DatasetCatalog) -> Result<Self, IngestError> {
        let seen: HashSet<_> = self.entries.iter().map(|e| e.path.clone()).collect();
        if let Some(dup) = other.entries.iter().find(|e| seen.contains(&e.path)) {
            return Err(IngestError::Manifest(format!("duplicate file entry `{}`", dup.path.display())));
        }
        self.entries.extend(other.entries);
        Ok(self)
    }
}

impl CatalogEntry {
    pub fn meta(&self) -> SeriesMeta {
        SeriesMeta::new(self.activity, self.provenance)
            .with_subject(&self.subject_id)
            .with_source(&self.source)
    }

    /// Reads the referenced file. `.npy` motion arrays are converted through the
    /// entry's placement with `rate_hz` as the frame rate.
    pub fn load_series(&self, differencing: Differencing) -> Result<AccelSeries, IngestError> {
        let bytes = std::fs::read(&self.path).map_err(|e| IngestError::Io { path: self.path.clone(), source: e })?;
        let is_npy = self.path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("npy"));
        if is_npy {
            let traj = read_motion_array(&bytes, Some(self.sampling_rate))?;
            let pos = extract_joint(&traj, self.placement);
            Ok(differentiate_with(&pos, differencing, self.meta())?)
        } else {
            read_accel_csv(&bytes, self.sampling_rate, self.meta()).map_err(|e| e.in_file(&self.path))
        }
    }
}
