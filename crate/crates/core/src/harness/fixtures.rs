//! Deterministic desk-scale datasets for smoke tests and demos.
//!
//! ADL series are low-amplitude noise around gravity; fall series carry a
//! large oscillation over their whole length, so every window of a fall is
//! separable from every ADL window by its mean absolute deviation.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ingest::{write_samples_csv, ManifestEntry};
use crate::kinematics::{Label, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureSpec {
    pub subjects: usize,
    pub adl_series_per_subject: usize,
    pub fall_series_per_subject: usize,
    pub series_len: usize,
    pub rate_hz: f64,
    /// One synthetic manifest is written per source name.
    pub synthetic_sources: Vec<String>,
    pub synthetic_series_per_source: usize,
    /// Multiplies the fall oscillation of every synthetic source.
    pub synthetic_gain: f64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            subjects: 12,
            adl_series_per_subject: 2,
            fall_series_per_subject: 2,
            series_len: 96,
            rate_hz: 50.0,
            synthetic_sources: vec!["t2m".into(), "parco".into(), "sato".into()],
            synthetic_series_per_source: 10,
            synthetic_gain: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureManifests {
    pub real: PathBuf,
    pub synthetic: Vec<PathBuf>,
}

const GRAVITY: f64 = 9.81;
const ADL_NOISE: f64 = 0.5;
const FALL_AMPLITUDE: f64 = 6.0;
const FALL_PERIOD: f64 = 12.0;

fn adl_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<[f64; 3]> {
    (0..len)
        .map(|_| {
            let n = |rng: &mut ChaCha8Rng| rng.gen_range(-ADL_NOISE..ADL_NOISE);
            [n(rng), n(rng), GRAVITY + n(rng)]
        })
        .collect()
}

fn fall_series(rng: &mut ChaCha8Rng, len: usize, gain: f64, offset: f64) -> Vec<[f64; 3]> {
    let phase: [f64; 3] = [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)];
    (0..len)
        .map(|t| {
            let osc = |a: usize| gain * FALL_AMPLITUDE * (TAU * t as f64 / FALL_PERIOD + phase[a]).sin();
            let n = |rng: &mut ChaCha8Rng| rng.gen_range(-ADL_NOISE..ADL_NOISE);
            [osc(0) + offset + n(rng), osc(1) + n(rng), GRAVITY + osc(2) + n(rng)]
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn entry(subject: &str, activity: Label, path: String, spec: &FixtureSpec, provenance: Provenance, kind: &str) -> ManifestEntry {
    ManifestEntry {
        subject: subject.to_string(),
        activity,
        path,
        rate_hz: spec.rate_hz,
        placement: "left_wrist".into(),
        provenance,
        kind: Some(kind.into()),
        source: None,
    }
}

fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<(), HarnessError> {
    let json = serde_json::to_string_pretty(entries).expect("manifest entries serialize");
    write_file(path, json.as_bytes())
}

/// Writes CSV series plus `real.json` and one `<source>.json` per synthetic source into `dir`.
pub fn generate_fixture(dir: &Path, spec: &FixtureSpec) -> Result<FixtureManifests, HarnessError> {
    if spec.subjects == 0 || spec.series_len < 2 {
        return Err(HarnessError::Config("fixtures need at least one subject and two samples per series".into()));
    }
    let data = dir.join("data");
    std::fs::create_dir_all(&data).map_err(|e| HarnessError::io(&data, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut real = Vec::new();
    for s in 0..spec.subjects {
        let subject = format!("s{:02}", s + 1);
        for k in 0..spec.adl_series_per_subject {
            let rel = format!("data/{subject}_adl{k}.csv");
            write_file(&dir.join(&rel), &write_samples_csv(&adl_series(&mut rng, spec.series_len)))?;
            real.push(entry(&subject, Label::Adl, rel, spec, Provenance::Real, "walking"));
        }
        for k in 0..spec.fall_series_per_subject {
            let rel = format!("data/{subject}_fall{k}.csv");
            write_file(&dir.join(&rel), &write_samples_csv(&fall_series(&mut rng, spec.series_len, 1.0, 0.0)))?;
            real.push(entry(&subject, Label::Fall, rel, spec, Provenance::Real, "forward_fall"));
        }
    }
    let real_path = dir.join("real.json");
    write_manifest(&real_path, &real)?;

    let mut synthetic = Vec::new();
    for (i, source) in spec.synthetic_sources.iter().enumerate() {
        // Each generator is slightly off in its own way.
        let gain = spec.synthetic_gain * (0.9 + 0.1 * i as f64);
        let offset = 0.3 * i as f64;
        let entries = (0..spec.synthetic_series_per_source)
            .map(|k| {
                let rel = format!("data/{source}_{k:03}.csv");
                write_file(&dir.join(&rel), &write_samples_csv(&fall_series(&mut rng, spec.series_len, gain, offset)))?;
                Ok(entry(&format!("{source}-{k:03}"), Label::Fall, rel, spec, Provenance::Synthetic, "forward_fall"))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let path = dir.join(format!("{source}.json"));
        write_manifest(&path, &entries)?;
        synthetic.push(path);
    }
    Ok(FixtureManifests { real: real_path, synthetic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DatasetCatalog;

    #[test]
    fn writes_loadable_manifests() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FixtureSpec { subjects: 3, synthetic_series_per_source: 2, ..Default::default() };
        let m = generate_fixture(dir.path(), &spec).unwrap();
        let real = DatasetCatalog::load(&m.real).unwrap();
        assert_eq!(real.len(), 12);
        assert_eq!(real.subjects().len(), 3);
        assert_eq!(m.synthetic.len(), 3);
        let syn = DatasetCatalog::load(&m.synthetic[1]).unwrap();
        assert_eq!(syn.entries()[0].source, "parco");
        let series = real.entries()[0].load_series(Default::default()).unwrap();
        assert_eq!(series.samples.len(), 96);
    }

    #[test]
    fn deterministic() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let spec = FixtureSpec { subjects: 2, synthetic_series_per_source: 1, ..Default::default() };
        generate_fixture(a.path(), &spec).unwrap();
        generate_fixture(b.path(), &spec).unwrap();
        let read = |d: &Path| std::fs::read(d.join("data/s02_fall1.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
    }
}
