//! Sliding windows, standardization, subject splits and real/synthetic training mixes.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{AccelSeries, Label, Provenance, SeriesMeta};

pub const DEFAULT_WINDOW: usize = 128;
pub const DEFAULT_STRIDE: usize = 10;
pub const SCALER_EPSILON: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum WindowingError {
    #[error("cannot fit a scaler on zero windows")]
    EmptyFit,
    #[error("window sizes differ: {0} vs {1}")]
    MixedWidths(usize, usize),
    #[error("split sizes {train}+{validation}+{test} do not match {subjects} subjects")]
    SplitSize { train: usize, validation: usize, test: usize, subjects: usize },
    #[error("mix fractions must lie in [0, 1] and sum to 1, got {0:?}")]
    InvalidMix([f64; 3]),
    #[error("infeasible mix: {0}")]
    InfeasibleMix(String),
    #[error("window cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A fixed-length `W × 3` slice of an accelerometer series.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub values: Vec<[f64; 3]>,
    pub meta: SeriesMeta,
    /// Offset of the first sample within the source series.
    pub start: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn label(&self) -> Label {
        self.meta.label
    }

    pub fn provenance(&self) -> Provenance {
        self.meta.provenance
    }

    pub fn subject(&self) -> Option<&str> {
        self.meta.subject_id.as_deref()
    }

    pub fn source(&self) -> &str {
        &self.meta.source
    }

    /// Row-major `3W` vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Number of windows `slide_windows` produces for a series of length `n`.
pub fn window_count(n: usize, width: usize, stride: usize) -> usize {
    assert!(width >= 1 && stride >= 1, "window width and stride must be at least 1");
    if n < width {
        0
    } else {
        (n - width) / stride + 1
    }
}

/// Windows start at `0, stride, 2·stride, …`; a series shorter than `width` yields none.
pub fn slide_windows(series: &AccelSeries, width: usize, stride: usize) -> Vec<Window> {
    let count = window_count(series.len(), width, stride);
    (0..count)
        .map(|i| {
            let start = i * stride;
            Window { values: series.samples[start..start + width].to_vec(), meta: series.meta.clone(), start }
        })
        .collect()
}

/// Windows every series, logging the ones too short to produce any.
pub fn window_all(series: &[AccelSeries], width: usize, stride: usize) -> Vec<Window> {
    let mut out = Vec::new();
    for s in series {
        if s.len() < width {
            log::warn!(
                "skipping {} series of subject {:?} ({} samples < window {width})",
                s.meta.label,
                s.meta.subject_id,
                s.len()
            );
            continue;
        }
        out.extend(slide_windows(s, width, stride));
    }
    out
}

/// Per-axis standardization statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler { mean: [0.0; 3], std: [1.0; 3] };

    pub fn transform(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| (v[k] - self.mean[k]) / self.std[k])
    }

    pub fn inverse(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| v[k] * self.std[k] + self.mean[k])
    }
}

/// Fits mean and population standard deviation per axis over every value of every window.
pub fn fit_scaler(windows: &[Window]) -> Result<Scaler, WindowingError> {
    fit_scaler_rows(windows.iter().flat_map(|w| w.values.iter()))
}

pub(crate) fn fit_scaler_rows<'a>(rows: impl Iterator<Item = &'a [f64; 3]> + Clone) -> Result<Scaler, WindowingError> {
    let mut n = 0usize;
    let mut sum = [0.0; 3];
    for r in rows.clone() {
        n += 1;
        for k in 0..3 {
            sum[k] += r[k];
        }
    }
    if n == 0 {
        return Err(WindowingError::EmptyFit);
    }
    let mean = sum.map(|s| s / n as f64);
    let mut sq = [0.0; 3];
    for r in rows {
        for k in 0..3 {
            let d = r[k] - mean[k];
            sq[k] += d * d;
        }
    }
    let std = sq.map(|s| (s / n as f64).sqrt().max(SCALER_EPSILON));
    Ok(Scaler { mean, std })
}

pub fn apply_scaler(scaler: &Scaler, windows: &[Window]) -> Vec<Window> {
    windows
        .iter()
        .map(|w| Window { values: w.values.iter().map(|&v| scaler.transform(v)).collect(), ..w.clone() })
        .collect()
}

pub fn invert_scaler(scaler: &Scaler, windows: &[Window]) -> Vec<Window> {
    windows
        .iter()
        .map(|w| Window { values: w.values.iter().map(|&v| scaler.inverse(v)).collect(), ..w.clone() })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self { train: 8, validation: 2, test: 2 }
    }
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectSplit {
    pub train: BTreeSet<String>,
    pub validation: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

/// Uniformly random disjoint partition. The input order does not matter.
pub fn split_subjects(
    subjects: &BTreeSet<String>,
    sizes: SplitSizes,
    seed: u64,
) -> Result<SubjectSplit, WindowingError> {
    if subjects.len() != sizes.total() {
        return Err(WindowingError::SplitSize {
            train: sizes.train,
            validation: sizes.validation,
            test: sizes.test,
            subjects: subjects.len(),
        });
    }
    let mut order: Vec<&String> = subjects.iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |range: std::ops::Range<usize>| order[range].iter().map(|s| (*s).clone()).collect();
    Ok(SubjectSplit {
        train: take(0..sizes.train),
        validation: take(sizes.train..sizes.train + sizes.validation),
        test: take(sizes.train + sizes.validation..sizes.total()),
    })
}

/// Category fractions of a training mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    pub adl: f64,
    pub real_fall: f64,
    pub synthetic_fall: f64,
}

impl MixSpec {
    /// 60 % ADL, 20 % real falls, 20 % synthetic falls.
    pub const AUGMENTED: MixSpec = MixSpec { adl: 0.6, real_fall: 0.2, synthetic_fall: 0.2 };
    /// 50 % ADL, 10 % real falls, 40 % synthetic falls.
    pub const QUANTITY_ABLATION: MixSpec = MixSpec { adl: 0.5, real_fall: 0.1, synthetic_fall: 0.4 };
    /// Real data only, keeping the ADL:fall ratio of [`MixSpec::AUGMENTED`].
    pub const BASELINE: MixSpec = MixSpec { adl: 0.75, real_fall: 0.25, synthetic_fall: 0.0 };

    pub fn new(adl: f64, real_fall: f64, synthetic_fall: f64) -> Result<Self, WindowingError> {
        let spec = Self { adl, real_fall, synthetic_fall };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fractions(&self) -> [f64; 3] {
        [self.adl, self.real_fall, self.synthetic_fall]
    }

    pub fn validate(&self) -> Result<(), WindowingError> {
        let f = self.fractions();
        let in_range = f.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x));
        if !in_range || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(WindowingError::InvalidMix(f));
        }
        Ok(())
    }
}

// Guards floor() against representation error, e.g. 250 * 0.4 = 99.999…
const FLOOR_SLACK: f64 = 1e-9;

/// Per-category draw counts for the given pool sizes.
///
/// The total size `T` is the largest value every pool can support at its
/// fraction: `T = min_c floor(pool_c / fraction_c)` over categories with a
/// positive fraction; each category then draws `floor(T · fraction_c)`.
pub fn plan_mix(pool_sizes: [usize; 3], spec: &MixSpec) -> Result<[usize; 3], WindowingError> {
    spec.validate()?;
    let fractions = spec.fractions();
    let total = fractions
        .iter()
        .zip(pool_sizes)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, n)| (n as f64 / f + FLOOR_SLACK).floor() as usize)
        .min()
        .unwrap_or(0);
    if total < 1 {
        let names = ["ADL", "real-fall", "synthetic-fall"];
        let starved: Vec<_> = (0..3)
            .filter(|&c| fractions[c] > 0.0 && pool_sizes[c] == 0)
            .map(|c| names[c])
            .collect();
        return Err(WindowingError::InfeasibleMix(format!(
            "pools {pool_sizes:?} cannot supply fractions {fractions:?} (empty: {})",
            starved.join(", ")
        )));
    }
    Ok(std::array::from_fn(|c| {
        ((total as f64 * fractions[c] + FLOOR_SLACK).floor() as usize).min(pool_sizes[c])
    }))
}

/// Draws each category without replacement and shuffles the result.
pub fn compose_training_mix(
    adl: &[Window],
    real_fall: &[Window],
    synthetic_fall: &[Window],
    spec: &MixSpec,
    seed: u64,
) -> Result<Vec<Window>, WindowingError> {
    let pools = [adl, real_fall, synthetic_fall];
    let counts = plan_mix(pools.map(<[Window]>::len), spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (pool, &count) in pools.iter().zip(&counts) {
        for i in index::sample(&mut rng, pool.len(), count).into_iter() {
            out.push(pool[i].clone());
        }
    }
    out.shuffle(&mut rng);
    Ok(out)
}

const CACHE_MAGIC: &[u8; 8] = b"SFWINDOW";
const CACHE_VERSION: u32 = 1;

fn label_code(l: Label) -> u8 {
    l.as_target()
}

fn provenance_code(p: Provenance) -> u8 {
    match p {
        Provenance::Real => 0,
        Provenance::Synthetic => 1,
    }
}

fn write_str(out: &mut impl Write, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

/// Binary window cache: magic, version, width, count, then per window the
/// label, provenance, subject, source, start offset and `W × 3` f64 values.
pub fn write_window_cache(out: &mut impl Write, windows: &[Window]) -> Result<(), WindowingError> {
    let width = windows.first().map_or(0, Window::len);
    if let Some(w) = windows.iter().find(|w| w.len() != width) {
        return Err(WindowingError::MixedWidths(width, w.len()));
    }
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&(width as u32).to_le_bytes())?;
    out.write_all(&(windows.len() as u64).to_le_bytes())?;
    for w in windows {
        out.write_all(&[label_code(w.label()), provenance_code(w.provenance())])?;
        write_str(out, w.subject().unwrap_or(""))?;
        write_str(out, w.source())?;
        out.write_all(&(w.start as u64).to_le_bytes())?;
        for v in w.values.iter().flatten() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact<const N: usize>(input: &mut impl Read) -> Result<[u8; N], WindowingError> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_str(input: &mut impl Read) -> Result<String, WindowingError> {
    let len = u32::from_le_bytes(read_exact(input)?) as usize;
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| WindowingError::Cache("string is not UTF-8".into()))
}

pub fn read_window_cache(input: &mut impl Read) -> Result<Vec<Window>, WindowingError> {
    if &read_exact::<8>(input)? != CACHE_MAGIC {
        return Err(WindowingError::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_exact(input)?);
    if version != CACHE_VERSION {
        return Err(WindowingError::Cache(format!("unsupported version {version}")));
    }
    let width = u32::from_le_bytes(read_exact(input)?) as usize;
    let count = u64::from_le_bytes(read_exact(input)?) as usize;
    let mut windows = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let [label, provenance] = read_exact::<2>(input)?;
        let label = match label {
            0 => Label::Adl,
            1 => Label::Fall,
            x => return Err(WindowingError::Cache(format!("bad label code {x}"))),
        };
        let provenance = match provenance {
            0 => Provenance::Real,
            1 => Provenance::Synthetic,
            x => return Err(WindowingError::Cache(format!("bad provenance code {x}"))),
        };
        let subject = read_str(input)?;
        let source = read_str(input)?;
        let start = u64::from_le_bytes(read_exact(input)?) as usize;
        let mut values = Vec::with_capacity(width);
        for _ in 0..width {
            let mut row = [0.0; 3];
            for v in &mut row {
                *v = f64::from_le_bytes(read_exact(input)?);
            }
            values.push(row);
        }
        let mut meta = SeriesMeta::new(label, provenance).with_source(source);
        if !subject.is_empty() {
            meta.subject_id = Some(Arc::from(subject));
        }
        windows.push(Window { values, meta, start });
    }
    Ok(windows)
}

/// Long-format debug export: one row per window sample.
pub fn windows_to_csv(windows: &[Window]) -> String {
    let mut out = String::from("window;label;provenance;subject;source;step;x;y;z\n");
    for (i, w) in windows.iter().enumerate() {
        for (t, v) in w.values.iter().enumerate() {
            out.push_str(&format!(
                "{i};{};{};{};{};{t};{:.6};{:.6};{:.6}\n",
                w.label().as_target(),
                w.provenance(),
                w.subject().unwrap_or(""),
                w.source(),
                v[0],
                v[1],
                v[2]
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn series(n: usize, label: Label) -> AccelSeries {
        let samples = (0..n).map(|i| [i as f64, -(i as f64), 0.5 * i as f64]).collect();
        AccelSeries::new(samples, 50.0, SeriesMeta::new(label, Provenance::Real).with_subject("S1")).unwrap()
    }

    fn windows_from(values: Vec<Vec<[f64; 3]>>) -> Vec<Window> {
        values
            .into_iter()
            .map(|values| Window { values, meta: SeriesMeta::new(Label::Adl, Provenance::Real), start: 0 })
            .collect()
    }

    #[test]
    fn window_counts() {
        assert_eq!(slide_windows(&series(128, Label::Fall), 128, 10).len(), 1);
        let two = slide_windows(&series(138, Label::Fall), 128, 10);
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].start, 10);
        assert_eq!(two[0].values[10..], two[1].values[..118]);
        assert!(slide_windows(&series(127, Label::Fall), 128, 10).is_empty());
    }

    #[test]
    fn windows_inherit_metadata() {
        let s = series(40, Label::Fall);
        for w in slide_windows(&s, 16, 5) {
            assert_eq!(w.meta, s.meta);
            assert_eq!(w.values, s.samples[w.start..w.start + 16]);
        }
    }

    #[test]
    fn window_all_skips_short() {
        let all = window_all(&[series(10, Label::Adl), series(30, Label::Fall)], 16, 4);
        assert_eq!(all.len(), window_count(30, 16, 4));
        assert!(all.iter().all(|w| w.label() == Label::Fall));
    }

    #[test]
    fn scaler_degenerate_and_symmetric() {
        let zeros = windows_from(vec![vec![[0.0; 3]; 8]; 3]);
        let s = fit_scaler(&zeros).unwrap();
        assert_eq!(s.mean, [0.0; 3]);
        assert_eq!(s.std, [SCALER_EPSILON; 3]);

        let sym = windows_from(vec![(0..8).map(|i| [if i % 2 == 0 { -1.0 } else { 1.0 }, 2.0, 0.0]).collect()]);
        let s = fit_scaler(&sym).unwrap();
        assert_eq!(s.mean[0], 0.0);
        assert_eq!(s.std[0], 1.0);
        assert!(matches!(fit_scaler(&[]), Err(WindowingError::EmptyFit)));
    }

    #[test]
    fn scaler_arithmetic() {
        let w = windows_from(vec![vec![[3.0, 3.0, 3.0]]]);
        let out = apply_scaler(&Scaler { mean: [1.0; 3], std: [2.0; 3] }, &w);
        assert_eq!(out[0].values[0], [1.0; 3]);
        assert_eq!(apply_scaler(&Scaler::IDENTITY, &w), w);
    }

    #[test]
    fn standardized_pool_has_zero_mean_unit_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let windows = windows_from(
            (0..20)
                .map(|_| (0..32).map(|_| [rng.gen_range(-5.0..9.0), rng.gen_range(0.0..1.0), rng.gen_range(-100.0..-50.0)]).collect())
                .collect(),
        );
        let scaler = fit_scaler(&windows).unwrap();
        let out = apply_scaler(&scaler, &windows);
        let n = (20 * 32) as f64;
        for k in 0..3 {
            let mean = out.iter().flat_map(|w| &w.values).map(|v| v[k]).sum::<f64>() / n;
            let var = out.iter().flat_map(|w| &w.values).map(|v| (v[k] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "{mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-6);
        }
        let back = invert_scaler(&scaler, &out);
        for (a, b) in back.iter().zip(&windows) {
            for (x, y) in a.values.iter().zip(&b.values) {
                for k in 0..3 {
                    assert!((x[k] - y[k]).abs() < 1e-9);
                }
            }
        }
    }

    fn subjects(n: usize) -> BTreeSet<String> {
        (0..n).map(|i| format!("S{i:02}")).collect()
    }

    #[test]
    fn split_partition() {
        let all = subjects(12);
        let split = split_subjects(&all, SplitSizes::default(), 7).unwrap();
        assert_eq!((split.train.len(), split.validation.len(), split.test.len()), (8, 2, 2));
        assert!(split.train.is_disjoint(&split.validation));
        assert!(split.train.is_disjoint(&split.test));
        assert!(split.validation.is_disjoint(&split.test));
        let union: BTreeSet<_> = split.train.iter().chain(&split.validation).chain(&split.test).cloned().collect();
        assert_eq!(union, all);
        assert_eq!(split, split_subjects(&all, SplitSizes::default(), 7).unwrap());
        assert!(matches!(
            split_subjects(&subjects(11), SplitSizes::default(), 7),
            Err(WindowingError::SplitSize { .. })
        ));
    }

    #[test]
    fn every_subject_is_tested_across_seeds() {
        let all = subjects(12);
        let mut tested = BTreeSet::new();
        for seed in 0..1000 {
            tested.extend(split_subjects(&all, SplitSizes::default(), seed).unwrap().test);
        }
        assert_eq!(tested, all);
    }

    fn pool(n: usize, label: Label, provenance: Provenance, tag: &str) -> Vec<Window> {
        (0..n)
            .map(|i| Window {
                values: vec![[i as f64, 0.0, 0.0]],
                meta: SeriesMeta::new(label, provenance).with_source(tag),
                start: i,
            })
            .collect()
    }

    #[test]
    fn mix_paper_ratio() {
        let out = compose_training_mix(
            &pool(600, Label::Adl, Provenance::Real, "a"),
            &pool(200, Label::Fall, Provenance::Real, "r"),
            &pool(200, Label::Fall, Provenance::Synthetic, "s"),
            &MixSpec::AUGMENTED,
            1,
        )
        .unwrap();
        assert_eq!(out.len(), 1000);
    }

    #[test]
    fn mix_all_adl_is_permutation() {
        let adl = pool(50, Label::Adl, Provenance::Real, "a");
        let mut out = compose_training_mix(&adl, &[], &[], &MixSpec::new(1.0, 0.0, 0.0).unwrap(), 9).unwrap();
        out.sort_by_key(|w| w.start);
        assert_eq!(out, adl);
    }

    #[test]
    fn mix_bounded_by_scarcest_pool() {
        // ADL: 100/0.5 = 200, real: 100/0.1 = 1000, synthetic: 100/0.4 = 250, so T = 200.
        let counts = plan_mix([100, 100, 100], &MixSpec::QUANTITY_ABLATION).unwrap();
        assert_eq!(counts, [100, 20, 80]);
        let out = compose_training_mix(
            &pool(100, Label::Adl, Provenance::Real, "a"),
            &pool(100, Label::Fall, Provenance::Real, "r"),
            &pool(100, Label::Fall, Provenance::Synthetic, "s"),
            &MixSpec::QUANTITY_ABLATION,
            4,
        )
        .unwrap();
        let count = |src: &str| out.iter().filter(|w| w.source() == src).count();
        assert_eq!([count("a"), count("r"), count("s")], [100, 20, 80]);
    }

    #[test]
    fn mix_rejects_empty_synthetic_pool() {
        let err = plan_mix([100, 100, 0], &MixSpec::QUANTITY_ABLATION).unwrap_err();
        assert!(matches!(err, WindowingError::InfeasibleMix(_)));
        assert!(MixSpec::new(0.5, 0.5, 0.5).is_err());
        assert!(MixSpec::new(1.2, -0.2, 0.0).is_err());
    }

    #[test]
    fn mix_is_seeded() {
        let a = pool(30, Label::Adl, Provenance::Real, "a");
        let r = pool(10, Label::Fall, Provenance::Real, "r");
        let s = pool(10, Label::Fall, Provenance::Synthetic, "s");
        let x = compose_training_mix(&a, &r, &s, &MixSpec::AUGMENTED, 5).unwrap();
        let y = compose_training_mix(&a, &r, &s, &MixSpec::AUGMENTED, 5).unwrap();
        let z = compose_training_mix(&a, &r, &s, &MixSpec::AUGMENTED, 6).unwrap();
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn cache_roundtrip() {
        let mut windows = slide_windows(&series(60, Label::Fall), 16, 8);
        windows[0].meta.subject_id = None;
        let mut buf = Vec::new();
        write_window_cache(&mut buf, &windows).unwrap();
        let back = read_window_cache(&mut buf.as_slice()).unwrap();
        assert_eq!(back, windows);
        buf[0] = b'X';
        assert!(read_window_cache(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_export_has_row_per_sample() {
        let windows = slide_windows(&series(20, Label::Adl), 8, 6);
        let csv = windows_to_csv(&windows);
        assert_eq!(csv.lines().count(), 1 + windows.len() * 8);
    }

    proptest! {
        #[test]
        fn count_law_matches_enumeration(n in 0usize..400, w in 1usize..150, stride in 1usize..40) {
            let naive = (0..n).filter(|s| s % stride == 0 && s + w <= n).count();
            prop_assert_eq!(window_count(n, w, stride), naive);
        }

        #[test]
        fn mix_counts_within_one_window(a in 0usize..400, r in 0usize..400, s in 0usize..400) {
            for spec in [MixSpec::AUGMENTED, MixSpec::QUANTITY_ABLATION] {
                if let Ok(counts) = plan_mix([a, r, s], &spec) {
                    let total: usize = counts.iter().sum();
                    for (c, f) in counts.iter().zip(spec.fractions()) {
                        prop_assert!((*c as f64 - f * total as f64).abs() < 1.0);
                    }
                }
            }
        }
    }
}
