use std::path::Path;

use synthfall::classifier::{Architecture, TrainConfig};
use synthfall::harness::{
    emit_report, generate_fixture, run_ablation_quantity, run_alignment, run_experiment, AlignmentConfig, BaselineConfig,
    ExperimentConfig, FixtureManifests, FixtureSpec, Report, ReportFormat, WindowConfig,
};
use synthfall::metrics::{AlignmentOptions, DensityCurve, Normalization};
use synthfall::windowing::MixSpec;

fn fixture(dir: &Path, spec: FixtureSpec) -> FixtureManifests {
    generate_fixture(dir, &spec).unwrap()
}

/// Tiny network and few epochs; these tests check bookkeeping, not accuracy.
fn quick_config(m: &FixtureManifests, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        manifest: m.real.clone(),
        synthetic_manifests: m.synthetic.clone(),
        window: WindowConfig { size: 32, stride: 16 },
        iterations: 2,
        seed,
        model: Architecture { hidden: 8, dense: 4 },
        train: TrainConfig { max_epochs: 2, patience: 1, batch_size: 32, ..TrainConfig::default() },
        ..ExperimentConfig::default()
    }
}

#[test]
fn paired_baseline_reuses_splits() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let mut config = quick_config(&m, 5);
    config.baseline = BaselineConfig { enabled: true, ..BaselineConfig::default() };
    let report = run_experiment(&config).unwrap();
    let base = report.baseline.as_ref().unwrap();
    assert_eq!(report.paired, Some(true));
    for (a, b) in report.augmented.iterations.iter().zip(&base.iterations) {
        assert_eq!(a.split, b.split);
        assert_eq!(b.mix_counts[2], 0);
        assert!(b.synthetic_sources.is_empty());
    }
    assert!(report.percent_delta.is_some() || base.mean_f1 == 0.0);

    config.baseline.seed = Some(99);
    let unpaired = run_experiment(&config).unwrap();
    assert_eq!(unpaired.paired, Some(false));
}

#[test]
fn splits_are_disjoint_and_cover_every_subject() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let report = run_experiment(&quick_config(&m, 11)).unwrap();
    for it in &report.augmented.iterations {
        let s = &it.split;
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 2, 2));
        let all: std::collections::BTreeSet<_> = s.train.iter().chain(&s.validation).chain(&s.test).collect();
        assert_eq!(all.len(), 12);
    }
    let mean = report.augmented.iterations.iter().map(|r| r.metrics.f1).sum::<f64>() / 2.0;
    assert!((report.augmented.mean_f1 - mean).abs() < 1e-12);
}

#[test]
fn fingerprint_tracks_every_field() {
    let base = ExperimentConfig { manifest: "real.json".into(), ..ExperimentConfig::default() };
    type Mutation = Box<dyn Fn(&mut ExperimentConfig)>;
    let mutations: Vec<Mutation> = vec![
        Box::new(|c| c.seed += 1),
        Box::new(|c| c.iterations += 1),
        Box::new(|c| c.window.stride += 1),
        Box::new(|c| c.window.size += 1),
        Box::new(|c| c.mix = MixSpec::QUANTITY_ABLATION),
        Box::new(|c| c.split.train -= 1),
        Box::new(|c| c.model.hidden += 1),
        Box::new(|c| c.train.learning_rate *= 2.0),
        Box::new(|c| c.train.patience += 1),
        Box::new(|c| c.metrics.bins += 1),
        Box::new(|c| c.metrics.threshold = 0.4),
        Box::new(|c| c.baseline.enabled = true),
        Box::new(|c| c.synthetic_manifests.push("syn.json".into())),
        Box::new(|c| c.manifest = "other.json".into()),
    ];
    let fp = base.fingerprint();
    assert_eq!(fp.len(), 16);
    let mut seen = std::collections::HashSet::from([fp.clone()]);
    for mutate in &mutations {
        let mut c = base.clone();
        mutate(&mut c);
        assert!(seen.insert(c.fingerprint()), "mutation left the fingerprint unchanged");
    }
    assert_eq!(base.clone().fingerprint(), fp);
}

#[test]
fn experiment_report_roundtrips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let report = Report::Experiment(run_experiment(&quick_config(&m, 3)).unwrap());
    let back = Report::from_json(&report.to_json()).unwrap();
    assert_eq!(back, report);

    let out = dir.path().join("out");
    let written = emit_report(&report, ReportFormat::Json, &out, None).unwrap();
    assert_eq!(written, vec![out.join(format!("experiment-{}.json", report.fingerprint()))]);
    let csv = emit_report(&report, ReportFormat::Csv, &out, None).unwrap();
    assert!(std::fs::read_to_string(&csv[0]).unwrap().lines().count() > 2);
}

#[test]
fn ablation_draws_synthetic_windows_from_every_source() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    for seed in [1, 2, 3] {
        let mut config = quick_config(&m, seed);
        config.iterations = 1;
        config.train.max_epochs = 1;
        let report = run_ablation_quantity(&config).unwrap();
        assert_eq!(report.name, "ablate_quantity");
        assert_eq!(report.config.mix, MixSpec::QUANTITY_ABLATION);
        let it = &report.augmented.iterations[0];
        let names: Vec<&str> = it.synthetic_sources.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(names, ["parco", "sato", "t2m"]);
        assert_eq!(it.synthetic_sources.iter().map(|(_, n)| n).sum::<usize>(), it.mix_counts[2]);
    }
}

#[test]
fn infeasible_requests_fail_with_the_right_kind() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec { subjects: 10, synthetic_series_per_source: 2, ..FixtureSpec::default() });
    let config = quick_config(&m, 1);
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");

    let mut config = quick_config(&m, 1);
    config.split.train = 6;
    config.synthetic_manifests.clear();
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3, "a synthetic share with no synthetic pool: {err}");

    let mut config = quick_config(&m, 1);
    config.mix = MixSpec { adl: 0.7, real_fall: 0.2, synthetic_fall: 0.2 };
    assert_eq!(run_experiment(&config).unwrap_err().exit_code(), 2);
}

#[test]
fn alignment_of_a_set_with_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let config = AlignmentConfig {
        real_manifest: m.real.clone(),
        synthetic_manifest: m.real.clone(),
        window: WindowConfig { size: 32, stride: 16 },
        ..AlignmentConfig::default()
    };
    let run = run_alignment(&config).unwrap();
    let r = &run.report;
    assert_eq!(r.real_windows, r.synthetic_windows);
    assert!(r.ks.iter().all(|k| k.statistic == 0.0 && k.p_value == 1.0));
    assert_eq!(r.ks_mean_p_value, 1.0);
    assert!(r.jsd.abs() < 1e-12);
    assert_eq!(r.coverage, 1.0);
}

#[test]
fn shifted_synthetic_source_scores_worse() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let align = |syn: &Path| {
        let config = AlignmentConfig {
            real_manifest: m.real.clone(),
            synthetic_manifest: syn.to_path_buf(),
            window: WindowConfig { size: 32, stride: 16 },
            options: AlignmentOptions { normalization: Normalization::PerAxis, ..AlignmentOptions::default() },
            ..AlignmentConfig::default()
        };
        run_alignment(&config).unwrap()
    };
    // Source 0 has the smallest gain and offset error, source 2 the largest.
    let (near, far) = (align(&m.synthetic[0]), align(&m.synthetic[2]));
    assert!(far.report.ks[0].statistic > near.report.ks[0].statistic);
    assert!(far.report.jsd > near.report.jsd);
    assert_eq!(far.report.per_axis.len(), 3);

    let plots = dir.path().join("plots");
    let written = emit_report(&Report::Alignment(far.clone()), ReportFormat::Csv, dir.path(), Some(&plots)).unwrap();
    assert_eq!(written.len(), 1 + 2 + 6);
    let real_curve = plots.join(format!("density-{}-real.csv", far.fingerprint));
    let curve = DensityCurve::from_csv(&std::fs::read_to_string(real_curve).unwrap()).unwrap();
    assert_eq!(curve.densities.len(), far.config.options.bins);
    let width = curve.bin_centers[1] - curve.bin_centers[0];
    let mass: f64 = curve.densities.iter().map(|d| d * width).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn synthetic_manifests_must_not_leak_into_the_real_pool() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), FixtureSpec::default());
    let mut config = quick_config(&m, 1);
    config.manifest = m.synthetic[0].clone();
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("synthetic"), "{err}");
}
