use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use synthfall::classifier::{write_checkpoint, Checkpoint};
use synthfall::harness::{
    emit_report, generate_fixture, run_ablation_quantity, run_alignment, run_experiment, run_single, AlignmentConfig,
    ExperimentConfig, FixtureSpec, HarnessError, Report, ReportFormat, WindowConfig,
};
use synthfall::ingest::{generate_prompt_variants, parse_tags, read_motion_array, write_accel_csv, DatasetCatalog, PromptCatalog, VariantTag};
use synthfall::kinematics::{differentiate_with, extract_joint, Differencing, Label, Provenance, SensorPlacement, SeriesMeta};
use synthfall::metrics::{format_delta, Normalization};
use synthfall::windowing::{window_all, windows_to_csv, write_window_cache, MixSpec, SplitSizes};

#[derive(Parser)]
#[command(name = "synthfall", version, about = "Synthetic accelerometer evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate manifests and print a summary.
    Ingest(IngestArgs),
    /// Convert a motion array (.npy) into an accelerometer CSV.
    Kinematics(KinematicsArgs),
    /// Window every series of a manifest into a binary cache.
    Windows(WindowsArgs),
    /// Compare real and synthetic fall windows.
    Align(AlignArgs),
    /// Train and evaluate one split and save the model.
    Train(TrainArgs),
    /// Run the augmentation experiment over several random splits.
    Experiment(ExperimentArgs),
    /// Run the experiment with the 50/10/40 mix.
    AblateQuantity(ExperimentArgs),
    /// Generate demographic and placement variants of a prompt catalog.
    Prompts(PromptsArgs),
    /// Re-emit a saved report as JSON or CSV.
    Report(ReportArgs),
    /// Write a small separable dataset with synthetic sources.
    MakeFixture(FixtureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Manifest files to validate.
    #[arg(required = true)]
    manifests: Vec<PathBuf>,
    /// Also read every referenced series.
    #[arg(long)]
    load: bool,
}

#[derive(Args)]
struct KinematicsArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value = "left_wrist")]
    placement: String,
    /// Seconds between frames; overrides --frame-rate.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    frame_rate: Option<f64>,
    #[arg(long)]
    central_diff: bool,
    #[arg(long, value_enum, default_value = "fall")]
    label: LabelArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Adl,
    Fall,
}

#[derive(Args)]
struct WindowsArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = synthfall::windowing::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = synthfall::windowing::DEFAULT_STRIDE)]
    stride: usize,
    #[arg(long, short)]
    output: PathBuf,
    /// Also write the windows as CSV for inspection.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// JSON alignment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    real: Option<PathBuf>,
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    normalization: Option<NormArg>,
    #[arg(long)]
    central_diff: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Pooled,
    PerAxis,
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for the report file.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Directory for density-curve CSVs.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigOverrides {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Synthetic manifest; repeat to pool several sources.
    #[arg(long = "synthetic")]
    synthetic: Vec<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Training mix as `adl,real_fall,synthetic_fall` fractions.
    #[arg(long, value_parser = parse_mix)]
    mix: Option<MixSpec>,
    /// Subject split as `train,validation,test`.
    #[arg(long, value_parser = parse_split)]
    split: Option<SplitSizes>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dense: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    no_shuffle: bool,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Also run the real-only baseline.
    #[arg(long)]
    baseline: bool,
    /// Baseline master seed; differs from --seed for an unpaired comparison.
    #[arg(long)]
    baseline_seed: Option<u64>,
    #[arg(long)]
    central_diff: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    config: ConfigOverrides,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigOverrides,
    /// Where to write the model checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Where to write the per-epoch history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct PromptsArgs {
    /// Comma-separated variant tags; defaults to the seven non-waist tags.
    #[arg(long)]
    tags: Option<String>,
    /// Base prompts, one per line; defaults to the bundled catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 12)]
    subjects: usize,
    #[arg(long, default_value_t = 96)]
    series_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_mix(s: &str) -> Result<MixSpec, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v[..] {
        [a, r, syn] => MixSpec::new(a, r, syn).map_err(|e| e.to_string()),
        _ => Err("expected three comma-separated fractions".into()),
    }
}

fn parse_split(s: &str) -> Result<SplitSizes, String> {
    let v: Vec<usize> = s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v[..] {
        [train, validation, test] => Ok(SplitSizes { train, validation, test }),
        _ => Err("expected three comma-separated subject counts".into()),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io { path: path.to_path_buf(), source: e }
}

fn read(path: &Path) -> Result<Vec<u8>, HarnessError> {
    fs::read(path).map_err(io_err(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn differencing(central: bool) -> Differencing {
    if central {
        Differencing::CentralSecondDifference
    } else {
        Differencing::ForwardOverDtSquared
    }
}

fn resolve_config(o: &ConfigOverrides) -> Result<ExperimentConfig, HarnessError> {
    let mut c = match &o.config {
        Some(path) => {
            let mut c = ExperimentConfig::load(path)?;
            c.resolve_paths(path.parent().unwrap_or(Path::new(".")));
            c
        }
        None => ExperimentConfig::default(),
    };
    c.seed = o.seed;
    if let Some(m) = &o.manifest {
        c.manifest = m.clone();
    }
    if !o.synthetic.is_empty() {
        c.synthetic_manifests = o.synthetic.clone();
    }
    if let Some(v) = o.window {
        c.window.size = v;
    }
    if let Some(v) = o.stride {
        c.window.stride = v;
    }
    if let Some(v) = o.mix {
        c.mix = v;
    }
    if let Some(v) = o.split {
        c.split = v;
    }
    if let Some(v) = o.iterations {
        c.iterations = v;
    }
    if let Some(v) = o.hidden {
        c.model.hidden = v;
    }
    if let Some(v) = o.dense {
        c.model.dense = v;
    }
    if let Some(v) = o.learning_rate {
        c.train.learning_rate = v;
    }
    if let Some(v) = o.max_epochs {
        c.train.max_epochs = v;
    }
    if let Some(v) = o.patience {
        c.train.patience = v;
    }
    if let Some(v) = o.batch_size {
        c.train.batch_size = v;
    }
    if o.no_shuffle {
        c.train.shuffle = false;
    }
    if let Some(v) = o.threshold {
        c.metrics.threshold = v;
    }
    if let Some(v) = o.bins {
        c.metrics.bins = v;
    }
    if let Some(v) = o.k {
        c.metrics.k = v;
    }
    if o.baseline {
        c.baseline.enabled = true;
    }
    if let Some(v) = o.baseline_seed {
        c.baseline.enabled = true;
        c.baseline.seed = Some(v);
    }
    if o.central_diff {
        c.differencing = Differencing::CentralSecondDifference;
    }
    Ok(c)
}

fn emit(report: &Report, out: &OutputArgs) -> Result<(), HarnessError> {
    for path in emit_report(report, out.format.into(), &out.out, out.plot_dir.as_deref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_experiment(r: &synthfall::harness::ExperimentReport) {
    for it in &r.augmented.iterations {
        println!("iteration {}: F1 {:.4} (P {:.4}, R {:.4})", it.iteration, it.metrics.f1, it.metrics.precision, it.metrics.recall);
    }
    println!("mean F1 {:.4}", r.augmented.mean_f1);
    if let Some(b) = &r.baseline {
        println!("baseline mean F1 {:.4}", b.mean_f1);
    }
    if let Some(d) = r.percent_delta {
        println!("change vs baseline {}", format_delta(d));
    }
    println!("fingerprint {}", r.fingerprint);
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Ingest(a) => {
            for m in &a.manifests {
                let catalog = DatasetCatalog::load(m)?;
                if a.load {
                    for e in catalog.entries() {
                        e.load_series(Differencing::default())?;
                    }
                }
                let hist: Vec<serde_json::Value> = catalog
                    .activity_histogram()
                    .into_iter()
                    .map(|((label, kind), n)| serde_json::json!({"activity": label, "kind": kind, "count": n}))
                    .collect();
                let summary = serde_json::json!({
                    "manifest": m,
                    "entries": catalog.len(),
                    "subjects": catalog.subjects().len(),
                    "adl": catalog.count(Label::Adl),
                    "fall": catalog.count(Label::Fall),
                    "activities": hist,
                });
                println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            }
        }
        Command::Kinematics(a) => {
            let placement: SensorPlacement = a.placement.parse().map_err(|e: synthfall::kinematics::KinematicsError| HarnessError::Config(e.to_string()))?;
            let rate = match (a.dt, a.frame_rate) {
                (Some(dt), _) if dt > 0.0 && dt.is_finite() => Some(1.0 / dt),
                (Some(dt), _) => return Err(HarnessError::Config(format!("--dt must be positive, got {dt}"))),
                (None, r) => r,
            };
            let traj = read_motion_array(&read(&a.input)?, rate)?;
            let label = match a.label {
                LabelArg::Adl => Label::Adl,
                LabelArg::Fall => Label::Fall,
            };
            let pos = extract_joint(&traj, placement);
            let series = differentiate_with(&pos, differencing(a.central_diff), SeriesMeta::new(label, Provenance::Synthetic))?;
            write(&a.output, &write_accel_csv(&series))?;
            println!("wrote {} samples at {} Hz to {}", series.samples.len(), series.sampling_rate, a.output.display());
        }
        Command::Windows(a) => {
            WindowConfig { size: a.window, stride: a.stride }.validate()?;
            let catalog = DatasetCatalog::load(&a.manifest)?;
            let series = catalog.entries().iter().map(|e| e.load_series(Differencing::default())).collect::<Result<Vec<_>, _>>()?;
            let windows = window_all(&series, a.window, a.stride);
            let file = fs::File::create(&a.output).map_err(io_err(&a.output))?;
            write_window_cache(&mut BufWriter::new(file), &windows)?;
            if let Some(csv) = &a.csv {
                write(csv, windows_to_csv(&windows).as_bytes())?;
            }
            println!("wrote {} windows to {}", windows.len(), a.output.display());
        }
        Command::Align(a) => {
            let mut c = match &a.config {
                Some(p) => serde_json::from_slice::<AlignmentConfig>(&read(p)?)
                    .map_err(|e| HarnessError::Config(format!("invalid alignment config: {e}")))?,
                None => AlignmentConfig::default(),
            };
            if let Some(v) = a.real {
                c.real_manifest = v;
            }
            if let Some(v) = a.synthetic {
                c.synthetic_manifest = v;
            }
            if let Some(v) = a.window {
                c.window.size = v;
            }
            if let Some(v) = a.stride {
                c.window.stride = v;
            }
            if let Some(v) = a.bins {
                c.options.bins = v;
            }
            if let Some(v) = a.k {
                c.options.k = v;
            }
            if let Some(v) = a.normalization {
                c.options.normalization = match v {
                    NormArg::Pooled => Normalization::Pooled,
                    NormArg::PerAxis => Normalization::PerAxis,
                };
            }
            if a.central_diff {
                c.differencing = Differencing::CentralSecondDifference;
            }
            if c.real_manifest.as_os_str().is_empty() || c.synthetic_manifest.as_os_str().is_empty() {
                return Err(HarnessError::Config("both --real and --synthetic manifests are required".into()));
            }
            let run = run_alignment(&c)?;
            let r = &run.report;
            for (axis, ks) in ['x', 'y', 'z'].iter().zip(&r.ks) {
                println!("KS {axis}: D {:.4} p {:.4e}", ks.statistic, ks.p_value);
            }
            println!("KS mean p {:.4e}  JSD {:.4}  coverage {:.4}", r.ks_mean_p_value, r.jsd, r.coverage);
            emit(&Report::Alignment(run), &a.output)?;
        }
        Command::Train(a) => {
            let config = resolve_config(&a.config)?;
            let single = run_single(&config)?;
            let m = &single.result.metrics;
            println!("test F1 {:.4} (P {:.4}, R {:.4}) after {} epochs", m.f1, m.precision, m.recall, single.history.epochs());
            let file = fs::File::create(&a.checkpoint).map_err(io_err(&a.checkpoint))?;
            let ck = Checkpoint { model: single.model, window: config.window.size };
            write_checkpoint(&mut BufWriter::new(file), &ck)?;
            if let Some(h) = &a.history {
                write(h, single.history.to_csv().as_bytes())?;
            }
        }
        Command::Experiment(a) => {
            let report = run_experiment(&resolve_config(&a.config)?)?;
            print_experiment(&report);
            emit(&Report::Experiment(report), &a.output)?;
        }
        Command::AblateQuantity(a) => {
            let report = run_ablation_quantity(&resolve_config(&a.config)?)?;
            print_experiment(&report);
            emit(&Report::Experiment(report), &a.output)?;
        }
        Command::Prompts(a) => {
            let catalog = match &a.catalog {
                Some(p) => {
                    let text = String::from_utf8(read(p)?).map_err(|e| HarnessError::Data(format!("{}: {e}", p.display())))?;
                    PromptCatalog::parse(&text)?
                }
                None => PromptCatalog::bundled(),
            };
            let tags = match &a.tags {
                Some(t) => parse_tags(t).map_err(|e| HarnessError::Config(e.to_string()))?,
                None => VariantTag::DEFAULT_SET.to_vec(),
            };
            let prompts = generate_prompt_variants(&catalog, &tags)?;
            let text = prompts.join("\n") + "\n";
            match &a.output {
                Some(p) => {
                    write(p, text.as_bytes())?;
                    println!("wrote {} prompts to {}", prompts.len(), p.display());
                }
                None => print!("{text}"),
            }
        }
        Command::Report(a) => {
            let text = String::from_utf8(read(&a.input)?).map_err(|e| HarnessError::Data(e.to_string()))?;
            emit(&Report::from_json(&text)?, &a.output)?;
        }
        Command::MakeFixture(a) => {
            let spec = FixtureSpec { subjects: a.subjects, series_len: a.series_len, seed: a.seed, ..FixtureSpec::default() };
            let m = generate_fixture(&a.out, &spec)?;
            println!("real manifest {}", m.real.display());
            for s in &m.synthetic {
                println!("synthetic manifest {}", s.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
