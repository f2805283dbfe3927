//! Writing experiment and alignment reports to disk.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::alignment::AlignmentRun;
use super::experiment::{ExperimentReport, RunSummary};
use super::HarnessError;
use crate::metrics::DensityCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(HarnessError::Config(format!("unknown report format `{other}` (json or csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Experiment(ExperimentReport),
    Alignment(AlignmentRun),
}

impl Report {
    pub fn fingerprint(&self) -> &str {
        match self {
            Report::Experiment(r) => &r.fingerprint,
            Report::Alignment(r) => &r.fingerprint,
        }
    }

    fn stem(&self) -> String {
        match self {
            Report::Experiment(r) => format!("{}-{}", r.name, r.fingerprint),
            Report::Alignment(r) => format!("alignment-{}", r.fingerprint),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Data(format!("invalid report JSON: {e}")))
    }

    pub fn to_csv(&self) -> String {
        match self {
            Report::Experiment(r) => experiment_csv(r),
            Report::Alignment(r) => alignment_csv(r),
        }
    }
}

fn push_run(out: &mut String, condition: &str, run: &RunSummary) {
    for it in &run.iterations {
        let m = &it.metrics;
        out.push_str(&format!(
            "{condition};{};{};{:.6};{:.6};{:.6};{};{};{};{}\n",
            it.iteration, it.seed, m.precision, m.recall, m.f1, m.tp, m.fp, m.fn_, m.tn
        ));
    }
    out.push_str(&format!(
        "{condition};mean;;{:.6};{:.6};{:.6};;;;\n",
        run.mean_precision, run.mean_recall, run.mean_f1
    ));
}

fn experiment_csv(r: &ExperimentReport) -> String {
    let mut out = String::from("condition;iteration;seed;precision;recall;f1;tp;fp;fn;tn\n");
    push_run(&mut out, "augmented", &r.augmented);
    if let Some(b) = &r.baseline {
        push_run(&mut out, "baseline", b);
    }
    if let Some(d) = r.percent_delta {
        out.push_str(&format!("percent_delta;;;;;{d:.2};;;;\n"));
    }
    out
}

fn alignment_csv(r: &AlignmentRun) -> String {
    let a = &r.report;
    let mut out = String::from("metric;value\n");
    for (axis, ks) in ['x', 'y', 'z'].iter().zip(&a.ks) {
        out.push_str(&format!("ks_{axis}_statistic;{}\nks_{axis}_p_value;{}\n", ks.statistic, ks.p_value));
    }
    out.push_str(&format!("ks_mean_statistic;{}\nks_mean_p_value;{}\n", a.ks_mean_statistic, a.ks_mean_p_value));
    out.push_str(&format!("jsd;{}\ncoverage;{}\n", a.jsd, a.coverage));
    out.push_str(&format!("real_windows;{}\nsynthetic_windows;{}\n", a.real_windows, a.synthetic_windows));
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, HarnessError> {
    std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Writes the report in `format` to `out_dir` and, for alignment reports,
/// the density curves to `plot_dir`. Returns the written paths.
pub fn emit_report(
    report: &Report,
    format: ReportFormat,
    out_dir: &Path,
    plot_dir: Option<&Path>,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let stem = report.stem();
    let mut written = vec![match format {
        ReportFormat::Json => write(out_dir.join(format!("{stem}.json")), &report.to_json())?,
        ReportFormat::Csv => write(out_dir.join(format!("{stem}.csv")), &report.to_csv())?,
    }];
    if let (Report::Alignment(run), Some(dir)) = (report, plot_dir) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let a = &run.report;
        let mut curves: Vec<(String, &DensityCurve)> =
            vec![("real".into(), &a.real_density), ("synthetic".into(), &a.synthetic_density)];
        for axis in &a.per_axis {
            curves.push((format!("{}-real", axis.axis), &axis.real));
            curves.push((format!("{}-synthetic", axis.axis), &axis.synthetic));
        }
        for (name, curve) in curves {
            written.push(write(dir.join(format!("density-{}-{name}.csv", run.fingerprint)), &curve.to_csv())?);
        }
    }
    Ok(written)
}
