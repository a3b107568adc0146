//! Report types and their CSV and JSON forms.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cyclecensus_core::ensembles::SeededRng;
use cyclecensus_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::HarnessError;

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "ensemble",
    "d",
    "rho",
    "gamma",
    "epsilon",
    "r",
    "trials",
    "n_valid",
    "mean",
    "stderr",
    "theory",
    "ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    InvalidInput,
    DegenerateFamily,
    TrialInvalid,
    DegenerateTangency,
    DegeneratePolynomial,
    Truncation,
    NumericalFailure,
}

impl From<&CoreError> for TrialStatus {
    fn from(e: &CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) => Self::InvalidInput,
            CoreError::DegenerateFamily => Self::DegenerateFamily,
            CoreError::TrialInvalid(_) => Self::TrialInvalid,
            CoreError::DegenerateTangency { .. } => Self::DegenerateTangency,
            CoreError::DegeneratePolynomial(_) => Self::DegeneratePolynomial,
            CoreError::Truncation { .. } => Self::Truncation,
            CoreError::NumericalFailure(_) => Self::NumericalFailure,
        }
    }
}

/// One parameter combination; fields the experiment does not vary are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub d: Option<usize>,
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point_index: usize,
    pub trial_index: u64,
    pub seed: SeededRng,
    pub status: TrialStatus,
    /// The observed count (or certificate indicator, or deterministic value).
    pub value: Option<f64>,
    /// Melnikov zero count of the same trial, for return-map runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: ExperimentKind,
    pub ensemble: Option<String>,
    #[serde(flatten)]
    pub point: ParameterPoint,
    pub trials: usize,
    pub n_valid: usize,
    pub n_invalid: usize,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub theory: Option<f64>,
    pub ratio: Option<f64>,
    /// Fraction of valid trials whose value equals the reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
}

/// Least-squares line through `(ln d, mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub theory_slope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub points: Vec<ParameterPoint>,
    pub aggregates: Vec<AggregateRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<LogFit>,
    pub records: Vec<TrialRecord>,
}

/// Mean and standard error of `values`, in the order given.
pub fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Aggregate rows recomputed from the trial records.
pub fn aggregate(
    config: &ExperimentConfig,
    points: &[ParameterPoint],
    theory: &[Option<f64>],
    records: &[TrialRecord],
) -> Vec<AggregateRow> {
    let ensemble = ensemble_label(config);
    points
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let mine: Vec<&TrialRecord> = records.iter().filter(|r| r.point_index == i).collect();
            let valid: Vec<&TrialRecord> = mine
                .iter()
                .copied()
                .filter(|r| r.status == TrialStatus::Ok && r.value.is_some())
                .collect();
            let values: Vec<f64> = valid.iter().filter_map(|r| r.value).collect();
            let (mean, stderr) = mean_stderr(&values);
            let theory = theory[i];
            let ratio = match (mean, theory) {
                (Some(m), Some(t)) if t != 0.0 => Some(m / t),
                _ => None,
            };
            let with_ref: Vec<&&TrialRecord> =
                valid.iter().filter(|r| r.reference.is_some()).collect();
            let agreement = (!with_ref.is_empty()).then(|| {
                with_ref.iter().filter(|r| r.reference == r.value).count() as f64
                    / with_ref.len() as f64
            });
            AggregateRow {
                experiment: config.experiment,
                ensemble: ensemble.clone(),
                point: *point,
                trials: mine.len(),
                n_valid: values.len(),
                n_invalid: mine.len() - values.len(),
                mean,
                stderr,
                theory,
                ratio,
                agreement,
            }
        })
        .collect()
}

fn ensemble_label(config: &ExperimentConfig) -> Option<String> {
    match (config.experiment, &config.ensemble) {
        (_, Some(e)) => Some(e.name().to_string()),
        (ExperimentKind::PowerLaw, None) => Some("power_law".into()),
        (ExperimentKind::XRho, None) => Some("uniform_cube".into()),
        _ => None,
    }
}

/// Least-squares fit of `mean` against `ln d`; `None` with fewer than two
/// distinct degrees.
pub fn log_fit(rows: &[AggregateRow], theory_slope: f64) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some(((r.point.d? as f64).ln(), r.mean?)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some(LogFit {
        slope,
        intercept: my - slope * mx,
        theory_slope,
        ratio: slope / theory_slope,
    })
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// 17 significant digits.
fn float_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.aggregates {
            let p = &row.point;
            w.write_record([
                row.experiment.name().to_string(),
                row.ensemble.clone().unwrap_or_default(),
                cell(p.d),
                float_cell(p.rho),
                float_cell(p.gamma),
                float_cell(p.epsilon),
                float_cell(p.r),
                row.trials.to_string(),
                row.n_valid.to_string(),
                float_cell(row.mean),
                float_cell(row.stderr),
                float_cell(row.theory),
                float_cell(row.ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")
    }

    pub fn to_bytes(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        match format {
            // writing to memory cannot fail
            Format::Csv => self.write_csv(&mut buf).expect("in-memory CSV"),
            Format::Json => self.write_json(&mut buf).expect("in-memory JSON"),
        }
        buf
    }

    /// Invalid trials may not exceed 1% at any parameter point.
    pub fn check_exclusions(&self) -> Result<(), HarnessError> {
        for row in &self.aggregates {
            if row.n_invalid as f64 > 0.01 * row.trials as f64 {
                return Err(HarnessError::Run(format!(
                    "{} of {} trials invalid at {:?}",
                    row.n_invalid, row.trials, row.point
                )));
            }
        }
        Ok(())
    }
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn emit_report(
    report: &ExperimentReport,
    format: Format,
    path: Option<&Path>,
) -> Result<(), HarnessError> {
    let bytes = report.to_bytes(format);
    match path {
        Some(p) => {
            let io_err = |source| HarnessError::Io {
                path: p.to_path_buf(),
                source,
            };
            let mut f = BufWriter::new(File::create(p).map_err(io_err)?);
            f.write_all(&bytes).map_err(io_err)?;
            f.flush().map_err(io_err)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|source| HarnessError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"experiment":"melnikov_zeros","ensemble":{"kind":"kostlan"},"d_list":[5],"rho":1.0,"trials":4,"master_seed":1}"#,
        )
        .unwrap()
    }

    fn record(i: u64, status: TrialStatus, value: Option<f64>) -> TrialRecord {
        TrialRecord {
            point_index: 0,
            trial_index: i,
            seed: SeededRng::new(1, i),
            status,
            value,
            reference: None,
            message: None,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let cfg = config();
        let report = ExperimentReport {
            metadata: Metadata {
                version: "0".into(),
                config: cfg,
            },
            points: vec![],
            aggregates: vec![],
            fit: None,
            records: vec![],
        };
        let text = String::from_utf8(report.to_bytes(Format::Csv)).unwrap();
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn invalid_trials_are_excluded() {
        let cfg = config();
        let points = vec![ParameterPoint {
            d: Some(5),
            rho: Some(1.0),
            ..Default::default()
        }];
        let records = vec![
            record(0, TrialStatus::Ok, Some(1.0)),
            record(1, TrialStatus::TrialInvalid, None),
            record(2, TrialStatus::Ok, Some(3.0)),
            record(3, TrialStatus::Ok, Some(2.0)),
        ];
        let rows = aggregate(&cfg, &points, &[Some(4.0)], &records);
        let row = &rows[0];
        assert_eq!((row.trials, row.n_valid, row.n_invalid), (4, 3, 1));
        assert_eq!(row.mean, Some(2.0));
        assert!((row.stderr.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(row.ratio, Some(0.5));
        let report = ExperimentReport {
            metadata: Metadata {
                version: "0".into(),
                config: cfg,
            },
            points,
            aggregates: rows,
            fit: None,
            records,
        };
        assert!(matches!(
            report.check_exclusions(),
            Err(HarnessError::Run(_))
        ));
    }

    #[test]
    fn csv_cells() {
        assert_eq!(float_cell(Some(0.1)), "1.0000000000000001e-1");
        assert_eq!(float_cell(None), "");
        // 17 significant digits recover the double
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(float_cell(Some(x)).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn log_fit_recovers_a_line() {
        let cfg = config();
        let rows: Vec<AggregateRow> = [10usize, 100, 1000]
            .iter()
            .map(|&d| AggregateRow {
                experiment: cfg.experiment,
                ensemble: None,
                point: ParameterPoint {
                    d: Some(d),
                    ..Default::default()
                },
                trials: 1,
                n_valid: 1,
                n_invalid: 0,
                mean: Some(0.5 * (d as f64).ln() + 2.0),
                stderr: None,
                theory: None,
                ratio: None,
                agreement: None,
            })
            .collect();
        let fit = log_fit(&rows, 0.25).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12 && (fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.ratio - 2.0).abs() < 1e-12);
        assert!(log_fit(&rows[..1], 0.25).is_none());
    }
}
