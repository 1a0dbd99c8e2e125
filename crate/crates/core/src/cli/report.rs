use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

/// One cell of a trial record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Flag(bool),
    /// The trial errored before this field was computed.
    Missing,
}

impl Value {
    fn csv_cell(self) -> String {
        match self {
            Value::Num(x) => format!("{x:.6e}"),
            Value::Flag(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            // Non-finite numbers (e.g. an unbounded coefficient) become strings.
            Value::Num(x) if x.is_finite() => s.serialize_f64(x),
            Value::Num(x) => s.serialize_str(&x.to_string()),
            Value::Flag(b) => s.serialize_bool(b),
            Value::Missing => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

impl Outcome {
    fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    /// One value per column of the owning report.
    pub values: Vec<Value>,
    pub outcome: Outcome,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    /// Largest finite value among the `*_residual` columns.
    pub max_residual: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub generator: String,
    pub base_seed: u64,
    pub rel_eq: f64,
    pub columns: Vec<&'static str>,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

struct RecordView<'a> {
    columns: &'a [&'static str],
    record: &'a TrialRecord,
}

impl Serialize for RecordView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = self.record;
        let mut map = s.serialize_map(Some(7 + self.columns.len()))?;
        map.serialize_entry("trial", &r.trial)?;
        map.serialize_entry("seed", &r.seed)?;
        map.serialize_entry("d", &r.d)?;
        map.serialize_entry("N", &r.n)?;
        for (name, value) in self.columns.iter().zip(&r.values) {
            map.serialize_entry(name, value)?;
        }
        map.serialize_entry("verdict", &r.outcome)?;
        map.serialize_entry("error", &r.error)?;
        map.end()
    }
}

impl Serialize for SuiteReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<RecordView<'_>> = self
            .records
            .iter()
            .map(|record| RecordView {
                columns: &self.columns,
                record,
            })
            .collect();
        let mut st = s.serialize_struct("SuiteReport", 6)?;
        st.serialize_field("suite", &self.suite)?;
        st.serialize_field("generator", &self.generator)?;
        st.serialize_field("seed", &self.base_seed)?;
        st.serialize_field("rel_eq", &self.rel_eq)?;
        st.serialize_field("aggregate", &self.aggregate)?;
        st.serialize_field("trials", &records)?;
        st.end()
    }
}

impl SuiteReport {
    pub(super) fn new(
        cfg: &ExperimentConfig,
        columns: Vec<&'static str>,
        mut records: Vec<TrialRecord>,
        wall_time_ms: f64,
    ) -> Self {
        records.sort_by_key(|r| r.trial);
        let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
        let max_residual = records
            .iter()
            .flat_map(|r| columns.iter().zip(&r.values))
            .filter(|(name, _)| name.ends_with("residual"))
            .filter_map(|(_, v)| match v {
                Value::Num(x) if x.is_finite() => Some(*x),
                _ => None,
            })
            .fold(0.0, f64::max);
        let aggregate = Aggregate {
            pass: count(Outcome::Pass),
            fail: count(Outcome::Fail),
            indeterminate: count(Outcome::Indeterminate),
            max_residual,
            wall_time_ms,
        };
        SuiteReport {
            suite: cfg.suite.name().to_string(),
            generator: format!("{:?}", cfg.generator).to_lowercase(),
            base_seed: cfg.seed,
            rel_eq: cfg.tol.rel_eq,
            columns,
            records,
            aggregate,
        }
    }

    pub fn trials(&self) -> usize {
        self.records.len()
    }

    pub fn passed(&self) -> bool {
        self.aggregate.fail == 0
    }

    /// Copy with the wall-time field zeroed, for byte comparisons.
    pub fn without_wall_time(&self) -> SuiteReport {
        let mut r = self.clone();
        r.aggregate.wall_time_ms = 0.0;
        r
    }

    pub fn column(&self, name: &str) -> Option<Vec<Value>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.records.iter().map(|r| r.values[k]).collect())
    }

    /// `suite, trial, seed, d, N, <suite fields>, error, verdict`.
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["suite", "trial", "seed", "d", "N"]
            .map(String::from)
            .to_vec();
        h.extend(self.columns.iter().map(|c| c.to_string()));
        h.push("error".into());
        h.push("verdict".into());
        h
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(self.csv_header()).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                self.suite.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.d.to_string(),
                r.n.to_string(),
            ];
            row.extend(r.values.iter().map(|v| v.csv_cell()));
            row.push(r.error.clone().unwrap_or_default());
            row.push(r.outcome.as_str().into());
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization is infallible");
        s.push('\n');
        s
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:<12} trials={:<4} pass={:<4} fail={:<4} indeterminate={:<4} max_residual={:.3e} time={:.1}ms",
            self.suite,
            self.trials(),
            self.aggregate.pass,
            self.aggregate.fail,
            self.aggregate.indeterminate,
            self.aggregate.max_residual,
            self.aggregate.wall_time_ms
        )
    }
}

pub fn save_report(
    report: &SuiteReport,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let text = match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv()?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// `out.csv` becomes `out_<suite>.csv`.
pub fn per_suite_path(path: &Path, suite: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suite}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suite}"),
    };
    path.with_file_name(name)
}

/// Writes several reports: a JSON array in one file, or one CSV per suite.
/// Returns the paths written.
pub fn save_reports(
    reports: &[SuiteReport],
    path: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    match (reports, format) {
        ([single], _) => {
            save_report(single, path, format)?;
            Ok(vec![path.to_path_buf()])
        }
        (_, OutputFormat::Json) => {
            let mut s =
                serde_json::to_string_pretty(reports).expect("report serialization is infallible");
            s.push('\n');
            fs::write(path, s)?;
            Ok(vec![path.to_path_buf()])
        }
        (_, OutputFormat::Csv) => reports
            .iter()
            .map(|r| {
                let p = per_suite_path(path, &r.suite);
                save_report(r, &p, format)?;
                Ok(p)
            })
            .collect(),
    }
}
