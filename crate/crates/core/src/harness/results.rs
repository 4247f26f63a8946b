//! Result records, their CSV and line-JSON encodings, and summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A named measurement: integers stay exact, reals keep full precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Int(i64),
    Real(f64),
}

impl Metric {
    pub fn as_f64(self) -> f64 {
        match self {
            Metric::Int(i) => i as f64,
            Metric::Real(r) => r,
        }
    }
}

impl From<f64> for Metric {
    fn from(v: f64) -> Self {
        Metric::Real(v)
    }
}

impl From<i64> for Metric {
    fn from(v: i64) -> Self {
        Metric::Int(v)
    }
}

impl From<usize> for Metric {
    fn from(v: usize) -> Self {
        Metric::Int(v as i64)
    }
}

impl From<bool> for Metric {
    fn from(v: bool) -> Self {
        Metric::Int(v as i64)
    }
}

// JSON has no infinities; non-finite reals travel as strings.
impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Metric::Int(i) => s.serialize_i64(i),
            Metric::Real(r) if r.is_finite() => s.serialize_f64(r),
            Metric::Real(r) => s.serialize_str(&r.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Real(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Metric::Int(i)),
            Raw::Real(r) => Ok(Metric::Real(r)),
            Raw::Text(t) => t.parse().map(Metric::Real).map_err(serde::de::Error::custom),
        }
    }
}

/// One trial's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub trial: usize,
    pub seed: u64,
    pub pass: bool,
    pub metrics: BTreeMap<String, Metric>,
}

impl ResultRecord {
    pub fn new(experiment: &str, trial: usize, seed: u64) -> Self {
        ResultRecord { experiment: experiment.to_string(), trial, seed, pass: false, metrics: BTreeMap::new() }
    }

    pub fn set(&mut self, name: &str, value: impl Into<Metric>) -> &mut Self {
        self.metrics.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).map(|m| m.as_f64())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json" => Ok(OutputFormat::JsonLines),
            other => Err(Error::Config(format!("unknown output format `{other}` (use csv or jsonl)"))),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Fixed columns followed by the sorted union of metric names.
pub fn csv_columns(records: &[ResultRecord]) -> Vec<String> {
    let names: BTreeSet<&String> = records.iter().flat_map(|r| r.metrics.keys()).collect();
    ["experiment", "trial", "seed", "pass"].iter().map(|s| s.to_string()).chain(names.into_iter().cloned()).collect()
}

fn format_metric(m: Metric) -> String {
    match m {
        Metric::Int(i) => i.to_string(),
        Metric::Real(r) => format!("{r:.16e}"),
    }
}

pub fn write_results<W: Write>(records: &[ResultRecord], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let columns = csv_columns(records);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&columns).map_err(csv_error)?;
            for r in records {
                let mut row = vec![r.experiment.clone(), r.trial.to_string(), r.seed.to_string(), r.pass.to_string()];
                row.extend(columns[4..].iter().map(|c| r.metrics.get(c).map(|m| format_metric(*m)).unwrap_or_default()));
                w.write_record(&row).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.to_string()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit_results(records: &[ResultRecord], format: OutputFormat, path: &Path) -> Result<()> {
    write_results(records, format, BufWriter::new(File::create(path)?))
}

pub fn parse_json_lines(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() }))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub trials: usize,
    pub passes: usize,
    pub pass_fraction: f64,
    pub metrics: BTreeMap<String, MetricSummary>,
}

pub fn summarize(records: &[ResultRecord]) -> Result<Summary> {
    let first = records.first().ok_or_else(|| Error::Parameter("cannot summarize zero records".into()))?;
    let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        for (k, v) in &r.metrics {
            values.entry(k).or_default().push(v.as_f64());
        }
    }
    let metrics = values
        .into_iter()
        .map(|(k, v)| {
            let count = v.len();
            let mean = v.iter().sum::<f64>() / count as f64;
            let std = if v.iter().all(|&x| x == v[0]) {
                0.0
            } else {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64).sqrt()
            };
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (k.to_string(), MetricSummary { count, mean, std, min, max })
        })
        .collect();
    let passes = records.iter().filter(|r| r.pass).count();
    Ok(Summary {
        experiment: first.experiment.clone(),
        trials: records.len(),
        passes,
        pass_fraction: passes as f64 / records.len() as f64,
        metrics,
    })
}
