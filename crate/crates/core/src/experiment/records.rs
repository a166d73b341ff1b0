use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::metrics::{EvaluationReport, Provenance, TargetMetrics, REPORT_SCHEMA};
use crate::mtr::Method;

/// Version of the on-disk result layout.
pub const RESULTS_LAYOUT: &str = "mtsg-results/1";
pub const PER_TARGET_FILE: &str = "per_target.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TIMINGS_FILE: &str = "timings.csv";

const PER_TARGET_HEADER: &str = "config_hash,entry,method,learner,seed,target,rmse,rrmse,rpt,rpd,rpd_band,reference_sd";
const AGGREGATE_HEADER: &str = "config_hash,entry,method,learner,pool,seed,stacking,status,arrmse,mean_rpt,message";

/// Outcome of one grid entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config_hash: String,
    pub entry: usize,
    pub method: Method,
    pub learner: LearnerKind,
    /// Level-0 pool for MTAS and MTSG, empty otherwise.
    pub pool: Vec<LearnerKind>,
    pub seed: u64,
    pub stacking: String,
    /// `None` when the entry failed; see `failure`.
    pub report: Option<EvaluationReport>,
    pub failure: Option<String>,
    pub seconds: f64,
}

impl ResultRecord {
    pub fn label(&self) -> String {
        format!("{} ({})", self.method, self.learner)
    }

    pub fn is_ok(&self) -> bool {
        self.report.is_some()
    }

    pub fn arrmse(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.arrmse)
    }
}

/// Run-level metadata written next to the result CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub layout: String,
    pub config_hash: String,
    pub dataset: String,
    pub targets: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub stacking: String,
    pub seed: u64,
    pub entries: usize,
    pub failures: usize,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Quotes a free-text CSV field.
fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
}

fn pool_label(pool: &[LearnerKind]) -> String {
    pool.iter().map(|k| k.name()).collect::<Vec<_>>().join("+")
}

pub fn per_target_csv(records: &[ResultRecord]) -> String {
    let mut out = format!("{PER_TARGET_HEADER}\n");
    for r in records {
        let Some(report) = &r.report else { continue };
        for m in &report.per_target {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.config_hash,
                r.entry,
                r.method,
                r.learner,
                r.seed,
                m.target,
                m.rmse,
                m.rrmse,
                opt(m.rpt),
                m.rpd,
                m.rpd_band,
                m.reference_sd
            );
        }
    }
    out
}

pub fn aggregate_csv(records: &[ResultRecord]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in records {
        let (status, arrmse, mean_rpt) = match &r.report {
            Some(rep) => ("ok", rep.arrmse.to_string(), opt(rep.mean_rpt())),
            None => ("failed", String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.config_hash,
            r.entry,
            r.method,
            r.learner,
            pool_label(&r.pool),
            r.seed,
            r.stacking,
            status,
            arrmse,
            mean_rpt,
            r.failure.as_deref().map(quote).unwrap_or_default()
        );
    }
    out
}

/// Wall-clock times are kept apart so the metric files stay byte-identical
/// across reruns.
pub fn timings_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from("entry,method,learner,seconds\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{:.3}", r.entry, r.method, r.learner, r.seconds);
    }
    out
}

fn write_file(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Writes the four result files into `dir`, creating it if needed.
pub fn write_results(dir: impl AsRef<Path>, records: &[ResultRecord], manifest: &RunManifest) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(dir.join(PER_TARGET_FILE), &per_target_csv(records))?;
    write_file(dir.join(AGGREGATE_FILE), &aggregate_csv(records))?;
    write_file(dir.join(TIMINGS_FILE), &timings_csv(records))?;
    let text = toml::to_string(manifest).map_err(|e| Error::Serialization(e.to_string()))?;
    write_file(dir.join(MANIFEST_FILE), &text)
}

struct CsvFile {
    path: PathBuf,
    rows: Vec<(usize, csv::StringRecord)>,
}

fn read_csv(path: PathBuf, header: &str) -> Result<CsvFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .map_err(|e| Error::Csv {
            path: path.clone(),
            row: 0,
            message: e.to_string(),
        })?;
    let found = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.clone(),
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(Error::Csv {
            path,
            row: 1,
            message: format!("unexpected header '{found}'"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Csv {
            path: path.clone(),
            row: line,
            message: e.to_string(),
        })?;
        rows.push((line, rec));
    }
    Ok(CsvFile { path, rows })
}

impl CsvFile {
    fn parse<T: std::str::FromStr>(&self, line: usize, rec: &csv::StringRecord, col: usize, what: &str) -> Result<T> {
        let raw = rec.get(col).unwrap_or("");
        raw.parse().map_err(|_| Error::Csv {
            path: self.path.clone(),
            row: line,
            message: format!("invalid {what} '{raw}'"),
        })
    }

    fn parse_opt(&self, line: usize, rec: &csv::StringRecord, col: usize, what: &str) -> Result<Option<f64>> {
        if rec.get(col).unwrap_or("").is_empty() {
            Ok(None)
        } else {
            self.parse(line, rec, col, what).map(Some)
        }
    }
}

/// Reads the records written by [`write_results`]. Timings are restored
/// when `timings.csv` is present.
pub fn load_results(dir: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let dir = dir.as_ref();
    let agg = read_csv(dir.join(AGGREGATE_FILE), AGGREGATE_HEADER)?;
    let per = read_csv(dir.join(PER_TARGET_FILE), PER_TARGET_HEADER)?;
    if agg.rows.is_empty() {
        return Err(Error::EmptyTable(format!("{} has no records", agg.path.display())));
    }
    let mut targets: BTreeMap<usize, Vec<TargetMetrics>> = BTreeMap::new();
    for (line, rec) in &per.rows {
        let entry: usize = per.parse(*line, rec, 1, "entry")?;
        let rpd_band = per.parse(*line, rec, 10, "rpd_band")?;
        targets.entry(entry).or_default().push(TargetMetrics {
            target: rec.get(5).unwrap_or("").to_string(),
            rmse: per.parse(*line, rec, 6, "rmse")?,
            rrmse: per.parse(*line, rec, 7, "rrmse")?,
            rpt: per.parse_opt(*line, rec, 8, "rpt")?,
            rpd: per.parse(*line, rec, 9, "rpd")?,
            rpd_band,
            reference_sd: per.parse(*line, rec, 11, "reference_sd")?,
            sse: f64::NAN,
            sst: f64::NAN,
        });
    }
    let mut records = Vec::with_capacity(agg.rows.len());
    for (line, rec) in &agg.rows {
        let entry: usize = agg.parse(*line, rec, 1, "entry")?;
        let method: Method = agg.parse(*line, rec, 2, "method")?;
        let learner: LearnerKind = agg.parse(*line, rec, 3, "learner")?;
        let pool = rec
            .get(4)
            .unwrap_or("")
            .split('+')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| Error::Csv {
                    path: agg.path.clone(),
                    row: *line,
                    message: format!("invalid pool member '{s}'"),
                })
            })
            .collect::<Result<Vec<LearnerKind>>>()?;
        let seed: u64 = agg.parse(*line, rec, 5, "seed")?;
        let status = rec.get(7).unwrap_or("");
        let report = match status {
            "ok" => {
                let per_target = targets.remove(&entry).ok_or_else(|| Error::Csv {
                    path: per.path.clone(),
                    row: 0,
                    message: format!("no per-target rows for entry {entry}"),
                })?;
                Some(EvaluationReport {
                    schema: REPORT_SCHEMA.to_string(),
                    provenance: Provenance {
                        method: method.to_string(),
                        learners: vec![learner.to_string()],
                        seed,
                        dataset: String::new(),
                    },
                    arrmse: agg.parse(*line, rec, 8, "arrmse")?,
                    per_target,
                })
            }
            "failed" => None,
            other => {
                return Err(Error::Csv {
                    path: agg.path.clone(),
                    row: *line,
                    message: format!("invalid status '{other}'"),
                })
            }
        };
        let failure = Some(rec.get(10).unwrap_or("").to_string()).filter(|s| !s.is_empty());
        records.push(ResultRecord {
            config_hash: rec.get(0).unwrap_or("").to_string(),
            entry,
            method,
            learner,
            pool,
            seed,
            stacking: rec.get(6).unwrap_or("").to_string(),
            report,
            failure,
            seconds: 0.0,
        });
    }
    if let Ok(times) = read_csv(dir.join(TIMINGS_FILE), "entry,method,learner,seconds") {
        for (line, rec) in &times.rows {
            let entry: usize = times.parse(*line, rec, 0, "entry")?;
            let secs: f64 = times.parse(*line, rec, 3, "seconds")?;
            if let Some(r) = records.iter_mut().find(|r| r.entry == entry) {
                r.seconds = secs;
            }
        }
    }
    Ok(records)
}
