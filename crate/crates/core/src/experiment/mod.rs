//! End-to-end experiment runner.
//!
//! A run loads one dataset, splits it once with Kennard–Stone, fits
//! auto-scaling on the training rows, trains every grid entry on the scaled
//! data and evaluates it on the test rows in original units. ST entries act
//! as RPT baselines for entries with the same base learner.
//!
//! Output directory layout (`mtsg-results/1`):
//!
//! | file | contents |
//! |------|----------|
//! | `per_target.csv` | one row per (entry, target) |
//! | `aggregate.csv`  | one row per entry, with `ok`/`failed` status |
//! | `manifest.toml`  | config hash, split sizes, stacking mode |
//! | `timings.csv`    | wall-clock seconds per entry |
//! | `split.csv`      | the Kennard–Stone split |
//! | `config.toml`    | the resolved configuration |

mod config;
mod records;
mod render;
pub mod synthetic;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{full_grid, ExperimentConfig, GridEntry, MethodParams};
pub use records::{
    aggregate_csv, load_results, per_target_csv, timings_csv, write_results, ResultRecord, RunManifest,
    AGGREGATE_FILE, MANIFEST_FILE, PER_TARGET_FILE, RESULTS_LAYOUT, TIMINGS_FILE,
};
pub use render::{
    reference_sds, render_arrmse_chart_data, render_arrmse_table, render_rpd_table, render_rpt_table, rpt_stub,
};

use crate::error::{Error, Result};
use crate::metrics::{EvaluationReport, Provenance};
use crate::mtr::{self, Method};
use crate::tabular::{apply_autoscale, fit_autoscale, invert_autoscale, kennard_stone_split, load_csv, Dataset, SplitIndices};

/// Records of a run together with its metadata.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<ResultRecord>,
    pub manifest: RunManifest,
    pub split: SplitIndices,
}

impl RunOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &ResultRecord> {
        self.records.iter().filter(|r| !r.is_ok())
    }

    /// Writes all result files plus the split into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_results(dir, &self.records, &self.manifest)?;
        self.split.write_csv(dir.join("split.csv"))
    }
}

/// Trains and evaluates every grid entry on `data` without touching disk.
///
/// Failed entries are kept as records with a failure message.
pub fn run_on_dataset(config: &ExperimentConfig, data: &Dataset, label: &str) -> Result<RunOutcome> {
    config.validate()?;
    let hash = config.hash()?;
    let split = kennard_stone_split(data.x().view(), config.train_fraction)?;
    if split.test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let train = data.select_rows(&split.train)?;
    let test = data.select_rows(&split.test)?;
    let x_scale = fit_autoscale(train.x().view())?;
    let y_scale = fit_autoscale(train.y().view())?;
    let x_train = apply_autoscale(train.x().view(), &x_scale)?;
    let x_test = apply_autoscale(test.x().view(), &x_scale)?;
    let y_train = apply_autoscale(train.y().view(), &y_scale)?;
    let names = data.target_names();

    let mut records: Vec<ResultRecord> = (0..config.grid.len())
        .into_par_iter()
        .map(|i| {
            let entry = &config.grid[i];
            let spec = config.entry_spec(i)?;
            let start = Instant::now();
            let outcome = mtr::train(&spec, x_train.view(), y_train.view(), names)
                .and_then(|model| model.predict(x_test.view()))
                .and_then(|pred| invert_autoscale(pred.values.view(), &y_scale))
                .and_then(|pred| {
                    let learners = if entry.method.uses_pool() {
                        spec.level0_pool.iter().map(|l| l.kind.to_string()).collect()
                    } else {
                        vec![spec.base.kind.to_string()]
                    };
                    let provenance = Provenance {
                        method: entry.method.to_string(),
                        learners,
                        seed: spec.seed,
                        dataset: label.to_string(),
                    };
                    EvaluationReport::compute(test.y().view(), pred.view(), names, provenance)
                });
            let seconds = start.elapsed().as_secs_f64();
            let (report, failure) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => {
                    log::error!("grid entry {} ({}) failed: {e}", i, entry.label());
                    (None, Some(e.to_string()))
                }
            };
            Ok(ResultRecord {
                config_hash: hash.clone(),
                entry: i,
                method: entry.method,
                learner: entry.learner,
                pool: if entry.method.uses_pool() {
                    spec.level0_pool.iter().map(|l| l.kind).collect()
                } else {
                    Vec::new()
                },
                seed: spec.seed,
                stacking: spec.stacking.label(),
                report,
                failure,
                seconds,
            })
        })
        .collect::<Result<_>>()?;
    attach_baselines(&mut records)?;

    let manifest = RunManifest {
        layout: RESULTS_LAYOUT.to_string(),
        config_hash: hash,
        dataset: label.to_string(),
        targets: names.to_vec(),
        train_rows: split.train.len(),
        test_rows: split.test.len(),
        stacking: config.stacking().label(),
        seed: config.seed,
        entries: records.len(),
        failures: records.iter().filter(|r| !r.is_ok()).count(),
    };
    Ok(RunOutcome {
        records,
        manifest,
        split,
    })
}

/// Attaches RPT to each successful record from the first successful ST
/// record with the same base learner.
fn attach_baselines(records: &mut [ResultRecord]) -> Result<()> {
    let baselines: Vec<_> = records
        .iter()
        .filter(|r| r.method == Method::St)
        .filter_map(|r| r.report.clone().map(|rep| (r.learner, rep)))
        .collect();
    for r in records.iter_mut() {
        let Some(report) = r.report.as_mut() else { continue };
        if let Some((_, base)) = baselines.iter().find(|(l, _)| *l == r.learner) {
            report.attach_rpt(base)?;
        }
    }
    Ok(())
}

/// Loads the configured dataset, runs the grid and persists the results to
/// `config.output`. Entry failures are persisted before the first one is
/// returned as an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let data = load_csv(&config.dataset, &config.targets)?;
    let label = config
        .dataset
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let outcome = run_on_dataset(config, &data, &label)?;
    outcome.write(&config.output)?;
    let resolved = config.output.join("config.toml");
    fs::write(&resolved, config.to_toml()?).map_err(|e| Error::io(&resolved, e))?;
    if let Some(failed) = outcome.failures().next() {
        return Err(Error::GridEntry {
            entry: format!("{} ({})", failed.entry, failed.label()),
            message: failed.failure.clone().unwrap_or_default(),
        });
    }
    Ok(outcome.records)
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub const FILE: &'static str = ".mtsg.lock";

    pub fn acquire(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(Self::FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Public benchmark suites and their target counts.
pub const SUITES: [(&str, usize); 10] = [
    ("atp1d", 6),
    ("atp7d", 6),
    ("edm", 2),
    ("sf1", 3),
    ("sf2", 3),
    ("jura", 3),
    ("enb", 2),
    ("slump", 3),
    ("andro", 6),
    ("scpf", 3),
];

pub fn suite_targets(name: &str) -> Result<usize> {
    SUITES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|&(_, d)| d)
        .ok_or_else(|| {
            let known: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
            Error::InvalidParameter(format!("unknown suite '{name}' (known: {})", known.join(", ")))
        })
}

/// Loads a benchmark CSV whose targets are its last `d` columns.
pub fn load_last_columns(path: impl AsRef<Path>, d: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() <= d {
        return Err(Error::EmptyTable(format!(
            "{}: {} columns cannot hold {d} targets and at least one feature",
            path.display(),
            header.len()
        )));
    }
    load_csv(path, &header[header.len() - d..])
}
