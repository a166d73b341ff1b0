use std::fmt::Write as _;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{rmse, rpd, rpd_band, rpt, rrmse, sample_sd, RpdBand};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "mtsg-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub learners: Vec<String>,
    pub seed: u64,
    pub dataset: String,
}

/// Metrics for one target, in the target's original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target: String,
    pub rmse: f64,
    pub rrmse: f64,
    pub rpt: Option<f64>,
    pub rpd: f64,
    pub rpd_band: RpdBand,
    /// Sample SD of the evaluation-set reference values.
    pub reference_sd: f64,
    pub sse: f64,
    pub sst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema: String,
    pub provenance: Provenance,
    pub arrmse: f64,
    pub per_target: Vec<TargetMetrics>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// Evaluates `predicted` against `actual`, both `n × d` in original units.
    pub fn compute(
        actual: ArrayView2<f64>,
        predicted: ArrayView2<f64>,
        target_names: &[String],
        provenance: Provenance,
    ) -> Result<Self> {
        if actual.dim() != predicted.dim() {
            return Err(Error::shape(
                format!("{:?} prediction matrix", actual.dim()),
                format!("{:?}", predicted.dim()),
            ));
        }
        if target_names.len() != actual.ncols() {
            return Err(Error::shape(
                format!("{} target names", actual.ncols()),
                target_names.len(),
            ));
        }
        if actual.nrows() == 0 {
            return Err(Error::EmptyTestSet);
        }
        let mut per_target = Vec::with_capacity(actual.ncols());
        for (t, name) in target_names.iter().enumerate() {
            let (a, p) = (actual.column(t), predicted.column(t));
            let err = rmse(a, p)?;
            let rel = rrmse(a, p)?.ok_or_else(|| Error::ConstantColumn(name.clone()))?;
            let sd = sample_sd(a).ok_or_else(|| {
                Error::InvalidParameter(format!("target '{name}': need at least 2 evaluation rows"))
            })?;
            let mean = a.sum() / a.len() as f64;
            let ratio = rpd(sd, err)?;
            per_target.push(TargetMetrics {
                target: name.clone(),
                rmse: err,
                rrmse: rel,
                rpt: None,
                rpd: ratio,
                rpd_band: rpd_band(ratio)?,
                reference_sd: sd,
                sse: a.iter().zip(p.iter()).map(|(x, y)| (x - y) * (x - y)).sum(),
                sst: a.iter().map(|x| (x - mean) * (x - mean)).sum(),
            });
        }
        let arrmse = per_target.iter().map(|m| m.rrmse).sum::<f64>() / per_target.len() as f64;
        Ok(EvaluationReport {
            schema: REPORT_SCHEMA.to_string(),
            provenance,
            arrmse,
            per_target,
        })
    }

    /// Fills in RPT against a single-target baseline with the same targets.
    pub fn attach_rpt(&mut self, baseline: &EvaluationReport) -> Result<()> {
        if baseline.per_target.len() != self.per_target.len() {
            return Err(Error::shape(
                format!("{} baseline targets", self.per_target.len()),
                baseline.per_target.len(),
            ));
        }
        for (m, b) in self.per_target.iter_mut().zip(&baseline.per_target) {
            if m.target != b.target {
                return Err(Error::InvalidParameter(format!(
                    "baseline target '{}' does not match '{}'",
                    b.target, m.target
                )));
            }
            // a perfect fit on either side leaves RPT undefined
            m.rpt = rpt(b.rmse, m.rmse).ok();
        }
        Ok(())
    }

    pub fn mean_rpt(&self) -> Option<f64> {
        let vals: Option<Vec<f64>> = self.per_target.iter().map(|m| m.rpt).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// aRRMSE recomputed from the stored squared-error sums.
    pub fn recomputed_arrmse(&self) -> f64 {
        self.per_target
            .iter()
            .map(|m| (m.sse / m.sst).sqrt())
            .sum::<f64>()
            / self.per_target.len() as f64
    }

    /// One row per target plus a final `aRRMSE` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,rmse,rrmse,rpt,rpd,rpd_band,reference_sd\n");
        for m in &self.per_target {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                m.target,
                m.rmse,
                m.rrmse,
                fmt_opt(m.rpt),
                m.rpd,
                m.rpd_band,
                m.reference_sd
            );
        }
        let _ = writeln!(out, "aRRMSE,,{},{},,,", self.arrmse, fmt_opt(self.mean_rpt()));
        out
    }

    pub fn to_summary(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join("report.csv");
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let summary = dir.join("report.toml");
        std::fs::write(&summary, self.to_summary()?).map_err(|e| Error::io(&summary, e))
    }
}
