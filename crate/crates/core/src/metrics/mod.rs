//! Evaluation metrics: RMSE, RPT, aRRMSE, RPD with quality bands, and
//! Pearson correlation between targets.

mod report;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

pub use report::{EvaluationReport, Provenance, TargetMetrics, REPORT_SCHEMA};

use crate::error::{Error, Result};

fn check_pair(actual: ArrayView1<f64>, predicted: ArrayView1<f64>) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::shape(
            format!("{} predictions", actual.len()),
            predicted.len(),
        ));
    }
    if actual.is_empty() {
        return Err(Error::EmptyTable("no values to evaluate".into()));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: ArrayView1<f64>, predicted: ArrayView1<f64>) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sse: f64 = actual
        .iter()
        .zip(predicted.iter())
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

/// Relative performance per target: `rmse_st / rmse_mtr`; above 1 means the
/// multi-target method improved on single-target.
pub fn rpt(rmse_st: f64, rmse_mtr: f64) -> Result<f64> {
    if !(rmse_st > 0.0) || !(rmse_mtr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "RPT needs positive RMSEs, got {rmse_st} / {rmse_mtr}"
        )));
    }
    Ok(rmse_st / rmse_mtr)
}

/// `√(Σ(y-ŷ)² / Σ(y-ȳ)²)` for one target, with `ȳ` the mean of `actual`.
pub fn rrmse(actual: ArrayView1<f64>, predicted: ArrayView1<f64>) -> Result<Option<f64>> {
    check_pair(actual, predicted)?;
    let mean = actual.sum() / actual.len() as f64;
    let (mut sse, mut sst) = (0.0, 0.0);
    for (a, p) in actual.iter().zip(predicted.iter()) {
        sse += (a - p) * (a - p);
        sst += (a - mean) * (a - mean);
    }
    if sst == 0.0 {
        return Ok(None);
    }
    Ok(Some((sse / sst).sqrt()))
}

/// Average relative RMSE over the target columns.
///
/// `names` labels the columns in the constant-target error.
pub fn arrmse(actual: ArrayView2<f64>, predicted: ArrayView2<f64>, names: Option<&[String]>) -> Result<f64> {
    if actual.dim() != predicted.dim() {
        return Err(Error::shape(
            format!("{:?} prediction matrix", actual.dim()),
            format!("{:?}", predicted.dim()),
        ));
    }
    let d = actual.ncols();
    if d == 0 {
        return Err(Error::EmptyTable("no targets to evaluate".into()));
    }
    let mut total = 0.0;
    for t in 0..d {
        let r = rrmse(actual.column(t), predicted.column(t))?.ok_or_else(|| {
            Error::ConstantColumn(
                names
                    .and_then(|n| n.get(t).cloned())
                    .unwrap_or_else(|| format!("target {t}")),
            )
        })?;
        total += r;
    }
    Ok(total / d as f64)
}

/// Ratio of performance to deviation, `reference_sd / rmse`.
///
/// A perfect prediction (`rmse == 0`) gives `+∞`.
pub fn rpd(reference_sd: f64, rmse: f64) -> Result<f64> {
    if !(reference_sd > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "RPD needs a positive reference SD, got {reference_sd}"
        )));
    }
    if !(rmse >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "RPD needs a non-negative RMSE, got {rmse}"
        )));
    }
    Ok(if rmse == 0.0 { f64::INFINITY } else { reference_sd / rmse })
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_sd(values: ArrayView1<f64>) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.sum() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// Quality band for an RPD value, for soil attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RpdBand {
    VeryPoor,
    Poor,
    Fair,
    Good,
    VeryGood,
    Excellent,
}

impl RpdBand {
    pub fn as_str(self) -> &'static str {
        match self {
            RpdBand::VeryPoor => "very_poor",
            RpdBand::Poor => "poor",
            RpdBand::Fair => "fair",
            RpdBand::Good => "good",
            RpdBand::VeryGood => "very_good",
            RpdBand::Excellent => "excellent",
        }
    }
}

impl fmt::Display for RpdBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RpdBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "very_poor" => RpdBand::VeryPoor,
            "poor" => RpdBand::Poor,
            "fair" => RpdBand::Fair,
            "good" => RpdBand::Good,
            "very_good" => RpdBand::VeryGood,
            "excellent" => RpdBand::Excellent,
            _ => return Err(Error::InvalidParameter(format!("unknown RPD band '{s}'"))),
        })
    }
}

/// Left-closed bands: `<1.0`, `[1.0,1.4)`, `[1.4,1.8)`, `[1.8,2.0)`, `[2.0,2.5)`, `≥2.5`.
pub fn rpd_band(rpd_value: f64) -> Result<RpdBand> {
    if !(rpd_value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "RPD must be positive, got {rpd_value}"
        )));
    }
    Ok(match rpd_value {
        v if v < 1.0 => RpdBand::VeryPoor,
        v if v < 1.4 => RpdBand::Poor,
        v if v < 1.8 => RpdBand::Fair,
        v if v < 2.0 => RpdBand::Good,
        v if v < 2.5 => RpdBand::VeryGood,
        _ => RpdBand::Excellent,
    })
}

/// Pearson correlation of two equal-length vectors; `None` if either is constant.
pub fn pearson(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let (ma, mb) = (a.sum() / n as f64, b.sum() / n as f64);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise Pearson correlation between the columns of `y`.
pub fn pearson_matrix(y: ArrayView2<f64>, names: Option<&[String]>) -> Result<Array2<f64>> {
    let (n, d) = y.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs at least 2 rows, got {n}"
        )));
    }
    let centred: Vec<Vec<f64>> = (0..d)
        .map(|t| {
            let col = y.column(t);
            let mean = col.sum() / n as f64;
            col.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centred
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    for (t, &norm) in norms.iter().enumerate() {
        if norm == 0.0 || y.column(t).iter().all(|&v| v == y[[0, t]]) {
            return Err(Error::ConstantColumn(
                names
                    .and_then(|n| n.get(t).cloned())
                    .unwrap_or_else(|| format!("target {t}")),
            ));
        }
    }
    let mut r = Array2::eye(d);
    for a in 0..d {
        for b in (a + 1)..d {
            let dot: f64 = centred[a].iter().zip(&centred[b]).map(|(u, v)| u * v).sum();
            let v = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            r[[a, b]] = v;
            r[[b, a]] = v;
        }
    }
    Ok(r)
}
