use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column centre and spread for auto-scaling (z-scoring).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalingParams {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    fn check_width(&self, m: &ArrayView2<f64>) -> Result<()> {
        if m.ncols() != self.len() {
            return Err(Error::shape(
                format!("{} columns", self.len()),
                format!("{} columns", m.ncols()),
            ));
        }
        Ok(())
    }
}

/// Column means and sample standard deviations (divisor `n - 1`).
///
/// A constant column gets std 1 so that scaling maps it to 0.
pub fn fit_autoscale(m: ArrayView2<f64>) -> Result<ScalingParams> {
    let n = m.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "auto-scaling needs at least 2 rows, got {n}"
        )));
    }
    let mut means = Vec::with_capacity(m.ncols());
    let mut stds = Vec::with_capacity(m.ncols());
    for col in m.axis_iter(Axis(1)) {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            means.push(first);
            stds.push(1.0);
            continue;
        }
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        means.push(mean);
        stds.push(if var > 0.0 { var.sqrt() } else { 1.0 });
    }
    Ok(ScalingParams { means, stds })
}

/// `(v - mean) / std` per cell.
pub fn apply_autoscale(m: ArrayView2<f64>, p: &ScalingParams) -> Result<Array2<f64>> {
    p.check_width(&m)?;
    let mut out = m.to_owned();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (mean, std) = (p.means[j], p.stds[j]);
        col.mapv_inplace(|v| (v - mean) / std);
    }
    Ok(out)
}

/// `v * std + mean` per cell.
pub fn invert_autoscale(m: ArrayView2<f64>, p: &ScalingParams) -> Result<Array2<f64>> {
    p.check_width(&m)?;
    let mut out = m.to_owned();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (mean, std) = (p.means[j], p.stds[j]);
        col.mapv_inplace(|v| v * std + mean);
    }
    Ok(out)
}
