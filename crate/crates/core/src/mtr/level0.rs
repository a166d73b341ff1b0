use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

use super::seeds::{derive, Role};
use super::spec::Stacking;
use crate::error::Result;
use crate::learners::{train, LearnerSpec, RegressionModel};

/// Fits `spec` (with `seed`) on `(x, y)` and returns the model together with
/// its training-set predictions for the next stacking stage.
pub fn fit_with_predictions(
    spec: &LearnerSpec,
    seed: u64,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    stacking: Stacking,
) -> Result<(RegressionModel, Array1<f64>)> {
    let spec = spec.clone().with_seed(seed);
    let model = train(&spec, x, y)?;
    let n = x.nrows();
    let preds = match stacking {
        Stacking::OutOfFold { folds } if n >= 2 => {
            let k = folds.min(n);
            let mut out = Array1::zeros(n);
            for fold in 0..k {
                let (held, kept): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % k == fold);
                let fold_spec = spec.clone().with_seed(derive(seed, Role::Fold { fold }, 0));
                let m = train(
                    &fold_spec,
                    x.select(Axis(0), &kept).view(),
                    y.select(Axis(0), &kept).view(),
                )?;
                let p = m.predict(x.select(Axis(0), &held).view())?;
                for (&i, v) in held.iter().zip(p) {
                    out[i] = v;
                }
            }
            out
        }
        _ => model.predict(x)?,
    };
    Ok((model, preds))
}
