use ndarray::{ArrayView1, ArrayView2};

use super::spec::FilterRule;
use crate::error::Result;
use crate::learners::{train, LearnerSpec};

/// Chooses which Level-0 prediction columns are relevant for one target.
///
/// Columns of the `n × (j·d)` prediction matrix are ordered learner-major:
/// column `r·d + t` holds learner `r`'s prediction of target `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceFilter {
    pub rule: FilterRule,
    pub trees: usize,
}

impl RelevanceFilter {
    pub fn new(rule: FilterRule, trees: usize) -> Self {
        RelevanceFilter { rule, trees }
    }

    /// Boolean mask over the columns of `y0`; never empty.
    ///
    /// Under the mean-threshold rule a forest is fitted on `(y0, y_t)` and
    /// every column with importance at or above the mean is kept. When none
    /// qualifies (a constant target yields all-zero importances) the mask
    /// falls back to the `j` columns that predict `target` itself.
    pub fn mask(
        &self,
        y0: ArrayView2<f64>,
        y_t: ArrayView1<f64>,
        target: usize,
        n_targets: usize,
        seed: u64,
    ) -> Result<Vec<bool>> {
        let cols = y0.ncols();
        match self.rule {
            FilterRule::KeepAll => Ok(vec![true; cols]),
            FilterRule::MeanThreshold => {
                let spec = LearnerSpec::rf().with_trees(self.trees).with_seed(seed);
                let forest = train(&spec, y0, y_t)?;
                let imp = forest.rf_importance()?;
                let mean = imp.mean();
                let mut mask: Vec<bool> = imp.values().iter().map(|&v| v > 0.0 && v >= mean).collect();
                if !mask.iter().any(|&k| k) {
                    mask = (0..cols).map(|c| n_targets > 0 && c % n_targets == target).collect();
                }
                Ok(mask)
            }
        }
    }
}
