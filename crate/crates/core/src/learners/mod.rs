//! Base regressors: random forest and epsilon-SVR behind one interface.
//!
//! Both learners are deterministic given their [`LearnerSpec`] (the random
//! forest draws all randomness from `rf.seed`), so a trained
//! [`RegressionModel`] can be reproduced bit for bit.

mod forest;
mod svr;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

pub use forest::Forest;
pub use svr::{Kernel, SvrModel};
pub use tree::{Node, Tree};

use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "mtsg-learner/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "SVR_L")]
    SvrLinear,
    #[serde(rename = "SVR_R")]
    SvrRbf,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Rf, LearnerKind::SvrLinear, LearnerKind::SvrRbf];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Rf => "RF",
            LearnerKind::SvrLinear => "SVR_L",
            LearnerKind::SvrRbf => "SVR_R",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(LearnerKind::Rf),
            "svr_l" | "svm_l" | "svr-l" => Ok(LearnerKind::SvrLinear),
            "svr_r" | "svm_r" | "svr-r" => Ok(LearnerKind::SvrRbf),
            _ => Err(Error::InvalidParameter(format!(
                "unknown learner '{s}' (expected one of rf, svr_l, svr_r)"
            ))),
        }
    }
}

/// Random forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `⌈f/3⌉`.
    pub mtry: Option<usize>,
    /// Nodes with this many samples or fewer become leaves.
    pub min_node_size: usize,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 500,
            mtry: None,
            min_node_size: 5,
            seed: 0,
        }
    }
}

/// Epsilon-SVR hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// RBF width; `None` means `1/f`.
    pub gamma: Option<f64>,
    /// Stopping threshold on the maximal KKT violation.
    pub tolerance: f64,
    /// Iteration budget in units of `2n` working-set updates.
    pub max_passes: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 1000,
        }
    }
}

/// Declarative description of one base learner.
///
/// Only the parameter block that matches `kind` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default)]
    pub rf: RfParams,
    #[serde(default)]
    pub svr: SvrParams,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerSpec {
            kind,
            rf: RfParams::default(),
            svr: SvrParams::default(),
        }
    }

    pub fn rf() -> Self {
        Self::new(LearnerKind::Rf)
    }

    pub fn svr_linear() -> Self {
        Self::new(LearnerKind::SvrLinear)
    }

    pub fn svr_rbf() -> Self {
        Self::new(LearnerKind::SvrRbf)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rf.seed = seed;
        self
    }

    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.rf.n_trees = n_trees;
        self
    }

    pub fn with_mtry(mut self, mtry: usize) -> Self {
        self.rf.mtry = Some(mtry);
        self
    }

    pub fn with_min_node_size(mut self, size: usize) -> Self {
        self.rf.min_node_size = size;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.svr.c = c;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.svr.epsilon = epsilon;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.svr.gamma = Some(gamma);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.svr.tolerance = tolerance;
        self
    }

    /// Seed actually consumed by training (only random forests use one).
    pub fn seed(&self) -> u64 {
        self.rf.seed
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.kind {
            LearnerKind::Rf => {
                let p = &self.rf;
                if p.n_trees == 0 {
                    return bad("n_trees must be positive".into());
                }
                if p.min_node_size == 0 {
                    return bad("min_node_size must be positive".into());
                }
                if let Some(m) = p.mtry {
                    if m == 0 || m > n_features {
                        return bad(format!("mtry must lie in 1..={n_features}, got {m}"));
                    }
                }
            }
            LearnerKind::SvrLinear | LearnerKind::SvrRbf => {
                let p = &self.svr;
                if !(p.c > 0.0 && p.c.is_finite()) {
                    return bad(format!("c must be positive, got {}", p.c));
                }
                if !(p.epsilon >= 0.0 && p.epsilon.is_finite()) {
                    return bad(format!("epsilon must be non-negative, got {}", p.epsilon));
                }
                if !(p.tolerance > 0.0) {
                    return bad(format!("tolerance must be positive, got {}", p.tolerance));
                }
                if p.max_passes == 0 {
                    return bad("max_passes must be positive".into());
                }
                if let Some(g) = p.gamma {
                    if !(g > 0.0 && g.is_finite()) {
                        return bad(format!("gamma must be positive, got {g}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelState {
    Forest(Forest),
    Svr(SvrModel),
}

/// A trained base regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub spec: LearnerSpec,
    pub feature_count: usize,
    pub state: ModelState,
}

/// Per-feature impurity importance, normalised to sum to 1 when any split exists.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(pub Vec<f64>);

impl ImportanceVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Fits `spec` on `(x, y)`.
pub fn train(spec: &LearnerSpec, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<RegressionModel> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::EmptyTable(format!(
            "cannot train on a {}x{} matrix",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.nrows() != y.len() {
        return Err(Error::shape(
            format!("{} target values", x.nrows()),
            y.len(),
        ));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "training data contains NaN or infinite values".into(),
        ));
    }
    spec.validate(x.ncols())?;
    let state = match spec.kind {
        LearnerKind::Rf => ModelState::Forest(Forest::fit(&spec.rf, x, y)),
        LearnerKind::SvrLinear => ModelState::Svr(SvrModel::fit(&spec.svr, Kernel::Linear, x, y)),
        LearnerKind::SvrRbf => {
            let gamma = spec.svr.gamma.unwrap_or(1.0 / x.ncols() as f64);
            ModelState::Svr(SvrModel::fit(&spec.svr, Kernel::Rbf { gamma }, x, y))
        }
    };
    Ok(RegressionModel {
        spec: spec.clone(),
        feature_count: x.ncols(),
        state,
    })
}

impl RegressionModel {
    pub fn kind(&self) -> LearnerKind {
        self.spec.kind
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.feature_count {
            return Err(Error::shape(
                format!("{} feature columns", self.feature_count),
                format!("{} feature columns", x.ncols()),
            ));
        }
        Ok(match &self.state {
            ModelState::Forest(f) => f.predict(x),
            ModelState::Svr(s) => s.predict(x),
        })
    }

    pub fn rf_importance(&self) -> Result<ImportanceVector> {
        match &self.state {
            ModelState::Forest(f) => Ok(ImportanceVector(f.importance())),
            ModelState::Svr(_) => Err(Error::InvalidParameter(format!(
                "importance is only defined for random forests, not {}",
                self.kind()
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Envelope<'a> {
            format: &'a str,
            model: &'a RegressionModel,
        }
        Ok(serde_json::to_string(&Envelope {
            format: MODEL_FORMAT,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Envelope {
            format: String,
            model: RegressionModel,
        }
        let env: Envelope = serde_json::from_str(text)
            .map_err(|e| Error::CorruptedModel(e.to_string()))?;
        if env.format != MODEL_FORMAT {
            return Err(Error::CorruptedModel(format!(
                "unsupported model format '{}', expected '{MODEL_FORMAT}'",
                env.format
            )));
        }
        Ok(env.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
