use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LearnerSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    St,
    Sst,
    Erc,
    Motc,
    Drs,
    Mtas,
    Mtsg,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::St,
        Method::Sst,
        Method::Erc,
        Method::Motc,
        Method::Drs,
        Method::Mtas,
        Method::Mtsg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::St => "ST",
            Method::Sst => "SST",
            Method::Erc => "ERC",
            Method::Motc => "MOTC",
            Method::Drs => "DRS",
            Method::Mtas => "MTAS",
            Method::Mtsg => "MTSG",
        }
    }

    /// Methods that train a pool of Level-0 learners.
    pub fn uses_pool(self) -> bool {
        matches!(self, Method::Mtas | Method::Mtsg)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method '{s}' (expected one of st, sst, erc, motc, drs, mtas, mtsg)"
                ))
            })
    }
}

/// Relevance filter applied to Level-0 prediction columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterRule {
    /// Keep columns whose random-forest importance is at least the mean.
    MeanThreshold,
    KeepAll,
}

impl FromStr for FilterRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-threshold" => Ok(FilterRule::MeanThreshold),
            "keep-all" => Ok(FilterRule::KeepAll),
            _ => Err(Error::InvalidParameter(format!(
                "unknown filter rule '{s}' (expected mean-threshold or keep-all)"
            ))),
        }
    }
}

/// How the training-set predictions fed to later stages are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Stacking {
    /// Predict the training rows with the model fitted on them.
    InSample,
    /// k-fold out-of-fold predictions; row `i` belongs to fold `i mod k`.
    OutOfFold { folds: usize },
}

impl Stacking {
    pub fn label(&self) -> String {
        match self {
            Stacking::InSample => "in-sample".into(),
            Stacking::OutOfFold { folds } => format!("out-of-fold-{folds}"),
        }
    }
}

/// Full description of one multi-target method configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtrMethodSpec {
    pub method: Method,
    /// Learner for the per-target and meta models.
    pub base: LearnerSpec,
    /// Level-0 learners for MTAS and MTSG.
    pub level0_pool: Vec<LearnerSpec>,
    pub erc_chains: usize,
    pub drs_max_layers: usize,
    pub motc_max_children: usize,
    pub motc_max_depth: usize,
    pub filter_rule: FilterRule,
    pub filter_trees: usize,
    pub stacking: Stacking,
    pub seed: u64,
}

impl MtrMethodSpec {
    /// Defaults: pool {RF, SVR_L, SVR_R}, 10 chains, 5 DRS layers, MOTC
    /// trees of 2 children and depth 2, mean-threshold filter with 500
    /// trees, in-sample stacking, seed 42.
    pub fn new(method: Method, base: LearnerSpec) -> Self {
        MtrMethodSpec {
            method,
            base,
            level0_pool: vec![LearnerSpec::rf(), LearnerSpec::svr_linear(), LearnerSpec::svr_rbf()],
            erc_chains: 10,
            drs_max_layers: 5,
            motc_max_children: 2,
            motc_max_depth: 2,
            filter_rule: FilterRule::MeanThreshold,
            filter_trees: 500,
            stacking: Stacking::InSample,
            seed: 42,
        }
    }

    pub fn with_pool(mut self, pool: Vec<LearnerSpec>) -> Self {
        self.level0_pool = pool;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_filter(mut self, rule: FilterRule) -> Self {
        self.filter_rule = rule;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.erc_chains = chains;
        self
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.drs_max_layers = layers;
        self
    }

    pub fn with_stacking(mut self, stacking: Stacking) -> Self {
        self.stacking = stacking;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Learner kinds that appear in this configuration, pool first.
    pub fn learner_label(&self) -> String {
        if self.method.uses_pool() {
            let pool: Vec<&str> = self.level0_pool.iter().map(|l| l.kind.name()).collect();
            format!("{} <- [{}]", self.base.kind, pool.join(","))
        } else {
            self.base.kind.to_string()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.method.uses_pool() && self.level0_pool.is_empty() {
            return bad("the Level-0 pool must contain at least one learner");
        }
        if self.erc_chains == 0 {
            return bad("erc_chains must be positive");
        }
        if self.drs_max_layers == 0 {
            return bad("drs_max_layers must be positive");
        }
        if self.motc_max_children == 0 || self.motc_max_depth == 0 {
            return bad("MOTC children and depth must be positive");
        }
        if self.filter_trees == 0 {
            return bad("filter_trees must be positive");
        }
        if let Stacking::OutOfFold { folds } = self.stacking {
            if folds < 2 {
                return bad("out-of-fold stacking needs at least 2 folds");
            }
        }
        Ok(())
    }
}
