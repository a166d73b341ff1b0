use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learners::{LearnerKind, LearnerSpec, RfParams, SvrParams};
use crate::mtr::seeds::mix;
use crate::mtr::{FilterRule, Method, MtrMethodSpec, Stacking};

/// One `(method, learner)` cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridEntry {
    pub method: Method,
    /// Base learner (the Level-1 learner for MTAS and MTSG).
    pub learner: LearnerKind,
    /// Level-0 pool for MTAS and MTSG; defaults to all learner kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<Vec<LearnerKind>>,
}

impl GridEntry {
    pub fn new(method: Method, learner: LearnerKind) -> Self {
        GridEntry {
            method,
            learner,
            pool: None,
        }
    }

    pub fn label(&self) -> String {
        format!("{} ({})", self.method, self.learner)
    }
}

/// Method parameters shared by every grid entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    pub erc_chains: usize,
    pub drs_max_layers: usize,
    pub motc_max_children: usize,
    pub motc_max_depth: usize,
    pub filter_rule: FilterRule,
    pub filter_trees: usize,
}

impl Default for MethodParams {
    fn default() -> Self {
        let d = MtrMethodSpec::new(Method::St, LearnerSpec::rf());
        MethodParams {
            erc_chains: d.erc_chains,
            drs_max_layers: d.drs_max_layers,
            motc_max_children: d.motc_max_children,
            motc_max_depth: d.motc_max_depth,
            filter_rule: d.filter_rule,
            filter_trees: d.filter_trees,
        }
    }
}

/// A complete, reproducible experiment description.
///
/// ```toml
/// dataset = "soil.csv"
/// targets = ["pH", "P", "K"]
/// seed = 42
/// output = "runs/soil"
/// grid = [
///   { method = "ST", learner = "RF" },
///   { method = "MTSG", learner = "RF", pool = ["RF", "SVR_L", "SVR_R"] },
/// ]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub targets: Vec<String>,
    pub train_fraction: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub out_of_fold: bool,
    pub folds: usize,
    pub rf: RfParams,
    pub svr: SvrParams,
    pub methods: MethodParams,
    pub grid: Vec<GridEntry>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: PathBuf::new(),
            targets: Vec::new(),
            train_fraction: 2.0 / 3.0,
            seed: 42,
            output: PathBuf::from("results"),
            out_of_fold: false,
            folds: 10,
            rf: RfParams::default(),
            svr: SvrParams::default(),
            methods: MethodParams::default(),
            grid: Vec::new(),
        }
    }
}

/// Every method crossed with every learner in `learners`, ST first.
pub fn full_grid(learners: &[LearnerKind]) -> Vec<GridEntry> {
    Method::ALL
        .iter()
        .flat_map(|&m| learners.iter().map(move |&l| GridEntry::new(m, l)))
        .collect()
}

fn method_index(m: Method) -> u64 {
    Method::ALL.iter().position(|&x| x == m).unwrap_or(0) as u64
}

fn learner_index(l: LearnerKind) -> u64 {
    LearnerKind::ALL.iter().position(|&x| x == l).unwrap_or(0) as u64
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        // relative dataset paths are resolved against the config file
        if config.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                config.dataset = dir.join(&config.dataset);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn stacking(&self) -> Stacking {
        if self.out_of_fold {
            Stacking::OutOfFold { folds: self.folds }
        } else {
            Stacking::InSample
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.grid.is_empty() {
            return bad("the experiment grid is empty".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            if self.train_fraction == 1.0 {
                return Err(Error::EmptyTestSet);
            }
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.targets.is_empty() {
            return bad("no target columns configured".into());
        }
        for i in 0..self.grid.len() {
            self.entry_spec(i)?.validate()?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the configuration without its output directory.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output = PathBuf::new();
        Ok(hex::encode(Sha256::digest(canonical.to_toml()?.as_bytes())))
    }

    fn learner(&self, kind: LearnerKind) -> LearnerSpec {
        LearnerSpec {
            kind,
            rf: self.rf.clone(),
            svr: self.svr.clone(),
        }
    }

    /// Seed of grid entry `i`: the master seed mixed with the entry's method,
    /// learner and its occurrence count among identical earlier entries.
    pub fn entry_seed(&self, i: usize) -> u64 {
        let e = &self.grid[i];
        let occurrence = self.grid[..i]
            .iter()
            .filter(|o| o.method == e.method && o.learner == e.learner)
            .count();
        mix(&[self.seed, method_index(e.method), learner_index(e.learner), occurrence as u64])
    }

    pub fn entry_spec(&self, i: usize) -> Result<MtrMethodSpec> {
        let e = self
            .grid
            .get(i)
            .ok_or_else(|| Error::InvalidParameter(format!("grid entry {i} does not exist")))?;
        let pool = e.pool.clone().unwrap_or_else(|| LearnerKind::ALL.to_vec());
        let m = &self.methods;
        Ok(MtrMethodSpec {
            method: e.method,
            base: self.learner(e.learner),
            level0_pool: pool.into_iter().map(|k| self.learner(k)).collect(),
            erc_chains: m.erc_chains,
            drs_max_layers: m.drs_max_layers,
            motc_max_children: m.motc_max_children,
            motc_max_depth: m.motc_max_depth,
            filter_rule: m.filter_rule,
            filter_trees: m.filter_trees,
            stacking: self.stacking(),
            seed: self.entry_seed(i),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig {
            dataset: "data.csv".into(),
            targets: vec!["a".into(), "b".into()],
            grid: full_grid(&[LearnerKind::Rf]),
            ..Default::default()
        };
        c.grid[6].pool = Some(vec![LearnerKind::Rf, LearnerKind::SvrRbf]);
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml(
            "dataset = \"d.csv\"\ntargets = [\"y\"]\ngrid = [{ method = \"MTSG\", learner = \"SVR_R\" }]\n",
        )
        .unwrap();
        assert!((c.train_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.seed, 42);
        let spec = c.entry_spec(0).unwrap();
        assert_eq!(spec.level0_pool.len(), 3);
        assert_eq!(spec.base.kind, LearnerKind::SvrRbf);
        c.validate().unwrap();
    }

    #[test]
    fn entry_seeds_are_stable_under_insertion() {
        let mut c = ExperimentConfig {
            grid: vec![GridEntry::new(Method::St, LearnerKind::Rf), GridEntry::new(Method::Mtsg, LearnerKind::Rf)],
            ..Default::default()
        };
        let before = c.entry_seed(1);
        c.grid.insert(0, GridEntry::new(Method::Sst, LearnerKind::SvrRbf));
        assert_eq!(c.entry_seed(2), before);
        c.grid.push(GridEntry::new(Method::Mtsg, LearnerKind::Rf));
        assert_ne!(c.entry_seed(3), before);
    }

    #[test]
    fn fraction_bounds() {
        let mut c = ExperimentConfig {
            targets: vec!["y".into()],
            grid: full_grid(&[LearnerKind::Rf]),
            ..Default::default()
        };
        c.train_fraction = 1.0;
        assert!(matches!(c.validate(), Err(Error::EmptyTestSet)));
        c.train_fraction = 0.0;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter(_))));
        c.validate().unwrap_err();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("trian_fraction = 0.5\n").is_err());
    }
}
