use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::model::{MultiTargetModel, PredictionMatrix, Structure};
use super::spec::MtrMethodSpec;
use crate::error::{Error, Result};
use crate::learners::RegressionModel;
use crate::tabular::{apply_autoscale, invert_autoscale, ScalingParams};

pub const BUNDLE_FORMAT: &str = "mtsg-bundle/1";
const MANIFEST: &str = "manifest.json";
const MODEL_DIR: &str = "models";

/// A trained model together with the column names and scalers needed to
/// apply it to raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub model: MultiTargetModel,
    pub feature_names: Vec<String>,
    pub x_scale: Option<ScalingParams>,
    pub y_scale: Option<ScalingParams>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    spec: MtrMethodSpec,
    target_names: Vec<String>,
    feature_names: Vec<String>,
    feature_count: usize,
    x_scale: Option<ScalingParams>,
    y_scale: Option<ScalingParams>,
    /// Model seeds in the same traversal order as the file references.
    model_seeds: Vec<u64>,
    structure: Structure<String>,
}

impl ModelBundle {
    pub fn new(model: MultiTargetModel, feature_names: Vec<String>) -> Self {
        ModelBundle {
            model,
            feature_names,
            x_scale: None,
            y_scale: None,
        }
    }

    /// Predicts in original target units from raw feature values.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<PredictionMatrix> {
        let mut out = match &self.x_scale {
            Some(s) => self.model.predict(apply_autoscale(x, s)?.view())?,
            None => self.model.predict(x)?,
        };
        if let Some(s) = &self.y_scale {
            out.values = invert_autoscale(out.values.view(), s)?;
        }
        Ok(out)
    }

    /// Writes `manifest.json` and one JSON file per learner under `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let models_dir = dir.join(MODEL_DIR);
        fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
        let mut index = 0usize;
        let mut seeds = Vec::new();
        let structure = self.model.structure.try_map(|m: &RegressionModel| {
            let rel = format!("{MODEL_DIR}/m{index:04}.json");
            index += 1;
            seeds.push(m.spec.seed());
            m.save(dir.join(&rel))?;
            Ok::<_, Error>(rel)
        })?;
        let manifest = Manifest {
            format: BUNDLE_FORMAT.to_string(),
            spec: self.model.spec.clone(),
            target_names: self.model.target_names.clone(),
            feature_names: self.feature_names.clone(),
            feature_count: self.model.feature_count,
            x_scale: self.x_scale.clone(),
            y_scale: self.y_scale.clone(),
            model_seeds: seeds,
            structure,
        };
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::CorruptedModel(format!("{}: {e}", path.display())))?;
        if manifest.format != BUNDLE_FORMAT {
            return Err(Error::CorruptedModel(format!(
                "unsupported bundle format {:?}, expected {BUNDLE_FORMAT:?}",
                manifest.format
            )));
        }
        let structure = manifest.structure.try_map(|rel: &String| {
            if rel.contains("..") || Path::new(rel).is_absolute() {
                return Err(Error::CorruptedModel(format!("model path {rel:?} escapes the bundle")));
            }
            RegressionModel::load(dir.join(rel))
        })?;
        let seeds: Vec<u64> = structure.models().iter().map(|m| m.spec.seed()).collect();
        if seeds != manifest.model_seeds {
            return Err(Error::CorruptedModel("model seeds disagree with the manifest".into()));
        }
        let model = MultiTargetModel {
            spec: manifest.spec,
            target_names: manifest.target_names,
            feature_count: manifest.feature_count,
            structure,
        };
        model.validate()?;
        if manifest.feature_names.len() != model.feature_count {
            return Err(Error::CorruptedModel("feature name count differs from model width".into()));
        }
        Ok(ModelBundle {
            model,
            feature_names: manifest.feature_names,
            x_scale: manifest.x_scale,
            y_scale: manifest.y_scale,
        })
    }
}
