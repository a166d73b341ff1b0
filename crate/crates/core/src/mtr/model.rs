use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::spec::MtrMethodSpec;
use crate::error::{Error, Result};
use crate::learners::RegressionModel;

/// `n × d` predictions aligned with the training target order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub values: Array2<f64>,
    pub target_names: Vec<String>,
}

/// Origin of one input column of a stacked model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSource {
    Feature(usize),
    /// Prediction of `target` by Level-0 learner `learner` (or by the
    /// previous layer for layered methods, where `learner` is 0).
    Prediction { learner: usize, target: usize },
}

/// One ERC chain: `models[k]` predicts target `order[k]` from
/// `[x ‖ predictions of order[..k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain<M> {
    pub order: Vec<usize>,
    pub models: Vec<M>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode<M> {
    pub target: usize,
    pub children: Vec<usize>,
    pub model: M,
}

/// MOTC dependency tree in breadth-first order; node 0 is the root and
/// children always have larger indices than their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTree<M> {
    pub nodes: Vec<TreeNode<M>>,
}

impl<M> TargetTree<M> {
    /// Descendants of `node` in depth-first pre-order, excluding `node`.
    pub fn descendants(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.nodes[node].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev().copied());
        }
        out
    }
}

/// Trained layout of a multi-target method, generic over how each model is
/// held (in memory, or as a file reference inside a bundle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Structure<M> {
    /// ST: `models[t]` on the original features.
    Independent { models: Vec<M> },
    /// SST and DRS: layer 0 on `x`, layer `L` on `[x ‖ ŷ^(L-1)]`.
    Layered { layers: Vec<Vec<M>> },
    /// ERC.
    Chains { chains: Vec<Chain<M>> },
    /// MOTC: `trees[t]` is rooted at target `t`.
    Trees { trees: Vec<TargetTree<M>> },
    /// MTAS (`with_features`) and MTSG: `level0[r][t]`, per-target masks over
    /// the `j·d` prediction columns, and `level1[t]`.
    Augmented {
        level0: Vec<Vec<M>>,
        masks: Vec<Vec<bool>>,
        level1: Vec<M>,
        with_features: bool,
    },
}

impl<M> Structure<M> {
    /// Applies `f` to every model in a fixed traversal order.
    pub fn try_map<N, E>(&self, mut f: impl FnMut(&M) -> Result<N, E>) -> Result<Structure<N>, E> {
        let map_vec = |v: &[M], f: &mut dyn FnMut(&M) -> Result<N, E>| -> Result<Vec<N>, E> {
            v.iter().map(f).collect()
        };
        Ok(match self {
            Structure::Independent { models } => Structure::Independent {
                models: map_vec(models, &mut f)?,
            },
            Structure::Layered { layers } => Structure::Layered {
                layers: layers
                    .iter()
                    .map(|l| map_vec(l, &mut f))
                    .collect::<Result<_, E>>()?,
            },
            Structure::Chains { chains } => Structure::Chains {
                chains: chains
                    .iter()
                    .map(|c| {
                        Ok(Chain {
                            order: c.order.clone(),
                            models: map_vec(&c.models, &mut f)?,
                        })
                    })
                    .collect::<Result<_, E>>()?,
            },
            Structure::Trees { trees } => Structure::Trees {
                trees: trees
                    .iter()
                    .map(|t| {
                        Ok(TargetTree {
                            nodes: t
                                .nodes
                                .iter()
                                .map(|n| {
                                    Ok(TreeNode {
                                        target: n.target,
                                        children: n.children.clone(),
                                        model: f(&n.model)?,
                                    })
                                })
                                .collect::<Result<_, E>>()?,
                        })
                    })
                    .collect::<Result<_, E>>()?,
            },
            Structure::Augmented {
                level0,
                masks,
                level1,
                with_features,
            } => Structure::Augmented {
                level0: level0
                    .iter()
                    .map(|l| map_vec(l, &mut f))
                    .collect::<Result<_, E>>()?,
                masks: masks.clone(),
                level1: map_vec(level1, &mut f)?,
                with_features: *with_features,
            },
        })
    }

    /// All models in traversal order.
    pub fn models(&self) -> Vec<&M> {
        let mut refs = Vec::new();
        match self {
            Structure::Independent { models } => refs.extend(models),
            Structure::Layered { layers } => layers.iter().for_each(|l| refs.extend(l)),
            Structure::Chains { chains } => chains.iter().for_each(|c| refs.extend(&c.models)),
            Structure::Trees { trees } => trees
                .iter()
                .for_each(|t| refs.extend(t.nodes.iter().map(|n| &n.model))),
            Structure::Augmented { level0, level1, .. } => {
                level0.iter().for_each(|l| refs.extend(l));
                refs.extend(level1);
            }
        }
        refs
    }
}

/// A trained multi-target predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTargetModel {
    pub spec: MtrMethodSpec,
    pub target_names: Vec<String>,
    pub feature_count: usize,
    pub structure: Structure<RegressionModel>,
}

/// `[x ‖ extra columns]`.
pub(crate) fn augment(x: ArrayView2<f64>, extra: &[Array1<f64>]) -> Array2<f64> {
    let f = x.ncols();
    let mut out = Array2::zeros((x.nrows(), f + extra.len()));
    out.slice_mut(s![.., ..f]).assign(&x);
    for (j, c) in extra.iter().enumerate() {
        out.column_mut(f + j).assign(c);
    }
    out
}

pub(crate) fn columns(n: usize, cols: &[Array1<f64>]) -> Array2<f64> {
    let mut out = Array2::zeros((n, cols.len()));
    for (j, c) in cols.iter().enumerate() {
        out.column_mut(j).assign(c);
    }
    out
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptedModel(msg.into())
}

impl MultiTargetModel {
    pub fn n_targets(&self) -> usize {
        self.target_names.len()
    }

    pub fn n_models(&self) -> usize {
        self.structure.models().len()
    }

    /// Input columns of the final model for `target`.
    pub fn input_provenance(&self, target: usize) -> Vec<ColumnSource> {
        let d = self.n_targets();
        let features = (0..self.feature_count).map(ColumnSource::Feature);
        match &self.structure {
            Structure::Independent { .. } => features.collect(),
            Structure::Layered { layers } if layers.len() > 1 => features
                .chain((0..d).map(|t| ColumnSource::Prediction { learner: 0, target: t }))
                .collect(),
            Structure::Layered { .. } => features.collect(),
            Structure::Chains { .. } | Structure::Trees { .. } => features.collect(),
            Structure::Augmented {
                masks,
                with_features,
                ..
            } => {
                let preds = masks[target]
                    .iter()
                    .enumerate()
                    .filter(|(_, &keep)| keep)
                    .map(|(c, _)| ColumnSource::Prediction {
                        learner: c / d,
                        target: c % d,
                    });
                if *with_features {
                    features.chain(preds).collect()
                } else {
                    preds.collect()
                }
            }
        }
    }

    /// Checks the internal dimensions; used after loading from disk.
    pub fn validate(&self) -> Result<()> {
        let d = self.n_targets();
        let f = self.feature_count;
        if d == 0 || f == 0 {
            return Err(corrupt("model has no targets or no features"));
        }
        let expect = |m: &RegressionModel, width: usize, what: &str| {
            if m.feature_count != width {
                Err(corrupt(format!(
                    "{what}: input width {} but structure implies {width}",
                    m.feature_count
                )))
            } else {
                Ok(())
            }
        };
        match &self.structure {
            Structure::Independent { models } => {
                if models.len() != d {
                    return Err(corrupt("ST model count differs from target count"));
                }
                for m in models {
                    expect(m, f, "ST model")?;
                }
            }
            Structure::Layered { layers } => {
                if layers.is_empty() {
                    return Err(corrupt("layered model without layers"));
                }
                for (l, layer) in layers.iter().enumerate() {
                    if layer.len() != d {
                        return Err(corrupt(format!("layer {l} has {} models", layer.len())));
                    }
                    for m in layer {
                        expect(m, if l == 0 { f } else { f + d }, "layer model")?;
                    }
                }
            }
            Structure::Chains { chains } => {
                if chains.is_empty() {
                    return Err(corrupt("ERC model without chains"));
                }
                for c in chains {
                    let mut sorted = c.order.clone();
                    sorted.sort_unstable();
                    if sorted != (0..d).collect::<Vec<_>>() || c.models.len() != d {
                        return Err(corrupt("chain is not a permutation of the targets"));
                    }
                    for (k, m) in c.models.iter().enumerate() {
                        expect(m, f + k, "chain model")?;
                    }
                }
            }
            Structure::Trees { trees } => {
                if trees.len() != d {
                    return Err(corrupt("MOTC tree count differs from target count"));
                }
                for (t, tree) in trees.iter().enumerate() {
                    if tree.nodes.first().map(|n| n.target) != Some(t) {
                        return Err(corrupt(format!("tree {t} is not rooted at its target")));
                    }
                    for (i, node) in tree.nodes.iter().enumerate() {
                        if node.target >= d || node.children.iter().any(|&c| c <= i || c >= tree.nodes.len()) {
                            return Err(corrupt(format!("tree {t} has an invalid node {i}")));
                        }
                        expect(&node.model, f + tree.descendants(i).len(), "tree node")?;
                    }
                }
            }
            Structure::Augmented {
                level0,
                masks,
                level1,
                with_features,
            } => {
                let j = level0.len();
                if j == 0 || level0.iter().any(|l| l.len() != d) {
                    return Err(corrupt("Level-0 grid does not match the target count"));
                }
                for m in level0.iter().flatten() {
                    expect(m, f, "Level-0 model")?;
                }
                if masks.len() != d || level1.len() != d {
                    return Err(corrupt("mask or Level-1 count differs from target count"));
                }
                for (t, mask) in masks.iter().enumerate() {
                    let kept = mask.iter().filter(|&&k| k).count();
                    if mask.len() != j * d || kept == 0 {
                        return Err(corrupt(format!("invalid filter mask for target {t}")));
                    }
                    let width = if *with_features { f + kept } else { kept };
                    expect(&level1[t], width, "Level-1 model")?;
                }
            }
        }
        Ok(())
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<PredictionMatrix> {
        if x.ncols() != self.feature_count {
            return Err(Error::shape(
                format!("{} feature columns", self.feature_count),
                format!("{} feature columns", x.ncols()),
            ));
        }
        let n = x.nrows();
        let d = self.n_targets();
        let values = if n == 0 {
            Array2::zeros((0, d))
        } else {
            self.predict_rows(x)?
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(corrupt("non-finite prediction"));
        }
        Ok(PredictionMatrix {
            values,
            target_names: self.target_names.clone(),
        })
    }

    fn predict_rows(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let n = x.nrows();
        let d = self.n_targets();
        let predict_all = |models: &[RegressionModel], input: ArrayView2<f64>| -> Result<Vec<Array1<f64>>> {
            models.iter().map(|m| m.predict(input)).collect()
        };
        Ok(match &self.structure {
            Structure::Independent { models } => columns(n, &predict_all(models, x)?),
            Structure::Layered { layers } => {
                let mut prev = predict_all(&layers[0], x)?;
                for layer in &layers[1..] {
                    let input = augment(x, &prev);
                    prev = predict_all(layer, input.view())?;
                }
                columns(n, &prev)
            }
            Structure::Chains { chains } => {
                let mut sum = Array2::<f64>::zeros((n, d));
                for chain in chains {
                    let mut so_far: Vec<Array1<f64>> = Vec::with_capacity(d);
                    for (k, m) in chain.models.iter().enumerate() {
                        let input = augment(x, &so_far);
                        let p = m.predict(input.view())?;
                        let mut col = sum.column_mut(chain.order[k]);
                        col += &p;
                        so_far.push(p);
                    }
                }
                sum / chains.len() as f64
            }
            Structure::Trees { trees } => {
                let roots = trees
                    .iter()
                    .map(|tree| predict_tree(tree, x))
                    .collect::<Result<Vec<_>>>()?;
                columns(n, &roots)
            }
            Structure::Augmented {
                level0,
                masks,
                level1,
                with_features,
            } => {
                let mut y0 = Vec::with_capacity(level0.len() * d);
                for learner in level0 {
                    y0.extend(predict_all(learner, x)?);
                }
                let mut out = Vec::with_capacity(d);
                for (t, m) in level1.iter().enumerate() {
                    let kept: Vec<Array1<f64>> = masks[t]
                        .iter()
                        .zip(&y0)
                        .filter(|(&k, _)| k)
                        .map(|(_, c)| c.clone())
                        .collect();
                    let input = if *with_features {
                        augment(x, &kept)
                    } else {
                        columns(n, &kept)
                    };
                    out.push(m.predict(input.view())?);
                }
                columns(n, &out)
            }
        })
    }
}

fn predict_tree(tree: &TargetTree<RegressionModel>, x: ArrayView2<f64>) -> Result<Array1<f64>> {
    let mut preds: Vec<Option<Array1<f64>>> = vec![None; tree.nodes.len()];
    for i in (0..tree.nodes.len()).rev() {
        let extra: Vec<Array1<f64>> = tree
            .descendants(i)
            .into_iter()
            .map(|dsc| preds[dsc].clone().expect("descendants predicted first"))
            .collect();
        let input = augment(x, &extra);
        preds[i] = Some(tree.nodes[i].model.predict(input.view())?);
    }
    Ok(preds.swap_remove(0).expect("root predicted"))
}
