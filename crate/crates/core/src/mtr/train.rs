use std::collections::HashSet;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::filter::RelevanceFilter;
use super::level0::fit_with_predictions;
use super::model::{augment, columns, Chain, MultiTargetModel, Structure, TargetTree, TreeNode};
use super::seeds::{derive, Role};
use super::spec::{Method, MtrMethodSpec};
use crate::error::{Error, Result};
use crate::learners::{train as train_learner, LearnerSpec, RegressionModel};
use crate::metrics::pearson;

type Fitted = (RegressionModel, Array1<f64>);

fn check_inputs(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<()> {
    spec.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::shape(format!("{} target rows", x.nrows()), format!("{} target rows", y.nrows())));
    }
    if x.nrows() == 0 || x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::EmptyTable("training data has no rows, features or targets".into()));
    }
    if names.len() != y.ncols() {
        return Err(Error::shape(
            format!("{} target names", y.ncols()),
            format!("{} target names", names.len()),
        ));
    }
    Ok(())
}

/// Fits `learner` on every target in parallel, seeding target `t` with
/// `derive(seed, role, t)`.
fn fit_targets(
    spec: &MtrMethodSpec,
    learner: &LearnerSpec,
    role: Role,
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
) -> Result<Vec<Fitted>> {
    (0..y.ncols())
        .into_par_iter()
        .map(|t| {
            fit_with_predictions(learner, derive(spec.seed, role, t), x, y.column(t), spec.stacking)
                .map_err(|e| e.for_target(t))
        })
        .collect()
}

fn split(fitted: Vec<Fitted>) -> (Vec<RegressionModel>, Vec<Array1<f64>>) {
    fitted.into_iter().unzip()
}

fn finish(
    spec: &MtrMethodSpec,
    method: Method,
    x: ArrayView2<f64>,
    names: &[String],
    structure: Structure<RegressionModel>,
) -> MultiTargetModel {
    MultiTargetModel {
        spec: spec.clone().with_method(method),
        target_names: names.to_vec(),
        feature_count: x.ncols(),
        structure,
    }
}

/// Trains the method selected by `spec.method`.
pub fn train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    match spec.method {
        Method::St => st_train(spec, x, y, names),
        Method::Sst => sst_train(spec, x, y, names),
        Method::Erc => erc_train(spec, x, y, names),
        Method::Motc => motc_train(spec, x, y, names),
        Method::Drs => drs_train(spec, x, y, names),
        Method::Mtas => mtas_train(spec, x, y, names),
        Method::Mtsg => mtsg_train(spec, x, y, names),
    }
}

pub fn st_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let models: Vec<RegressionModel> = (0..y.ncols())
        .into_par_iter()
        .map(|t| {
            let s = spec.base.clone().with_seed(derive(spec.seed, Role::Plain { learner: 0 }, t));
            train_learner(&s, x, y.column(t)).map_err(|e| e.for_target(t))
        })
        .collect::<Result<_>>()?;
    Ok(finish(spec, Method::St, x, names, Structure::Independent { models }))
}

fn layered(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, n_layers: usize) -> Result<Vec<Vec<RegressionModel>>> {
    let (first, mut prev) = split(fit_targets(spec, &spec.base, Role::Plain { learner: 0 }, x, y)?);
    let mut layers = vec![first];
    for layer in 1..=n_layers {
        let input = augment(x, &prev);
        let (models, preds) = split(fit_targets(spec, &spec.base, Role::Stacked { layer }, input.view(), y)?);
        layers.push(models);
        prev = preds;
    }
    Ok(layers)
}

pub fn sst_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let layers = layered(spec, x, y, 1)?;
    Ok(finish(spec, Method::Sst, x, names, Structure::Layered { layers }))
}

pub fn drs_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let layers = layered(spec, x, y, spec.drs_max_layers)?;
    Ok(finish(spec, Method::Drs, x, names, Structure::Layered { layers }))
}

fn factorial(d: usize) -> Option<usize> {
    (1..=d).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// `min(count, d!)` distinct permutations of `0..d`, in draw order.
pub(crate) fn chain_orders(d: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let count = factorial(d).map_or(count, |f| count.min(f));
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Role::ChainOrder, 0));
    let mut seen = HashSet::new();
    let mut orders = Vec::with_capacity(count);
    while orders.len() < count {
        let mut p: Vec<usize> = (0..d).collect();
        p.shuffle(&mut rng);
        if seen.insert(p.clone()) {
            orders.push(p);
        }
    }
    orders
}

fn train_chain(spec: &MtrMethodSpec, c: usize, order: Vec<usize>, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Chain<RegressionModel>> {
    let mut models = Vec::with_capacity(order.len());
    let mut preds: Vec<Array1<f64>> = Vec::with_capacity(order.len());
    for (k, &t) in order.iter().enumerate() {
        let role = if k == 0 {
            Role::Plain { learner: 0 }
        } else {
            Role::Chain { chain: c, position: k }
        };
        let input = augment(x, &preds);
        let (m, p) = fit_with_predictions(&spec.base, derive(spec.seed, role, t), input.view(), y.column(t), spec.stacking)
            .map_err(|e| e.for_target(t))?;
        models.push(m);
        preds.push(p);
    }
    Ok(Chain { order, models })
}

pub fn erc_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let orders = chain_orders(y.ncols(), spec.erc_chains, spec.seed);
    let chains = orders
        .into_par_iter()
        .enumerate()
        .map(|(c, order)| train_chain(spec, c, order, x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(spec, Method::Erc, x, names, Structure::Chains { chains }))
}

/// Breadth-first dependency tree rooted at `root`; children are the targets
/// with the largest absolute correlation not yet in the tree.
pub(crate) fn build_tree(root: usize, corr: &[Vec<f64>], max_children: usize, max_depth: usize) -> Vec<(usize, Vec<usize>)> {
    let d = corr.len();
    let mut nodes: Vec<(usize, Vec<usize>)> = vec![(root, Vec::new())];
    let mut depth = vec![0usize];
    let mut used = vec![false; d];
    used[root] = true;
    let mut i = 0;
    while i < nodes.len() {
        if depth[i] < max_depth {
            let target = nodes[i].0;
            let mut candidates: Vec<usize> = (0..d).filter(|&c| !used[c]).collect();
            candidates.sort_by(|&a, &b| corr[target][b].total_cmp(&corr[target][a]).then(a.cmp(&b)));
            for c in candidates.into_iter().take(max_children) {
                used[c] = true;
                let next = nodes.len();
                nodes[i].1.push(next);
                nodes.push((c, Vec::new()));
                depth.push(depth[i] + 1);
            }
        }
        i += 1;
    }
    nodes
}

fn abs_correlations(y: ArrayView2<f64>) -> Vec<Vec<f64>> {
    let d = y.ncols();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| pearson(y.column(a), y.column(b)).map_or(0.0, f64::abs))
                .collect()
        })
        .collect()
}

pub fn motc_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let corr = abs_correlations(y);
    // Nodes without descendants are plain per-target models, shared by every tree.
    let plain = fit_targets(spec, &spec.base, Role::Plain { learner: 0 }, x, y)?;
    let trees = (0..y.ncols())
        .into_par_iter()
        .map(|root| {
            let layout = build_tree(root, &corr, spec.motc_max_children, spec.motc_max_depth);
            let shape = TargetTree {
                nodes: layout
                    .iter()
                    .map(|(target, children)| TreeNode {
                        target: *target,
                        children: children.clone(),
                        model: (),
                    })
                    .collect(),
            };
            let mut fitted: Vec<Option<Fitted>> = vec![None; layout.len()];
            for i in (0..layout.len()).rev() {
                let target = layout[i].0;
                let desc = shape.descendants(i);
                fitted[i] = Some(if desc.is_empty() {
                    plain[target].clone()
                } else {
                    let extra: Vec<Array1<f64>> = desc
                        .iter()
                        .map(|&n| fitted[n].as_ref().expect("children fitted first").1.clone())
                        .collect();
                    let input = augment(x, &extra);
                    let seed = derive(spec.seed, Role::TreeNode { node: i }, root);
                    fit_with_predictions(&spec.base, seed, input.view(), y.column(target), spec.stacking)
                        .map_err(|e| e.for_target(target))?
                });
            }
            Ok(TargetTree {
                nodes: layout
                    .into_iter()
                    .zip(fitted)
                    .map(|((target, children), f)| TreeNode {
                        target,
                        children,
                        model: f.expect("all nodes fitted").0,
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(spec, Method::Motc, x, names, Structure::Trees { trees }))
}

/// Level-0 grid and its `n × (j·d)` prediction columns, learner-major.
fn level0_grid(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(Vec<Vec<RegressionModel>>, Vec<Array1<f64>>)> {
    let mut grid = Vec::with_capacity(spec.level0_pool.len());
    let mut cols = Vec::with_capacity(spec.level0_pool.len() * y.ncols());
    for (r, learner) in spec.level0_pool.iter().enumerate() {
        let (models, preds) = split(fit_targets(spec, learner, Role::Plain { learner: r }, x, y)?);
        grid.push(models);
        cols.extend(preds);
    }
    Ok((grid, cols))
}

fn augmented(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, with_features: bool) -> Result<Structure<RegressionModel>> {
    let (level0, cols) = level0_grid(spec, x, y)?;
    let n = x.nrows();
    let d = y.ncols();
    let y0 = columns(n, &cols);
    let filter = RelevanceFilter {
        rule: spec.filter_rule,
        trees: spec.filter_trees,
    };
    let (masks, level1): (Vec<Vec<bool>>, Vec<RegressionModel>) = (0..d)
        .into_par_iter()
        .map(|t| {
            let mask = filter
                .mask(y0.view(), y.column(t), t, d, derive(spec.seed, Role::Filter, t))
                .map_err(|e| e.for_target(t))?;
            let kept: Vec<Array1<f64>> = mask
                .iter()
                .zip(&cols)
                .filter(|(&k, _)| k)
                .map(|(_, c)| c.clone())
                .collect();
            let input = if with_features { augment(x, &kept) } else { columns(n, &kept) };
            let s = spec.base.clone().with_seed(derive(spec.seed, Role::Stacked { layer: 1 }, t));
            let model = train_learner(&s, input.view(), y.column(t)).map_err(|e| e.for_target(t))?;
            Ok((mask, model))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(Structure::Augmented {
        level0,
        masks,
        level1,
        with_features,
    })
}

pub fn mtas_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let structure = augmented(spec, x, y, true)?;
    Ok(finish(spec, Method::Mtas, x, names, structure))
}

pub fn mtsg_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView2<f64>, names: &[String]) -> Result<MultiTargetModel> {
    check_inputs(spec, x, y, names)?;
    let structure = augmented(spec, x, y, false)?;
    Ok(finish(spec, Method::Mtsg, x, names, structure))
}

/// Single-target stacked generalization: the pool predicts `y`, and the
/// base learner combines those predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedGeneralization {
    pub level0: Vec<RegressionModel>,
    pub level1: RegressionModel,
}

impl StackedGeneralization {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        let cols = self
            .level0
            .iter()
            .map(|m| m.predict(x))
            .collect::<Result<Vec<_>>>()?;
        let z = columns(x.nrows(), &cols);
        self.level1.predict(z.view())
    }
}

/// Uses `spec.level0_pool`, `spec.base`, `spec.seed` and `spec.stacking`.
pub fn sg_train(spec: &MtrMethodSpec, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<StackedGeneralization> {
    let y2 = y.insert_axis(Axis(1));
    check_inputs(spec, x, y2, &["y".to_string()])?;
    let (grid, cols) = level0_grid(spec, x, y2)?;
    let level0 = grid.into_iter().flatten().collect();
    let z = columns(x.nrows(), &cols);
    let s = spec.base.clone().with_seed(derive(spec.seed, Role::Stacked { layer: 1 }, 0));
    let level1 = train_learner(&s, z.view(), y)?;
    Ok(StackedGeneralization { level0, level1 })
}
