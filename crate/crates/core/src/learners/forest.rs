use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Tree};
use super::RfParams;

/// Bagged ensemble of CART regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Unnormalised SSE decrease per feature, summed over all trees.
    pub raw_importance: Vec<f64>,
    pub y_min: f64,
    pub y_max: f64,
}

/// Tree `index` draws from its own ChaCha stream under the forest seed, so
/// trees can be grown in any order or in parallel with identical results.
pub(crate) fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl Forest {
    pub(crate) fn fit(params: &RfParams, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Forest {
        let n = x.nrows();
        let f = x.ncols();
        let grow = GrowParams {
            mtry: params.mtry.unwrap_or(f.div_ceil(3)).clamp(1, f),
            min_node_size: params.min_node_size,
        };
        let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut imp = vec![0.0; f];
                let tree = Tree::grow(x, y, bootstrap, &grow, &mut rng, &mut imp);
                (tree, imp)
            })
            .collect();

        let mut raw_importance = vec![0.0; f];
        let mut trees = Vec::with_capacity(grown.len());
        for (tree, imp) in grown {
            for (acc, v) in raw_importance.iter_mut().zip(imp) {
                *acc += v;
            }
            trees.push(tree);
        }
        let (y_min, y_max) = y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Forest {
            trees,
            raw_importance,
            y_min,
            y_max,
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        let k = self.trees.len() as f64;
        x.outer_iter()
            .map(|row| {
                let s: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
                (s / k).clamp(self.y_min, self.y_max)
            })
            .collect()
    }

    pub fn importance(&self) -> Vec<f64> {
        let total: f64 = self.raw_importance.iter().sum();
        if total > 0.0 {
            self.raw_importance.iter().map(|v| v / total).collect()
        } else {
            vec![0.0; self.raw_importance.len()]
        }
    }
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array1, Array2};
    use rand::Rng;

    use super::*;
    use crate::learners::{train, LearnerSpec};

    fn noisy_data(seed: u64, n: usize, f: usize) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, f), |_| rng.gen_range(-1.0..1.0));
        let y = x.column(0).to_owned();
        (x, y)
    }

    #[test]
    fn single_point_stump() {
        let x = array![[0.0]];
        let y = array![3.0];
        let m = train(&LearnerSpec::rf().with_trees(1), x.view(), y.view()).unwrap();
        let p = m.predict(array![[-5.0], [0.0], [9.0]].view()).unwrap();
        assert_eq!(p.to_vec(), vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn seeded_determinism() {
        let (x, y) = noisy_data(7, 60, 4);
        let spec = LearnerSpec::rf().with_trees(30).with_seed(11);
        let a = train(&spec, x.view(), y.view()).unwrap();
        let b = train(&spec, x.view(), y.view()).unwrap();
        assert_eq!(a, b);
        let c = train(&spec.clone().with_seed(12), x.view(), y.view()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn parallel_matches_sequential() {
        let (x, y) = noisy_data(3, 80, 5);
        let spec = LearnerSpec::rf().with_trees(40).with_seed(5);
        let par = train(&spec, x.view(), y.view()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let seq = pool.install(|| train(&spec, x.view(), y.view()).unwrap());
        assert_eq!(par, seq);
    }

    #[test]
    fn importance_normalised_and_finds_signal() {
        let (x, y) = noisy_data(1, 120, 5);
        let m = train(&LearnerSpec::rf().with_trees(100).with_seed(2), x.view(), y.view()).unwrap();
        let imp = m.rf_importance().unwrap();
        assert!((imp.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp.values().iter().all(|&v| v >= 0.0));
        assert_eq!(imp.argmax(), 0);
    }

    #[test]
    fn constant_target_zero_importance() {
        let (x, _) = noisy_data(1, 30, 3);
        let y = Array1::from_elem(30, 2.0);
        let m = train(&LearnerSpec::rf().with_trees(10), x.view(), y.view()).unwrap();
        assert_eq!(m.rf_importance().unwrap().values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn more_trees_fit_no_worse() {
        let (x, y) = noisy_data(9, 100, 3);
        let rmse = |trees: usize| {
            let m = train(&LearnerSpec::rf().with_trees(trees).with_seed(4), x.view(), y.view())
                .unwrap();
            let p = m.predict(x.view()).unwrap();
            ((&p - &y).mapv(|e| e * e).sum() / y.len() as f64).sqrt()
        };
        assert!(rmse(100) <= rmse(1));
    }
}
