use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// CART regression tree stored as a flat node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

pub(crate) struct GrowParams {
    pub mtry: usize,
    pub min_node_size: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Tree {
    /// Grows a tree on the rows listed in `samples` (duplicates allowed).
    ///
    /// Each split maximises the decrease in the sum of squared errors over
    /// `mtry` randomly drawn features; the decrease is added to
    /// `importance[feature]`.
    pub(crate) fn grow<R: Rng>(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        mut samples: Vec<usize>,
        params: &GrowParams,
        rng: &mut R,
        importance: &mut [f64],
    ) -> Tree {
        let mut nodes = vec![Node::Leaf(0.0)];
        // (node slot, lo, hi) into `samples`
        let mut stack = vec![(0usize, 0usize, samples.len())];
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(samples.len());

        while let Some((slot, lo, hi)) = stack.pop() {
            let idx = &mut samples[lo..hi];
            let n = idx.len();
            let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for &i in idx.iter() {
                let v = y[i];
                sum += v;
                min = min.min(v);
                max = max.max(v);
            }
            let leaf = Node::Leaf((sum / n as f64).clamp(min, max));
            if n <= params.min_node_size || min == max {
                nodes[slot] = leaf;
                continue;
            }

            let parent_score = sum * sum / n as f64;
            let mut best: Option<Candidate> = None;
            for feature in index::sample(rng, x.ncols(), params.mtry).into_iter() {
                pairs.clear();
                pairs.extend(idx.iter().map(|&i| (x[[i, feature]], y[i])));
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                if pairs[0].0 == pairs[n - 1].0 {
                    continue;
                }
                let mut left_sum = 0.0;
                for k in 0..n - 1 {
                    left_sum += pairs[k].1;
                    let (a, b) = (pairs[k].0, pairs[k + 1].0);
                    if a == b {
                        continue;
                    }
                    let nl = (k + 1) as f64;
                    let nr = (n - k - 1) as f64;
                    let right_sum = sum - left_sum;
                    let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent_score;
                    if best.as_ref().map_or(true, |c| gain > c.gain) {
                        let mut threshold = 0.5 * (a + b);
                        if threshold >= b {
                            threshold = a;
                        }
                        best = Some(Candidate {
                            feature,
                            threshold,
                            gain,
                        });
                    }
                }
            }

            let Some(split) = best.filter(|c| c.gain > 0.0) else {
                nodes[slot] = leaf;
                continue;
            };

            // partition in place, keeping relative order
            let mut left: Vec<usize> = Vec::with_capacity(n);
            let mut right: Vec<usize> = Vec::with_capacity(n);
            for &i in idx.iter() {
                if x[[i, split.feature]] <= split.threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            let mid = lo + left.len();
            idx[..left.len()].copy_from_slice(&left);
            idx[left.len()..].copy_from_slice(&right);

            importance[split.feature] += split.gain;
            let l = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: l as u32,
                right: (l + 1) as u32,
            };
            stack.push((l + 1, mid, hi));
            stack.push((l, lo, mid));
        }
        Tree { nodes }
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn grow(x: ArrayView2<f64>, y: ArrayView1<f64>, min_node_size: usize) -> (Tree, Vec<f64>) {
        let mut imp = vec![0.0; x.ncols()];
        let params = GrowParams {
            mtry: x.ncols(),
            min_node_size,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = Tree::grow(x, y, (0..x.nrows()).collect(), &params, &mut rng, &mut imp);
        (t, imp)
    }

    #[test]
    fn step_function_single_split() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = array![1.0, 1.0, 5.0, 5.0];
        let (t, imp) = grow(x.view(), y.view(), 1);
        assert_eq!(t.nodes.len(), 3);
        match t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 1.5),
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict_row(array![0.2].view()), 1.0);
        assert_eq!(t.predict_row(array![7.0].view()), 5.0);
        // SSE drops from 16 to 0
        assert!((imp[0] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn min_node_size_stops_growth() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = array![1.0, 2.0, 3.0, 4.0];
        let (t, imp) = grow(x.view(), y.view(), 4);
        assert_eq!(t.nodes, vec![Node::Leaf(2.5)]);
        assert_eq!(imp, vec![0.0]);
    }

    #[test]
    fn constant_features_make_leaf() {
        let x = array![[1.0], [1.0], [1.0]];
        let y = array![1.0, 2.0, 3.0];
        let (t, _) = grow(x.view(), y.view(), 1);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.n_leaves(), 1);
    }

    #[test]
    fn adjacent_floats_split_cleanly() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = array![[a], [b]];
        let y = array![0.0, 1.0];
        let (t, _) = grow(x.view(), y.view(), 1);
        assert_eq!(t.predict_row(array![a].view()), 0.0);
        assert_eq!(t.predict_row(array![b].view()), 1.0);
    }
}
