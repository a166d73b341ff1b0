//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize, f: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, f), || rng.gen_range(lo..hi))
}

fn mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

pub fn rmse_oracle(a: ArrayView1<f64>, p: ArrayView1<f64>) -> f64 {
    let a: Vec<f64> = a.to_vec();
    let p: Vec<f64> = p.to_vec();
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - p[i]).powi(2);
    }
    (s / a.len() as f64).sqrt()
}

pub fn rrmse_oracle(a: ArrayView1<f64>, p: ArrayView1<f64>) -> f64 {
    let av: Vec<f64> = a.to_vec();
    let m = mean(&av);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..av.len() {
        num += (av[i] - p[i]).powi(2);
        den += (av[i] - m).powi(2);
    }
    (num / den).sqrt()
}

pub fn arrmse_oracle(a: ArrayView2<f64>, p: ArrayView2<f64>) -> f64 {
    let mut total = 0.0;
    for t in 0..a.ncols() {
        total += rrmse_oracle(a.column(t), p.column(t));
    }
    total / a.ncols() as f64
}

pub fn sd_oracle(a: ArrayView1<f64>) -> f64 {
    let v: Vec<f64> = a.to_vec();
    let m = mean(&v);
    let mut s = 0.0;
    for x in &v {
        s += (x - m) * (x - m);
    }
    (s / (v.len() - 1) as f64).sqrt()
}

pub fn pearson_oracle(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let av: Vec<f64> = a.to_vec();
    let bv: Vec<f64> = b.to_vec();
    let (ma, mb) = (mean(&av), mean(&bv));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for i in 0..av.len() {
        sab += (av[i] - ma) * (bv[i] - mb);
        saa += (av[i] - ma).powi(2);
        sbb += (bv[i] - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Greedy max–min selection over Euclidean distances, written as plainly as
/// possible: full distance matrix, exhaustive scans, strict comparisons so
/// the earliest index wins ties.
pub fn kennard_stone_oracle(x: ArrayView2<f64>, k: usize) -> (Vec<usize>, Vec<usize>) {
    let n = x.nrows();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for c in 0..x.ncols() {
                s += (x[[i, c]] - x[[j, c]]).powi(2);
            }
            dist[i][j] = s.sqrt();
        }
    }
    let mut best = (0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] > dist[best.0][best.1] {
                best = (i, j);
            }
        }
    }
    let mut chosen = vec![best.0, best.1];
    while chosen.len() < k {
        let mut pick = None;
        let mut pick_score = -1.0;
        for cand in 0..n {
            if chosen.contains(&cand) {
                continue;
            }
            let score = chosen.iter().map(|&s| dist[cand][s]).fold(f64::INFINITY, f64::min);
            if score > pick_score {
                pick = Some(cand);
                pick_score = score;
            }
        }
        chosen.push(pick.unwrap());
    }
    let rest = (0..n).filter(|i| !chosen.contains(i)).collect();
    (chosen, rest)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
