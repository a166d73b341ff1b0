use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::metrics::sample_sd;
use crate::tabular::Dataset;

/// Shape of the correlated-target benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub features: usize,
    pub targets: usize,
    pub latent: usize,
    /// Noise SD as a fraction of each target's signal SD.
    pub noise_ratio: f64,
    /// Noise SD added to each feature.
    pub feature_noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            rows: 300,
            features: 20,
            targets: 4,
            latent: 3,
            noise_ratio: 0.2,
            feature_noise: 0.3,
        }
    }
}

/// Draws a dataset whose features and targets share `latent` hidden factors.
///
/// Features are noisy linear mixtures of the factors. Each target is a
/// linear plus a quadratic function of the factors with Gaussian noise
/// scaled to the target's signal SD.
pub fn correlated_targets(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let (n, k) = (spec.rows, spec.latent);
    let z = Array2::from_shape_simple_fn((n, k), || normal(&mut rng));
    let loadings = Array2::from_shape_simple_fn((k, spec.features), || normal(&mut rng));
    let noise = Array2::from_shape_simple_fn((n, spec.features), || normal(&mut rng));
    let x = z.dot(&loadings) + noise * spec.feature_noise;

    let mut y = Array2::zeros((n, spec.targets));
    for t in 0..spec.targets {
        let linear = Array1::from_shape_simple_fn(k, || normal(&mut rng));
        let inner = Array1::from_shape_simple_fn(k, || normal(&mut rng));
        let weight: f64 = rng.gen_range(0.3..1.0);
        let signal = z.dot(&linear) + z.dot(&inner).mapv(|v| weight * v * v);
        let sd = sample_sd(signal.view()).unwrap_or(1.0) * spec.noise_ratio;
        let mut col = y.column_mut(t);
        for (i, s) in signal.iter().enumerate() {
            col[i] = s + sd * normal(&mut rng);
        }
    }
    Dataset::from_arrays(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pearson;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec::default();
        let a = correlated_targets(&spec, 3).unwrap();
        assert_eq!((a.n_rows(), a.n_features(), a.n_targets()), (300, 20, 4));
        assert_eq!(a, correlated_targets(&spec, 3).unwrap());
        assert_ne!(a, correlated_targets(&spec, 4).unwrap());
    }

    #[test]
    fn targets_share_structure() {
        let d = correlated_targets(&SyntheticSpec::default(), 11).unwrap();
        let y = d.y();
        let strongest = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .map(|(a, b)| pearson(y.column(a), y.column(b)).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(strongest > 0.2, "strongest inter-target correlation {strongest}");
    }
}
