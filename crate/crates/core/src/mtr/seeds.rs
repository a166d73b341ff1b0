//! Role-keyed seed derivation.
//!
//! Every model inside a multi-target method gets its own seed, computed from
//! the method seed, the model's [`Role`] and its target. Models that play the
//! same role in two methods (for example the Level-0 model of target `t` in
//! ST and in SST) therefore receive the same seed.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Model trained on the original features only; `learner` indexes the pool.
    Plain { learner: usize },
    /// Stacked model of layer `layer ≥ 1`.
    Stacked { layer: usize },
    /// ERC model at `position ≥ 1` of chain `chain`.
    Chain { chain: usize, position: usize },
    /// MOTC inner node `node` of the tree rooted at the model's target.
    TreeNode { node: usize },
    /// Relevance-filter forest.
    Filter,
    /// Permutation draw for ERC.
    ChainOrder,
    /// Out-of-fold model for fold `fold` of an already derived seed.
    Fold { fold: usize },
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `parts` into one 64-bit seed.
pub fn mix(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn derive(seed: u64, role: Role, target: usize) -> u64 {
    let t = target as u64;
    match role {
        Role::Plain { learner } => mix(&[seed, 1, learner as u64, t]),
        Role::Stacked { layer } => mix(&[seed, 2, layer as u64, t]),
        Role::Chain { chain, position } => mix(&[seed, 3, chain as u64, position as u64, t]),
        Role::TreeNode { node } => mix(&[seed, 4, node as u64, t]),
        Role::Filter => mix(&[seed, 5, t]),
        Role::ChainOrder => mix(&[seed, 6]),
        Role::Fold { fold } => mix(&[seed, 7, fold as u64]),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn roles_do_not_collide() {
        let mut seen = HashSet::new();
        for t in 0..5 {
            for r in [
                Role::Plain { learner: 0 },
                Role::Plain { learner: 1 },
                Role::Stacked { layer: 1 },
                Role::Stacked { layer: 2 },
                Role::Chain { chain: 0, position: 1 },
                Role::TreeNode { node: 1 },
                Role::Filter,
            ] {
                assert!(seen.insert(derive(42, r, t)));
            }
        }
        assert_ne!(derive(1, Role::Filter, 0), derive(2, Role::Filter, 0));
    }
}
