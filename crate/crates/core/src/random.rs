//! Seeded multiscale random step functions on the unit cube.
//!
//! The value on a cell at depth `D` is `Σ_{j<D} 2^{-decay·j} ξ(Q_j, c_j)`,
//! where `Q_j` is the ancestor at depth `j`, `c_j` the child of `Q_j` holding
//! the cell, and `ξ(Q, ·)` a mean-zero vector drawn from a generator keyed by
//! `(seed, index, Q)`. Raising `depth` therefore refines the same function:
//! the depth-`D` function is the conditional expectation of the depth-`D+1`
//! one.

use crate::cube::DyadicCube;
use crate::error::{param, Result};
use crate::function::StepFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModel {
    pub n: usize,
    pub depth: u32,
    /// Detail at depth `j` scales like `2^{-decay·j}`.
    pub decay: f64,
    /// Probability that a cube below the root stops refining (its subtree
    /// stays constant).
    pub stop: f64,
    /// Positive part of the signed function.
    pub nonnegative: bool,
}

impl RandomModel {
    pub fn new(n: usize, depth: u32) -> RandomModel {
        RandomModel { n, depth, decay: 1.0, stop: 0.0, nonnegative: false }
    }

    pub fn decay(mut self, d: f64) -> RandomModel {
        self.decay = d;
        self
    }

    pub fn stop(mut self, s: f64) -> RandomModel {
        self.stop = s;
        self
    }

    pub fn nonnegative(mut self, yes: bool) -> RandomModel {
        self.nonnegative = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 3 {
            return param("random functions need dimension 1, 2 or 3");
        }
        if self.depth as usize * self.n > 20 {
            return param(format!("depth {} is too large for dimension {} (at most 2^20 cells)", self.depth, self.n));
        }
        if !(0.0..1.0).contains(&self.stop) || !self.decay.is_finite() {
            return param("stop must lie in [0,1) and decay must be finite");
        }
        Ok(())
    }
}

/// Generator keyed by `(seed, index, cube)`.
fn keyed_rng(seed: u64, index: u64, q: &DyadicCube) -> ChaCha8Rng {
    let mut key = seed ^ index.rotate_left(32);
    for x in std::iter::once(i64::from(q.level)).chain(q.index.iter().copied()) {
        key = key.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(x as u64);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Function number `index` of the family `(model, seed)`, rooted at the
/// unit cube.
pub fn random_function(model: &RandomModel, seed: u64, index: u64) -> Result<StepFunction> {
    model.validate()?;
    let root = DyadicCube::unit(model.n);
    let mut leaves = Vec::new();
    let mut stack = vec![(root.clone(), 0.0f64, 0u32)];
    while let Some((q, v, j)) = stack.pop() {
        let mut rng = keyed_rng(seed, index, &q);
        let stops = rng.gen::<f64>() < model.stop && j > 0;
        if j == model.depth || stops {
            leaves.push((q, v));
            continue;
        }
        let kids = q.children();
        let u: Vec<f64> = (0..kids.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        let amp = (-model.decay * f64::from(j)).exp2();
        for (c, x) in kids.into_iter().zip(u) {
            stack.push((c, v + amp * (x - mean), j + 1));
        }
    }
    if model.nonnegative {
        for l in leaves.iter_mut() {
            l.1 = l.1.max(0.0);
        }
    }
    StepFunction::from_leaves(root, leaves)
}

/// `count` functions `index = 0..count`.
pub fn random_family(model: &RandomModel, seed: u64, count: u64) -> Result<Vec<StepFunction>> {
    (0..count).map(|i| random_function(model, seed, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Field;

    #[test]
    fn deeper_functions_refine_shallower_ones() {
        let m5 = RandomModel::new(2, 5).decay(1.5).stop(0.1);
        let m6 = RandomModel { depth: 6, ..m5 };
        for i in 0..5 {
            let f5 = random_function(&m5, 3, i).unwrap();
            let f6 = Field::lebesgue(&random_function(&m6, 3, i).unwrap());
            for (c, v) in f5.leaves() {
                assert!((f6.stats(&c).mean - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regenerates_identically() {
        let m = RandomModel::new(1, 8).stop(0.2);
        assert_eq!(random_function(&m, 9, 4).unwrap().leaves(), random_function(&m, 9, 4).unwrap().leaves());
        assert_ne!(random_function(&m, 9, 4).unwrap().leaves(), random_function(&m, 9, 5).unwrap().leaves());
    }

    #[test]
    fn nonnegative_values() {
        let m = RandomModel::new(1, 6).nonnegative(true);
        assert!(random_function(&m, 1, 0).unwrap().leaves().iter().all(|l| l.1 >= 0.0));
    }
}
