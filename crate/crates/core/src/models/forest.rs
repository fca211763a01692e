//! Bagged ensemble of regression trees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{tree_fit, Tree, TreeConfig};
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub tree: TreeConfig,
    /// Resample `n` rows with replacement per tree; otherwise every tree sees
    /// the full sample.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            tree: TreeConfig::default(),
            bootstrap: true,
            seed: crate::datagen::DEFAULT_SEED,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::config("forest needs at least one tree"));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    config: ForestConfig,
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn predict_one(&self, x: f64) -> f64 {
        mean_anchored(self.trees.iter().map(|t| t.predict_one(x)))
    }
}

/// Tree `t` is grown on the bootstrap sample drawn from
/// `Stream::new(derive_seed(config.seed, t))`, `n` calls to `below(n)`.
pub fn forest_fit(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = data.len();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            if config.bootstrap {
                let mut rng = Stream::new(derive_seed(config.seed, t as u64));
                let idx: Vec<usize> = (0..n).map(|_| rng.below(n as u64) as usize).collect();
                tree_fit(&data.select(&idx), &config.tree)
            } else {
                tree_fit(data, &config.tree)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        config: *config,
    })
}

pub fn forest_predict(forest: &Forest, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| forest.predict_one(x)).collect()
}

/// Arithmetic mean computed as an offset from the first element, so equal
/// inputs average to exactly that value.
fn mean_anchored(mut values: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = values.next() else {
        return f64::NAN;
    };
    let (sum, count) = values.fold((0.0, 1usize), |(s, c), v| (s + (v - first), c + 1));
    first + sum / count as f64
}
