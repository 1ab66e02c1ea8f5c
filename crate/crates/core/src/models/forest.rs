use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{argmax_count, Columns, Response, Tree, TreeParams};
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
    /// Bootstrap sample size as a fraction of the training rows.
    pub sample_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// `Some(k)` for classification forests (majority vote over `k` classes).
    pub n_classes: Option<usize>,
}

impl Forest {
    pub fn fit(cols: &Columns, response: Response<'_>, n: usize, params: &ForestParams, seed: u64) -> Forest {
        let trees = (0..params.n_trees)
            .map(|t| {
                let tree_seed = derive_seed(seed, &format!("forest/tree{t}"));
                let rows: Vec<usize> = if params.bootstrap {
                    let mut rng = rng_for(tree_seed, "bootstrap");
                    let m = ((n as f64 * params.sample_fraction).round() as usize).max(1);
                    (0..m).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut rng = rng_for(tree_seed, "features");
                Tree::fit(cols, response, rows, params.tree, Some(&mut rng))
            })
            .collect();
        let n_classes = match response {
            Response::Real(_) => None,
            Response::Class { n_classes, .. } => Some(n_classes),
        };
        Forest { trees, n_classes }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.n_classes {
            None => self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64,
            Some(k) => {
                let mut votes = vec![0usize; k];
                for t in &self.trees {
                    votes[t.predict_row(row) as usize] += 1;
                }
                argmax_count(&votes) as f64
            }
        }
    }

    pub fn gains(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.trees.first().map_or(0, |t| t.gains().len())];
        for t in &self.trees {
            for (a, g) in total.iter_mut().zip(t.gains()) {
                *a += g;
            }
        }
        total
    }
}
