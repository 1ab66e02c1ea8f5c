//! Gradient boosting over regression trees.
//!
//! Real targets use squared-error residuals. Class targets keep one additive
//! score per class (one-vs-rest) driven by logistic gradients, with Newton
//! leaf values.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::tree::{mean_of, Columns, Response, Tree, TreeParams};
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
    pub subsample_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booster {
    /// One base score per output (a single one for regression).
    pub base: Vec<f64>,
    pub learning_rate: f64,
    /// `rounds[r][k]` is the tree for output `k` at round `r`.
    pub rounds: Vec<Vec<Tree>>,
}

fn round_rows(n: usize, fraction: f64, seed: u64, round: usize) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let m = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut rows = index::sample(&mut rng_for(seed, &format!("gboost/round{round}")), n, m).into_vec();
    rows.sort_unstable();
    rows
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Booster {
    pub fn fit_regression(cols: &Columns, y: &[f64], params: &BoostParams, seed: u64) -> Booster {
        let n = y.len();
        let all: Vec<usize> = (0..n).collect();
        let base = mean_of(y, &all);
        let mut score = vec![base; n];
        let mut rounds = Vec::with_capacity(params.n_trees);
        let mut residual = vec![0.0; n];
        for r in 0..params.n_trees {
            for i in 0..n {
                residual[i] = y[i] - score[i];
            }
            let rows = round_rows(n, params.subsample_fraction, seed, r);
            let tree = Tree::fit(cols, Response::Real(&residual), rows, params.tree, None);
            let mut row = vec![0.0; cols.n_features()];
            for (i, s) in score.iter_mut().enumerate() {
                cols_row(cols, i, &mut row);
                *s += params.learning_rate * tree.predict_row(&row);
            }
            rounds.push(vec![tree]);
        }
        Booster {
            base: vec![base],
            learning_rate: params.learning_rate,
            rounds,
        }
    }

    pub fn fit_classification(
        cols: &Columns,
        labels: &[usize],
        n_classes: usize,
        params: &BoostParams,
        seed: u64,
    ) -> Booster {
        let n = labels.len();
        let base: Vec<f64> = (0..n_classes)
            .map(|k| {
                let prior = labels.iter().filter(|&&c| c == k).count() as f64 / n as f64;
                let prior = prior.clamp(1e-6, 1.0 - 1e-6);
                (prior / (1.0 - prior)).ln()
            })
            .collect();
        let mut scores: Vec<Vec<f64>> = base.iter().map(|&b| vec![b; n]).collect();
        let mut rounds = Vec::with_capacity(params.n_trees);
        let mut row = vec![0.0; cols.n_features()];
        for r in 0..params.n_trees {
            let rows = round_rows(n, params.subsample_fraction, seed, r);
            let mut trees = Vec::with_capacity(n_classes);
            for (k, score) in scores.iter_mut().enumerate() {
                let prob: Vec<f64> = score.iter().map(|&s| sigmoid(s)).collect();
                let residual: Vec<f64> = (0..n)
                    .map(|i| f64::from(u8::from(labels[i] == k)) - prob[i])
                    .collect();
                let newton = |leaf: &[usize]| {
                    let num: f64 = leaf.iter().map(|&i| residual[i]).sum();
                    let den: f64 = leaf.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
                    num / den.max(1e-12)
                };
                let tree = Tree::fit_with_leaf(
                    cols,
                    Response::Real(&residual),
                    rows.clone(),
                    params.tree,
                    None,
                    &newton,
                );
                for (i, s) in score.iter_mut().enumerate() {
                    cols_row(cols, i, &mut row);
                    *s += params.learning_rate * tree.predict_row(&row);
                }
                trees.push(tree);
            }
            rounds.push(trees);
        }
        Booster {
            base,
            learning_rate: params.learning_rate,
            rounds,
        }
    }

    /// Additive scores, one per output.
    pub fn scores_row(&self, row: &[f64]) -> Vec<f64> {
        let mut s = self.base.clone();
        for trees in &self.rounds {
            for (k, t) in trees.iter().enumerate() {
                s[k] += self.learning_rate * t.predict_row(row);
            }
        }
        s
    }

    pub fn gains(&self, p: usize) -> Vec<f64> {
        let mut total = vec![0.0; p];
        for t in self.rounds.iter().flatten() {
            for (a, g) in total.iter_mut().zip(t.gains()) {
                *a += g;
            }
        }
        total
    }
}

fn cols_row(cols: &Columns, i: usize, out: &mut [f64]) {
    for (j, v) in out.iter_mut().enumerate() {
        *v = cols.value(i, j);
    }
}
