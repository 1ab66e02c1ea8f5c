//! CART trees: variance reduction for real targets, Gini for class targets.

use ndarray::Array2;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    n_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

/// What the tree is fitted to.
#[derive(Debug, Clone, Copy)]
pub enum Response<'a> {
    Real(&'a [f64]),
    Class { labels: &'a [usize], n_classes: usize },
}

/// Column-major copy of a feature matrix; split search walks columns.
pub struct Columns {
    cols: Vec<Vec<f64>>,
}

impl Columns {
    pub fn new(x: &Array2<f64>) -> Self {
        let cols = x.columns().into_iter().map(|c| c.to_vec()).collect();
        Self { cols }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.cols[feature][row]
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    cols: &'a Columns,
    response: Response<'a>,
    params: TreeParams,
    rng: Option<&'a mut Rng>,
    leaf_value: &'a dyn Fn(&[usize]) -> f64,
    nodes: Vec<Node>,
}

impl Tree {
    /// Fits a tree on `rows` (duplicates allowed, as in bootstrap samples).
    ///
    /// `rng` is only consulted when `params.max_features` is smaller than the
    /// number of features.
    pub fn fit(
        cols: &Columns,
        response: Response<'_>,
        rows: Vec<usize>,
        params: TreeParams,
        rng: Option<&mut Rng>,
    ) -> Tree {
        let leaf = |rows: &[usize]| default_leaf(response, rows);
        Self::fit_with_leaf(cols, response, rows, params, rng, &leaf)
    }

    /// Like [`Tree::fit`] but leaf values come from `leaf_value`.
    pub fn fit_with_leaf(
        cols: &Columns,
        response: Response<'_>,
        rows: Vec<usize>,
        params: TreeParams,
        rng: Option<&mut Rng>,
        leaf_value: &dyn Fn(&[usize]) -> f64,
    ) -> Tree {
        let mut b = Builder {
            cols,
            response,
            params,
            rng,
            leaf_value,
            nodes: Vec::new(),
        };
        b.grow(rows, 0);
        Tree {
            nodes: b.nodes,
            n_features: cols.n_features(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Total split gain per feature.
    pub fn gains(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                g[*feature] += gain.max(0.0);
            }
        }
        g
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

pub(crate) fn mean_of(values: &[f64], rows: &[usize]) -> f64 {
    let mut s = 0.0;
    for &i in rows {
        s += values[i];
    }
    s / rows.len() as f64
}

pub(crate) fn majority(labels: &[usize], n_classes: usize, rows: &[usize]) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in rows {
        counts[labels[i]] += 1;
    }
    argmax_count(&counts)
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

fn default_leaf(response: Response<'_>, rows: &[usize]) -> f64 {
    match response {
        Response::Real(y) => mean_of(y, rows),
        Response::Class { labels, n_classes } => majority(labels, n_classes, rows) as f64,
    }
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let can_split = self.params.max_depth.is_none_or(|d| depth < d)
            && rows.len() >= 2 * self.params.min_samples_leaf
            && !self.is_pure(&rows);
        let split = if can_split { self.best_split(&rows) } else { None };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: (self.leaf_value)(&rows),
                };
            }
            Some(s) => {
                let col = &self.cols.cols[s.feature];
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&i| col[i] <= s.threshold);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                    gain: s.gain,
                };
            }
        }
        id
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match self.response {
            Response::Real(y) => {
                let first = y[rows[0]];
                rows.iter().all(|&i| y[i] == first)
            }
            Response::Class { labels, .. } => {
                let first = labels[rows[0]];
                rows.iter().all(|&i| labels[i] == first)
            }
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.cols.n_features();
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut f = index::sample(rng, p, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let features = self.candidate_features();
        let mut best: Option<BestSplit> = None;
        let mut order = Vec::with_capacity(rows.len());
        for f in features {
            let col = &self.cols.cols[f];
            order.clear();
            order.extend_from_slice(rows);
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            if let Some((threshold, gain)) = self.scan(col, &order) {
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Best threshold on one feature given rows sorted by that feature.
    /// Returns `(threshold, impurity decrease)`; the lowest threshold wins ties.
    fn scan(&self, col: &[f64], order: &[usize]) -> Option<(f64, f64)> {
        let n = order.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<(f64, f64)> = None;
        let consider = |pos: usize, score: f64, best: &mut Option<(f64, f64)>| {
            // pos = number of rows on the left
            let a = col[order[pos - 1]];
            let b = col[order[pos]];
            if a == b || pos < min_leaf || n - pos < min_leaf {
                return;
            }
            if best.is_none_or(|(_, g)| score > g) {
                let mut t = 0.5 * (a + b);
                if t >= b {
                    t = a;
                }
                *best = Some((t, score));
            }
        };
        match self.response {
            Response::Real(y) => {
                let total: f64 = order.iter().map(|&i| y[i]).sum();
                let parent = total * total / n as f64;
                let mut left = 0.0;
                for pos in 1..n {
                    left += y[order[pos - 1]];
                    let right = total - left;
                    let nl = pos as f64;
                    let nr = (n - pos) as f64;
                    let score = left * left / nl + right * right / nr - parent;
                    consider(pos, score, &mut best);
                }
            }
            Response::Class { labels, n_classes } => {
                let mut total = vec![0.0f64; n_classes];
                for &i in order {
                    total[labels[i]] += 1.0;
                }
                let sq = |c: &[f64]| c.iter().map(|v| v * v).sum::<f64>();
                let parent = sq(&total) / n as f64;
                let mut left = vec![0.0f64; n_classes];
                let mut right = total.clone();
                for pos in 1..n {
                    let c = labels[order[pos - 1]];
                    left[c] += 1.0;
                    right[c] -= 1.0;
                    let score =
                        sq(&left) / pos as f64 + sq(&right) / (n - pos) as f64 - parent;
                    consider(pos, score, &mut best);
                }
            }
        }
        best
    }
}
