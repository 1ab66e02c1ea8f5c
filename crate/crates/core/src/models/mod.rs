//! Small-model zoo behind one train/predict contract.

pub mod forest;
pub mod gboost;
pub mod linear;
pub mod mlp;
pub mod tree;

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target, Task, TaskKind};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

use forest::{Forest, ForestParams};
use gboost::{BoostParams, Booster};
use linear::LinearModel;
use mlp::{argmax_rows, Mlp, MlpConfig, MlpTarget, Output, Standardizer};
use tree::{Columns, Response, Tree, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LinearRegression,
    Ridge,
    LogisticRegression,
    DecisionTree,
    RandomForest,
    Gboost,
    Mlp1,
    Mlp2,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::LinearRegression => "linear_regression",
            Family::Ridge => "ridge",
            Family::LogisticRegression => "logistic_regression",
            Family::DecisionTree => "decision_tree",
            Family::RandomForest => "random_forest",
            Family::Gboost => "gboost",
            Family::Mlp1 => "mlp1",
            Family::Mlp2 => "mlp2",
        }
    }

    pub fn supports(&self, task: TaskKind) -> bool {
        match self {
            Family::LinearRegression | Family::Ridge => task == TaskKind::Regression,
            Family::LogisticRegression => task == TaskKind::Classification,
            _ => true,
        }
    }

    fn allowed_keys(&self) -> &'static [&'static str] {
        match self {
            Family::LinearRegression | Family::Ridge => &["l2"],
            Family::LogisticRegression => &["l2", "epochs", "learning_rate"],
            Family::DecisionTree => &["max_depth", "min_samples_leaf"],
            Family::RandomForest => &[
                "n_trees",
                "max_depth",
                "min_samples_leaf",
                "max_features",
                "bootstrap",
                "subsample_fraction",
            ],
            Family::Gboost => &[
                "n_trees",
                "max_depth",
                "learning_rate",
                "subsample_fraction",
                "min_samples_leaf",
            ],
            Family::Mlp1 | Family::Mlp2 => &["hidden_sizes", "epochs", "learning_rate", "l2"],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameter value: a number or a list of numbers (`hidden_sizes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    List(Vec<f64>),
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Number(v)
    }
}

impl From<Vec<f64>> for Param {
    fn from(v: Vec<f64>) -> Self {
        Param::List(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, Param>,
    pub label: String,
}

impl ModelSpec {
    pub fn new(family: Family, label: impl Into<String>) -> Self {
        Self {
            family,
            hyperparameters: BTreeMap::new(),
            label: label.into(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Param>) -> Self {
        self.hyperparameters.insert(key.to_string(), value.into());
        self
    }

    /// Checks names and ranges of the hyperparameters.
    pub fn validate(&self) -> Result<()> {
        for key in self.hyperparameters.keys() {
            if !self.family.allowed_keys().contains(&key.as_str()) {
                return Err(Error::Hyperparameter(format!(
                    "{} does not take \"{key}\" (allowed: {})",
                    self.family,
                    self.family.allowed_keys().join(", ")
                )));
            }
        }
        // resolving against a dummy shape runs every range check
        self.resolve(Task::Regression, 1).map(|_| ())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.hyperparameters.get(key) {
            None => Ok(None),
            Some(Param::Number(v)) if v.is_finite() => Ok(Some(*v)),
            Some(other) => Err(Error::Hyperparameter(format!(
                "{key} must be a finite number, got {other:?}"
            ))),
        }
    }

    fn real(&self, key: &str, default: f64, lo: f64, hi: f64, lo_open: bool) -> Result<f64> {
        let v = self.number(key)?.unwrap_or(default);
        let ok = if lo_open { v > lo } else { v >= lo } && v <= hi;
        if ok {
            Ok(v)
        } else {
            let open = if lo_open { "(" } else { "[" };
            Err(Error::Hyperparameter(format!(
                "{key} = {v} outside {open}{lo}, {hi}]"
            )))
        }
    }

    fn count(&self, key: &str, lo: usize, hi: usize) -> Result<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(v) if v.fract() == 0.0 && v >= lo as f64 && v <= hi as f64 => Ok(Some(v as usize)),
            Some(v) => Err(Error::Hyperparameter(format!(
                "{key} = {v} must be an integer in {lo}..={hi}"
            ))),
        }
    }

    fn hidden_sizes(&self, default: &[usize]) -> Result<Vec<usize>> {
        let sizes = match self.hyperparameters.get("hidden_sizes") {
            None => return Ok(default.to_vec()),
            Some(Param::List(v)) => v,
            Some(Param::Number(v)) => {
                return Err(Error::Hyperparameter(format!(
                    "hidden_sizes must be a list, got {v}"
                )))
            }
        };
        if sizes.len() != default.len() {
            return Err(Error::Hyperparameter(format!(
                "{} takes {} hidden layer(s), got {}",
                self.family,
                default.len(),
                sizes.len()
            )));
        }
        sizes
            .iter()
            .map(|&v| {
                if v.fract() == 0.0 && (1.0..=4096.0).contains(&v) {
                    Ok(v as usize)
                } else {
                    Err(Error::Hyperparameter(format!("hidden size {v} must be in 1..=4096")))
                }
            })
            .collect()
    }

    fn tree_params(&self, default_depth: Option<usize>) -> Result<TreeParams> {
        Ok(TreeParams {
            max_depth: self.count("max_depth", 1, 64)?.or(default_depth),
            min_samples_leaf: self.count("min_samples_leaf", 1, 1_000_000)?.unwrap_or(1),
            max_features: None,
        })
    }

    fn mlp_config(&self) -> Result<MlpConfig> {
        Ok(MlpConfig {
            epochs: self.count("epochs", 1, 1_000_000)?.unwrap_or(500),
            learning_rate: self.real("learning_rate", 0.05, 0.0, 1e6, true)?,
        })
    }

    fn resolve(&self, task: Task, p: usize) -> Result<Settings> {
        Ok(match self.family {
            Family::LinearRegression => Settings::Linear {
                l2: self.real("l2", 1e-6, 0.0, f64::MAX, false)?,
            },
            Family::Ridge => Settings::Linear {
                l2: self.real("l2", 1.0, 0.0, f64::MAX, false)?,
            },
            Family::LogisticRegression => Settings::Network {
                hidden: Vec::new(),
                l2: self.real("l2", 1e-6, 0.0, f64::MAX, false)?,
                cfg: self.mlp_config()?,
            },
            Family::DecisionTree => Settings::Tree(self.tree_params(None)?),
            Family::RandomForest => {
                let default_features = match task {
                    Task::Classification { .. } => (p as f64).sqrt().floor() as usize,
                    Task::Regression => p / 3,
                }
                .max(1);
                let max_features = self.count("max_features", 1, 1_000_000)?.unwrap_or(default_features);
                let bootstrap = match self.number("bootstrap")? {
                    None => true,
                    Some(v) if v == 0.0 || v == 1.0 => v == 1.0,
                    Some(v) => {
                        return Err(Error::Hyperparameter(format!("bootstrap must be 0 or 1, got {v}")))
                    }
                };
                let mut tree = self.tree_params(None)?;
                tree.max_features = Some(max_features.min(p));
                Settings::Forest(ForestParams {
                    n_trees: self.count("n_trees", 1, 100_000)?.unwrap_or(50),
                    tree,
                    bootstrap,
                    sample_fraction: self.real("subsample_fraction", 1.0, 0.0, 1.0, true)?,
                })
            }
            Family::Gboost => Settings::Boost(BoostParams {
                n_trees: self.count("n_trees", 1, 100_000)?.unwrap_or(50),
                learning_rate: self.real("learning_rate", 0.1, 0.0, 1e6, true)?,
                tree: self.tree_params(Some(3))?,
                subsample_fraction: self.real("subsample_fraction", 1.0, 0.0, 1.0, true)?,
            }),
            Family::Mlp1 | Family::Mlp2 => {
                let default: &[usize] = if self.family == Family::Mlp1 { &[64] } else { &[64, 32] };
                Settings::Network {
                    hidden: self.hidden_sizes(default)?,
                    l2: self.real("l2", 0.0, 0.0, f64::MAX, false)?,
                    cfg: self.mlp_config()?,
                }
            }
        })
    }
}

enum Settings {
    Linear { l2: f64 },
    Tree(TreeParams),
    Forest(ForestParams),
    Boost(BoostParams),
    Network { hidden: Vec<usize>, l2: f64, cfg: MlpConfig },
}

/// A network with its input scaling and, for real targets, output scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub input: Standardizer,
    pub net: Mlp,
    /// `(mean, sd)` used to standardise real targets.
    pub target_scale: Option<(f64, f64)>,
}

impl Network {
    fn fit(x: &Array2<f64>, target: &Target, hidden: &[usize], l2: f64, cfg: &MlpConfig, task: Task, seed: u64) -> Result<Self> {
        let input = Standardizer::fit(x);
        let xs = input.apply(x);
        let p = x.ncols();
        match (target, task) {
            (Target::Real(y), Task::Regression) => {
                let n = y.len() as f64;
                let mean = y.iter().sum::<f64>() / n;
                let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
                let ys: Vec<f64> = y.iter().map(|v| (v - mean) / sd).collect();
                let sizes: Vec<usize> = std::iter::once(p).chain(hidden.iter().copied()).chain([1]).collect();
                let mut net = Mlp::init(&sizes, Output::Linear, l2, seed);
                net.train(&xs, MlpTarget::Real(&ys), cfg)?;
                Ok(Self {
                    input,
                    net,
                    target_scale: Some((mean, sd)),
                })
            }
            (Target::Class(labels), Task::Classification { n_classes }) => {
                let sizes: Vec<usize> = std::iter::once(p)
                    .chain(hidden.iter().copied())
                    .chain([n_classes])
                    .collect();
                let mut net = Mlp::init(&sizes, Output::Softmax(n_classes), l2, seed);
                net.train(&xs, MlpTarget::Class(labels), cfg)?;
                Ok(Self {
                    input,
                    net,
                    target_scale: None,
                })
            }
            _ => Err(Error::InvalidDataset("target does not match task".into())),
        }
    }

    fn predict(&self, x: &Array2<f64>) -> Predictions {
        let out = self.net.forward(&self.input.apply(x));
        match self.target_scale {
            Some((mean, sd)) => Predictions::Real(out.column(0).iter().map(|v| mean + sd * v).collect()),
            None => Predictions::Class(argmax_rows(&out)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Learned {
    Linear(LinearModel),
    Tree(Tree),
    Forest(Forest),
    Boost(Booster),
    Network(Network),
    FineTuned {
        encoder: FoundationEncoder,
        head: Network,
    },
}

/// Output of [`predict`]: reals for regression, class indices otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictions {
    Real(Vec<f64>),
    Class(Vec<usize>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Real(v) => v.len(),
            Predictions::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub learned: Learned,
    pub train_seed: u64,
    pub feature_names: Vec<String>,
    pub task: Task,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelDocument {
            format: "errcorr-model".into(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != "errcorr-model" || doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        Ok(doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Linear coefficients, when the model has them.
    pub fn coefficients(&self) -> Option<(&Array1<f64>, f64)> {
        match &self.learned {
            Learned::Linear(m) => Some((&m.coefficients, m.intercept)),
            _ => None,
        }
    }
}

/// Fits `spec` on `train`. Identical arguments give identical models.
pub fn train(spec: &ModelSpec, train: &Dataset, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    let task = train.task();
    if !spec.family.supports(task.kind()) {
        return Err(Error::IncompatibleTask {
            family: spec.family.to_string(),
            task: task.to_string(),
        });
    }
    let x = train.features();
    let child = derive_seed(seed, &format!("train/{}", spec.family));
    let learned = match spec.resolve(task, train.n_features())? {
        Settings::Linear { l2 } => {
            let Target::Real(y) = train.target() else {
                unreachable!("family checked against task")
            };
            Learned::Linear(LinearModel::fit(x, y, l2)?)
        }
        Settings::Tree(params) => {
            let cols = Columns::new(x);
            let rows = (0..train.n_rows()).collect();
            Learned::Tree(Tree::fit(&cols, response(train), rows, params, None))
        }
        Settings::Forest(params) => {
            let cols = Columns::new(x);
            Learned::Forest(Forest::fit(&cols, response(train), train.n_rows(), &params, child))
        }
        Settings::Boost(params) => {
            let cols = Columns::new(x);
            Learned::Boost(match train.target() {
                Target::Real(y) => Booster::fit_regression(&cols, y, &params, child),
                Target::Class(labels) => Booster::fit_classification(
                    &cols,
                    labels,
                    task.n_classes().expect("class task"),
                    &params,
                    child,
                ),
            })
        }
        Settings::Network { hidden, l2, cfg } => {
            Learned::Network(Network::fit(x, train.target(), &hidden, l2, &cfg, task, child)?)
        }
    };
    let model = TrainedModel {
        spec: spec.clone(),
        learned,
        train_seed: seed,
        feature_names: train.feature_names().to_vec(),
        task,
    };
    if let Predictions::Real(p) = predict(&model, x)? {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergent(format!("{} produced non-finite fits", spec.label)));
        }
    }
    Ok(model)
}

fn response(data: &Dataset) -> Response<'_> {
    match (data.target(), data.task()) {
        (Target::Real(y), _) => Response::Real(y),
        (Target::Class(labels), task) => Response::Class {
            labels,
            n_classes: task.n_classes().expect("class task"),
        },
    }
}

fn per_row(x: &Array2<f64>, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut buf = vec![0.0; x.ncols()];
    x.rows()
        .into_iter()
        .map(|r| {
            buf.iter_mut().zip(r.iter()).for_each(|(b, v)| *b = *v);
            f(&buf)
        })
        .collect()
}

/// Predictions for every row of `features`.
pub fn predict(model: &TrainedModel, features: &Array2<f64>) -> Result<Predictions> {
    if features.ncols() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: features.ncols(),
        });
    }
    let class = matches!(model.task, Task::Classification { .. });
    let wrap = |v: Vec<f64>| {
        if class {
            Predictions::Class(v.into_iter().map(|c| c as usize).collect())
        } else {
            Predictions::Real(v)
        }
    };
    Ok(match &model.learned {
        Learned::Linear(m) => Predictions::Real(m.predict(features)),
        Learned::Tree(t) => wrap(per_row(features, |r| t.predict_row(r))),
        Learned::Forest(f) => wrap(per_row(features, |r| f.predict_row(r))),
        Learned::Boost(b) => {
            if class {
                let scores: Vec<Vec<f64>> = features
                    .rows()
                    .into_iter()
                    .map(|r| b.scores_row(&r.to_vec()))
                    .collect();
                Predictions::Class(
                    scores
                        .iter()
                        .map(|s| {
                            let mut best = 0;
                            for (k, v) in s.iter().enumerate() {
                                if *v > s[best] {
                                    best = k;
                                }
                            }
                            best
                        })
                        .collect(),
                )
            } else {
                Predictions::Real(per_row(features, |r| b.scores_row(r)[0]))
            }
        }
        Learned::Network(net) => net.predict(features),
        Learned::FineTuned { encoder, head } => head.predict(&encoder.encode(features)?),
    })
}

/// Per-feature share of total split gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature_names: Vec<String>,
    pub shares: Vec<f64>,
    /// Set when the model made no splits; all shares are then zero.
    pub no_splits: bool,
}

impl FeatureImportance {
    /// Feature indices ordered by decreasing share (ties by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.shares.len()).collect();
        idx.sort_by(|&a, &b| self.shares[b].total_cmp(&self.shares[a]).then(a.cmp(&b)));
        idx
    }
}

pub fn feature_importance(model: &TrainedModel) -> Result<FeatureImportance> {
    let p = model.n_features();
    let gains = match &model.learned {
        Learned::Tree(t) => t.gains(),
        Learned::Forest(f) => f.gains(),
        Learned::Boost(b) => b.gains(p),
        _ => return Err(Error::ImportanceUnsupported(model.spec.family.to_string())),
    };
    let total: f64 = gains.iter().sum();
    let no_splits = total <= 0.0;
    let shares = if no_splits {
        vec![0.0; p]
    } else {
        gains.iter().map(|g| g / total).collect()
    };
    Ok(FeatureImportance {
        feature_names: model.feature_names.clone(),
        shares,
        no_splits,
    })
}

/// Frozen hidden stack of a network pretrained on a classification task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundationEncoder {
    input: Standardizer,
    layers: Vec<(Array2<f64>, Array1<f64>)>,
    pub embedding_dim: usize,
    pub provenance: String,
}

impl FoundationEncoder {
    pub fn n_inputs(&self) -> usize {
        self.input.shift.len()
    }

    pub fn encode(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                actual: x.ncols(),
            });
        }
        let mut a = self.input.apply(x);
        for (w, b) in &self.layers {
            a = a.dot(&w.t()) + b;
            a.mapv_inplace(f64::tanh);
        }
        Ok(a)
    }
}

pub fn pretrain_encoder(hidden_sizes: &[usize], base: &Dataset, seed: u64) -> Result<FoundationEncoder> {
    pretrain_encoder_with(hidden_sizes, base, seed, &MlpConfig::default())
}

pub fn pretrain_encoder_with(
    hidden_sizes: &[usize],
    base: &Dataset,
    seed: u64,
    cfg: &MlpConfig,
) -> Result<FoundationEncoder> {
    if base.task().kind() != TaskKind::Classification {
        return Err(Error::IncompatibleTask {
            family: "foundation encoder".into(),
            task: base.task().to_string(),
        });
    }
    if hidden_sizes.is_empty() || hidden_sizes.contains(&0) {
        return Err(Error::Hyperparameter(
            "encoder needs at least one non-empty hidden layer".into(),
        ));
    }
    let net = Network::fit(
        base.features(),
        base.target(),
        hidden_sizes,
        0.0,
        cfg,
        base.task(),
        derive_seed(seed, "encoder"),
    )?;
    Ok(FoundationEncoder {
        input: net.input.clone(),
        layers: net.net.without_output(),
        embedding_dim: *hidden_sizes.last().expect("non-empty"),
        provenance: format!("encoder(hidden={hidden_sizes:?},seed={seed}) <- {}", base.provenance()),
    })
}

/// Settings for the trainable head placed on a frozen encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadConfig {
    pub hidden: usize,
    pub mlp: MlpConfig,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            mlp: MlpConfig::default(),
        }
    }
}

pub fn finetune_head(encoder: &FoundationEncoder, downstream: &Dataset, seed: u64) -> Result<TrainedModel> {
    finetune_head_with(encoder, downstream, seed, &HeadConfig::default())
}

pub fn finetune_head_with(
    encoder: &FoundationEncoder,
    downstream: &Dataset,
    seed: u64,
    cfg: &HeadConfig,
) -> Result<TrainedModel> {
    let z = encoder.encode(downstream.features())?;
    let head = Network::fit(
        &z,
        downstream.target(),
        &[cfg.hidden],
        0.0,
        &cfg.mlp,
        downstream.task(),
        derive_seed(seed, "head"),
    )?;
    let spec = ModelSpec::new(Family::Mlp1, "finetuned_head")
        .with("hidden_sizes", vec![cfg.hidden as f64])
        .with("epochs", cfg.mlp.epochs as f64)
        .with("learning_rate", cfg.mlp.learning_rate);
    Ok(TrainedModel {
        spec,
        learned: Learned::FineTuned {
            encoder: encoder.clone(),
            head,
        },
        train_seed: seed,
        feature_names: downstream.feature_names().to_vec(),
        task: downstream.task(),
    })
}
