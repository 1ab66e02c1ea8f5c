//! End-to-end runs of the three fleet layouts.
//!
//! 1. Different model families trained on one dataset.
//! 2. One model family, each member trained without a different feature.
//! 3. Several pretrained encoders, each fine-tuned on the same downstream
//!    datasets; correlation is taken across encoders of the per-dataset
//!    average error.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlation::{corr_matrix, def2_matrix, CorrelationMatrix, MethodChoice, PerformanceSeries};
use crate::data::{drop_feature, gen_synthetic, load_csv, split, Dataset, SyntheticConfig, TaskKind};
use crate::error::{Error, Result};
use crate::error_metrics::{average_error, errors_for, ErrorVector};
use crate::models::mlp::MlpConfig;
use crate::models::{
    feature_importance, finetune_head_with, predict, pretrain_encoder_with, train, FeatureImportance, HeadConfig,
    ModelSpec, TrainedModel,
};
use crate::report::{self, HeatmapStyle, TOOL_NAME, TOOL_VERSION};
use crate::rng::derive_seed;

pub const DEFAULT_SPLIT_FRACTION: f64 = 0.8;

fn default_split() -> f64 {
    DEFAULT_SPLIT_FRACTION
}

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        target: String,
        task: TaskKind,
    },
    Synthetic {
        config: SyntheticConfig,
        /// Generator seed; derived from the scenario seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl DatasetSource {
    pub fn load(&self, fallback_seed: u64) -> Result<Dataset> {
        match self {
            DatasetSource::Csv { path, target, task } => load_csv(path, target, *task),
            DatasetSource::Synthetic { config, seed } => gen_synthetic(config, seed.unwrap_or(fallback_seed)),
        }
    }

    /// Makes a relative CSV path relative to `base` instead of the working
    /// directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let DatasetSource::Csv { path, .. } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario1Config {
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    pub dataset: DatasetSource,
    pub specs: Vec<ModelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario2Config {
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    pub dataset: DatasetSource,
    pub base_spec: ModelSpec,
    pub drops: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderConfig {
    pub label: String,
    pub hidden_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownstreamConfig {
    pub label: String,
    pub dataset: DatasetSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario3Config {
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    pub base: DatasetSource,
    pub encoders: Vec<EncoderConfig>,
    pub downstream: Vec<DownstreamConfig>,
    #[serde(default)]
    pub pretrain: MlpConfig,
    #[serde(default)]
    pub head: HeadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    One(Scenario1Config),
    Two(Scenario2Config),
    Three(Scenario3Config),
}

impl ScenarioConfig {
    pub fn scenario(&self) -> u8 {
        match self {
            ScenarioConfig::One(_) => 1,
            ScenarioConfig::Two(_) => 2,
            ScenarioConfig::Three(_) => 3,
        }
    }

    /// Parses a config for the given scenario number.
    pub fn parse(scenario: u8, text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::InvalidConfig(format!("scenario {scenario} config: {e}"));
        Ok(match scenario {
            1 => ScenarioConfig::One(serde_json::from_str(text).map_err(bad)?),
            2 => ScenarioConfig::Two(serde_json::from_str(text).map_err(bad)?),
            3 => ScenarioConfig::Three(serde_json::from_str(text).map_err(bad)?),
            n => return Err(Error::InvalidConfig(format!("no scenario {n}"))),
        })
    }

    pub fn seed(&self) -> u64 {
        match self {
            ScenarioConfig::One(c) => c.seed,
            ScenarioConfig::Two(c) => c.seed,
            ScenarioConfig::Three(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ScenarioConfig::One(c) => c.seed = seed,
            ScenarioConfig::Two(c) => c.seed = seed,
            ScenarioConfig::Three(c) => c.seed = seed,
        }
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        match self {
            ScenarioConfig::One(c) => c.dataset.resolve_paths(base),
            ScenarioConfig::Two(c) => c.dataset.resolve_paths(base),
            ScenarioConfig::Three(c) => {
                c.base.resolve_paths(base);
                for d in &mut c.downstream {
                    d.dataset.resolve_paths(base);
                }
            }
        }
    }

    pub fn run(&self) -> Result<ScenarioReport> {
        let mut report = match self {
            ScenarioConfig::One(c) => {
                let data = c.dataset.load(derive_seed(c.seed, "dataset"))?;
                run_scenario1(&data, &c.specs, c.split_fraction, c.seed)?
            }
            ScenarioConfig::Two(c) => {
                let data = c.dataset.load(derive_seed(c.seed, "dataset"))?;
                run_scenario2(&data, &c.base_spec, &c.drops, c.split_fraction, c.seed)?
            }
            ScenarioConfig::Three(c) => {
                let base = c.base.load(derive_seed(c.seed, "dataset/base"))?;
                let downstream = c
                    .downstream
                    .iter()
                    .map(|d| {
                        let data = d.dataset.load(derive_seed(c.seed, &format!("dataset/{}", d.label)))?;
                        Ok((d.label.clone(), data))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let settings = Scenario3Settings {
                    split_fraction: c.split_fraction,
                    pretrain: c.pretrain,
                    head: c.head,
                };
                run_scenario3(&base, &c.encoders, &downstream, &settings, c.seed)?
            }
        };
        report.config = Some(serde_json::to_value(self)?);
        Ok(report)
    }
}

/// One member of a fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetMember {
    pub label: String,
    pub description: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetric {
    pub label: String,
    pub average_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub tool: String,
    pub version: String,
    pub scenario: u8,
    pub seed: u64,
    pub split_fraction: f64,
    pub data_provenance: Vec<String>,
    pub test_provenance: Vec<String>,
    pub fleet: Vec<FleetMember>,
    pub metrics: Vec<ModelMetric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<CorrelationMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub importance: Option<FeatureImportance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PerformanceSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub def2: Option<CorrelationMatrix>,
    /// The config this report was produced from, when run from one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    /// Per-point test errors of each fleet member, in fleet order.
    #[serde(skip)]
    pub errors: Vec<ErrorVector>,
    /// Errors of the base spec trained on all features (scenario 2).
    #[serde(skip)]
    pub baseline_errors: Option<ErrorVector>,
}

impl ScenarioReport {
    fn new(scenario: u8, seed: u64, split_fraction: f64) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            scenario,
            seed,
            split_fraction,
            data_provenance: Vec::new(),
            test_provenance: Vec::new(),
            fleet: Vec::new(),
            metrics: Vec::new(),
            matrix: None,
            importance: None,
            series: None,
            def2: None,
            config: None,
            errors: Vec::new(),
            baseline_errors: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `report.json` plus matrix/heatmap files into `dir`; returns the
    /// paths written, in order.
    pub fn write_outputs(&self, dir: impl AsRef<Path>, style: &HeatmapStyle) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: String| -> Result<()> {
            let p = dir.join(name);
            report::write_atomic(&p, bytes.as_bytes())?;
            written.push(p);
            Ok(())
        };
        put("report.json", self.to_json()?)?;
        for (stem, m) in [("matrix", &self.matrix), ("def2", &self.def2)] {
            if let Some(m) = m {
                put(&format!("{stem}.json"), report::matrix_to_json(m)?)?;
                put(&format!("{stem}.csv"), report::matrix_to_csv(m)?)?;
                put(&format!("{stem}.svg"), report::heatmap_svg(m, style)?)?;
            }
        }
        if let Some(s) = &self.series {
            put("series.csv", report::series_to_csv(s)?)?;
        }
        Ok(written)
    }
}

/// Reruns the config embedded in a report document.
pub fn replay(report_json: &str) -> Result<ScenarioReport> {
    #[derive(Deserialize)]
    struct Stored {
        scenario: u8,
        config: Option<serde_json::Value>,
    }
    let stored: Stored = serde_json::from_str(report_json)?;
    let config = stored
        .config
        .ok_or_else(|| Error::InvalidConfig("report carries no config to replay".into()))?;
    ScenarioConfig::parse(stored.scenario, &config.to_string())?.run()
}

fn check_unique<'a>(what: &str, labels: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::Fleet(format!("duplicate {what} \"{l}\"")));
        }
    }
    Ok(())
}

/// Training seed for a spec. Keyed on family and hyperparameters, so specs
/// that differ only by label train identical models.
pub fn model_seed(seed: u64, spec: &ModelSpec) -> u64 {
    let hp = serde_json::to_string(&spec.hyperparameters).expect("hyperparameters serialize");
    derive_seed(seed, &format!("model/{}/{hp}", spec.family))
}

fn check_spec(spec: &ModelSpec, data: &Dataset) -> Result<()> {
    spec.validate()?;
    if !spec.family.supports(data.task().kind()) {
        return Err(Error::IncompatibleTask {
            family: spec.family.to_string(),
            task: data.task().to_string(),
        });
    }
    Ok(())
}

fn test_errors(model: &TrainedModel, test: &Dataset, label: &str) -> Result<ErrorVector> {
    let preds = predict(model, test.features())?;
    Ok(errors_for(test.target(), &preds)?.labeled(label, test.provenance()))
}

pub fn run_scenario1(data: &Dataset, specs: &[ModelSpec], split_fraction: f64, seed: u64) -> Result<ScenarioReport> {
    if specs.len() < 2 {
        return Err(Error::Fleet(format!("scenario 1 needs at least 2 specs, got {}", specs.len())));
    }
    check_unique("model label", specs.iter().map(|s| s.label.as_str()))?;
    for s in specs {
        check_spec(s, data)?;
    }
    let (train_set, test_set) = split(data, split_fraction, derive_seed(seed, "split"))?;
    let mut report = ScenarioReport::new(1, seed, split_fraction);
    report.data_provenance.push(data.provenance().to_string());
    report.test_provenance.push(test_set.provenance().to_string());
    for spec in specs {
        let s = model_seed(seed, spec);
        let model = train(spec, &train_set, s)?;
        let e = test_errors(&model, &test_set, &spec.label)?;
        report.metrics.push(ModelMetric {
            label: spec.label.clone(),
            average_error: average_error(&e)?,
        });
        report.fleet.push(FleetMember {
            label: spec.label.clone(),
            description: spec.family.to_string(),
            seed: s,
            spec: Some(spec.clone()),
            dropped_feature: None,
            hidden_sizes: None,
        });
        report.errors.push(e);
    }
    report.matrix = Some(corr_matrix(&report.errors, MethodChoice::Auto)?);
    Ok(report)
}

pub fn drop_label(feature: &str) -> String {
    format!("model_no_{feature}")
}

pub fn run_scenario2(
    data: &Dataset,
    base_spec: &ModelSpec,
    drops: &[String],
    split_fraction: f64,
    seed: u64,
) -> Result<ScenarioReport> {
    if drops.len() < 2 {
        return Err(Error::Fleet(format!("scenario 2 needs at least 2 drops, got {}", drops.len())));
    }
    check_unique("dropped feature", drops.iter().map(String::as_str))?;
    for d in drops {
        if !data.feature_names().contains(d) {
            return Err(Error::UnknownFeature {
                name: d.clone(),
                available: data.feature_names().to_vec(),
            });
        }
    }
    check_spec(base_spec, data)?;
    let (train_set, test_set) = split(data, split_fraction, derive_seed(seed, "split"))?;
    let s = model_seed(seed, base_spec);
    let mut report = ScenarioReport::new(2, seed, split_fraction);
    report.data_provenance.push(data.provenance().to_string());
    report.test_provenance.push(test_set.provenance().to_string());

    let full = train(base_spec, &train_set, s)?;
    report.baseline_errors = Some(test_errors(&full, &test_set, &base_spec.label)?);
    report.importance = match feature_importance(&full) {
        Ok(imp) => Some(imp),
        Err(Error::ImportanceUnsupported(_)) => None,
        Err(e) => return Err(e),
    };

    for name in drops {
        let label = drop_label(name);
        let model = train(base_spec, &drop_feature(&train_set, name)?, s)?;
        let e = test_errors(&model, &drop_feature(&test_set, name)?, &label)?;
        report.metrics.push(ModelMetric {
            label: label.clone(),
            average_error: average_error(&e)?,
        });
        report.fleet.push(FleetMember {
            label,
            description: format!("{} without {name}", base_spec.family),
            seed: s,
            spec: Some(base_spec.clone()),
            dropped_feature: Some(name.clone()),
            hidden_sizes: None,
        });
        report.errors.push(e);
    }
    report.matrix = Some(corr_matrix(&report.errors, MethodChoice::Auto)?);
    Ok(report)
}

/// Training settings shared by every encoder and head in scenario 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario3Settings {
    pub split_fraction: f64,
    pub pretrain: MlpConfig,
    pub head: HeadConfig,
}

impl Default for Scenario3Settings {
    fn default() -> Self {
        Self {
            split_fraction: DEFAULT_SPLIT_FRACTION,
            pretrain: MlpConfig::default(),
            head: HeadConfig::default(),
        }
    }
}

/// Every downstream dataset is split with the same seed, and every head on a
/// given encoder uses the same seed, so two identical downstream datasets
/// yield identical error columns.
pub fn run_scenario3(
    base: &Dataset,
    encoders: &[EncoderConfig],
    downstream: &[(String, Dataset)],
    settings: &Scenario3Settings,
    seed: u64,
) -> Result<ScenarioReport> {
    if encoders.len() < 3 {
        return Err(Error::Fleet(format!(
            "scenario 3 needs at least 3 encoders, got {}",
            encoders.len()
        )));
    }
    if downstream.len() < 2 {
        return Err(Error::Fleet(format!(
            "scenario 3 needs at least 2 downstream datasets, got {}",
            downstream.len()
        )));
    }
    check_unique("encoder label", encoders.iter().map(|e| e.label.as_str()))?;
    check_unique("dataset label", downstream.iter().map(|(l, _)| l.as_str()))?;
    for (label, d) in downstream {
        if d.task().kind() != TaskKind::Classification {
            return Err(Error::IncompatibleTask {
                family: format!("downstream dataset {label}"),
                task: d.task().to_string(),
            });
        }
        if d.n_features() != base.n_features() {
            return Err(Error::DimensionMismatch {
                expected: base.n_features(),
                actual: d.n_features(),
            });
        }
    }

    let mut report = ScenarioReport::new(3, seed, settings.split_fraction);
    report.data_provenance.push(base.provenance().to_string());
    let split_seed = derive_seed(seed, "split");
    let mut splits = Vec::with_capacity(downstream.len());
    for (_, d) in downstream {
        let (tr, te) = split(d, settings.split_fraction, split_seed)?;
        report.data_provenance.push(d.provenance().to_string());
        report.test_provenance.push(te.provenance().to_string());
        splits.push((tr, te));
    }

    let mut avg = Vec::with_capacity(encoders.len());
    for enc in encoders {
        let es = enc
            .seed
            .unwrap_or_else(|| derive_seed(seed, &format!("encoder/{}", enc.label)));
        let encoder = pretrain_encoder_with(&enc.hidden_sizes, base, es, &settings.pretrain)?;
        let head_seed = derive_seed(es, "head");
        let mut row = Vec::with_capacity(downstream.len());
        for ((dlabel, _), (tr, te)) in downstream.iter().zip(&splits) {
            let head = finetune_head_with(&encoder, tr, head_seed, &settings.head)?;
            let label = format!("{}/{dlabel}", enc.label);
            let e = test_errors(&head, te, &label)?;
            let a = average_error(&e)?;
            report.metrics.push(ModelMetric {
                label,
                average_error: a,
            });
            report.errors.push(e);
            row.push(a);
        }
        report.fleet.push(FleetMember {
            label: enc.label.clone(),
            description: encoder.provenance.clone(),
            seed: es,
            spec: None,
            dropped_feature: None,
            hidden_sizes: Some(enc.hidden_sizes.clone()),
        });
        avg.push(row);
    }
    let series = PerformanceSeries::new(
        encoders.iter().map(|e| e.label.clone()).collect(),
        downstream.iter().map(|(l, _)| l.clone()).collect(),
        avg,
    )?;
    report.def2 = Some(def2_matrix(&series)?);
    report.series = Some(series);
    Ok(report)
}
