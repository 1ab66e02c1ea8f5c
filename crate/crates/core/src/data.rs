//! Tabular datasets: CSV ingestion, synthetic generation and seeded row/column
//! manipulation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::{index, SliceRandom};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Learning task attached to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Task {
    Regression,
    Classification { n_classes: usize },
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Regression => TaskKind::Regression,
            Task::Classification { .. } => TaskKind::Classification,
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self {
            Task::Regression => None,
            Task::Classification { n_classes } => Some(*n_classes),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Regression => f.write_str("regression"),
            Task::Classification { n_classes } => write!(f, "classification({n_classes})"),
        }
    }
}

/// Task declared by the caller before the number of classes is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(TaskKind::Regression),
            "classification" => Ok(TaskKind::Classification),
            other => Err(Error::InvalidConfig(format!(
                "unknown task \"{other}\" (expected regression or classification)"
            ))),
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskKind::Regression => f.write_str("regression"),
            TaskKind::Classification => f.write_str("classification"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Real(Vec<f64>),
    Class(Vec<usize>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Real(v) => v.len(),
            Target::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Target values as reals; class indices are converted.
    pub fn as_real(&self) -> Vec<f64> {
        match self {
            Target::Real(v) => v.clone(),
            Target::Class(v) => v.iter().map(|&c| c as f64).collect(),
        }
    }

    fn select(&self, rows: &[usize]) -> Target {
        match self {
            Target::Real(v) => Target::Real(rows.iter().map(|&i| v[i]).collect()),
            Target::Class(v) => Target::Class(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Immutable feature matrix plus target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    target: Target,
    feature_names: Vec<String>,
    task: Task,
    provenance: String,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        target: Target,
        feature_names: Vec<String>,
        task: Task,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let (n, p) = features.dim();
        if n != target.len() {
            return Err(Error::InvalidDataset(format!(
                "{n} feature rows but {} targets",
                target.len()
            )));
        }
        if p == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 rows, got {n}")));
        }
        if feature_names.len() != p {
            return Err(Error::InvalidDataset(format!(
                "{} names for {p} feature columns",
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        match (&task, &target) {
            (Task::Regression, Target::Real(_)) => {}
            (Task::Classification { n_classes }, Target::Class(labels)) => {
                if *n_classes < 2 {
                    return Err(Error::InvalidDataset(format!(
                        "classification needs at least 2 classes, got {n_classes}"
                    )));
                }
                if let Some((row, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= *n_classes) {
                    return Err(Error::LabelOutOfRange {
                        row: row + 1,
                        label: l.to_string(),
                        n_classes: *n_classes,
                    });
                }
            }
            _ => {
                return Err(Error::InvalidDataset(format!(
                    "target type does not match task {task}"
                )))
            }
        }
        Ok(Self {
            features,
            target,
            feature_names,
            task,
            provenance: provenance.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// New dataset made of the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize], note: &str) -> Result<Dataset> {
        let features = self.features.select(Axis(0), rows);
        Dataset::new(
            features,
            self.target.select(rows),
            self.feature_names.clone(),
            self.task,
            format!("{} | {note}", self.provenance),
        )
    }

    /// Writes the dataset as CSV: feature columns then the target column.
    pub fn write_csv(&self, path: impl AsRef<Path>, target_name: &str) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string(target_name)).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self, target_name: &str) -> String {
        let mut out = String::new();
        out.push_str(&self.feature_names.join(","));
        out.push(',');
        out.push_str(target_name);
        out.push('\n');
        for (i, row) in self.features.rows().into_iter().enumerate() {
            for v in row {
                let _ = write!(out, "{v},");
            }
            match &self.target {
                Target::Real(t) => {
                    let _ = writeln!(out, "{}", t[i]);
                }
                Target::Class(t) => {
                    let _ = writeln!(out, "{}", t[i]);
                }
            }
        }
        out
    }
}

/// Reads a comma-separated file with a header row.
///
/// All columns except `target_column` become features in header order. For
/// classification the labels must be non-negative integers and the class
/// count is `max + 1`.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, task: TaskKind) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, target_column, task, &format!("csv:{}", path.display()))
}

pub(crate) fn parse_csv(
    text: &str,
    target_column: &str,
    task: TaskKind,
    provenance: &str,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Csv(e.to_string()))?,
        None => return Err(Error::MissingHeader),
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::MissingHeader);
    }
    let mut seen = HashSet::new();
    for h in &header {
        if h.is_empty() {
            return Err(Error::Csv("empty column name in header".into()));
        }
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateFeature(h.clone()));
        }
    }
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTarget(target_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut real_target = Vec::new();
    let mut class_target = Vec::new();
    let mut n = 0usize;
    for (r, rec) in records.enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::Csv(format!(
                "row {row} has {} cells, header has {}",
                rec.len(),
                header.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == target_idx {
                match task {
                    TaskKind::Regression => real_target.push(parse_real(cell, row, &header[j])?),
                    TaskKind::Classification => {
                        let label: i64 = cell.parse().map_err(|_| Error::Parse {
                            row,
                            column: header[j].clone(),
                            value: cell.to_string(),
                        })?;
                        if label < 0 {
                            return Err(Error::LabelOutOfRange {
                                row,
                                label: cell.to_string(),
                                n_classes: 0,
                            });
                        }
                        class_target.push(label as usize);
                    }
                }
            } else {
                values.push(parse_real(cell, row, &header[j])?);
            }
        }
        n += 1;
    }
    let features = Array2::from_shape_vec((n, feature_names.len()), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    let (target, task) = match task {
        TaskKind::Regression => (Target::Real(real_target), Task::Regression),
        TaskKind::Classification => {
            let n_classes = class_target.iter().max().map_or(0, |m| m + 1);
            (Target::Class(class_target), Task::Classification { n_classes })
        }
    };
    Dataset::new(features, target, feature_names, task, provenance)
}

fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    None,
    /// Adds `w_j * (x_j^2 - 1) / sqrt(2)` per feature.
    Squares,
    /// Adds `sqrt(w_j * w_{j+1}) * x_j * x_{j+1}` for neighbouring features.
    Interactions,
}

/// Recipe for a synthetic dataset with controllable per-feature signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub p: usize,
    pub signal_weights: Vec<f64>,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    pub task: Task,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        if self.p == 0 {
            return bad("p must be >= 1".into());
        }
        if self.signal_weights.len() != self.p {
            return bad(format!(
                "{} signal weights for p = {}",
                self.signal_weights.len(),
                self.p
            ));
        }
        if self.signal_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("signal weights must be finite and non-negative".into());
        }
        if !self.signal_weights.iter().any(|w| *w > 0.0) {
            return bad("at least one signal weight must be positive".into());
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return bad(format!("noise_sd must be >= 0, got {}", self.noise_sd));
        }
        if let Task::Classification { n_classes } = self.task {
            if n_classes < 2 || n_classes > self.n {
                return bad(format!("n_classes must be in 2..={}, got {n_classes}", self.n));
            }
        }
        Ok(())
    }

    fn describe(&self, seed: u64) -> String {
        format!(
            "synthetic:n={},p={},weights={:?},noise_sd={},nonlinearity={:?},task={},seed={seed}",
            self.n, self.p, self.signal_weights, self.noise_sd, self.nonlinearity, self.task
        )
    }
}

/// Latent score `sum_j w_j g_j(x_j) + noise_sd * z` for one row.
fn latent_score(cfg: &SyntheticConfig, row: &[f64], z: f64) -> f64 {
    let w = &cfg.signal_weights;
    let mut s = 0.0;
    for (wj, xj) in w.iter().zip(row) {
        s += wj * xj;
    }
    match cfg.nonlinearity {
        Nonlinearity::None => {}
        Nonlinearity::Squares => {
            for (wj, xj) in w.iter().zip(row) {
                s += wj * (xj * xj - 1.0) / std::f64::consts::SQRT_2;
            }
        }
        Nonlinearity::Interactions => {
            for j in 0..row.len().saturating_sub(1) {
                s += (w[j] * w[j + 1]).sqrt() * row[j] * row[j + 1];
            }
        }
    }
    s + cfg.noise_sd * z
}

/// Draws a synthetic dataset. Features are i.i.d. standard normal; the target
/// is the latent score (regression) or its rank bucket into `K` equally sized
/// classes (classification).
pub fn gen_synthetic(config: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let (n, p) = (config.n, config.p);
    let mut feat_rng = rng_for(seed, "gen_synthetic/features");
    let mut noise_rng = rng_for(seed, "gen_synthetic/noise");
    let features = Array2::from_shape_fn((n, p), |_| StandardNormal.sample(&mut feat_rng));
    let scores: Vec<f64> = features
        .rows()
        .into_iter()
        .map(|row| {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            latent_score(config, row.as_slice().expect("standard layout"), z)
        })
        .collect();
    let target = match config.task {
        Task::Regression => Target::Real(scores),
        Task::Classification { n_classes } => Target::Class(quantile_bins(&scores, n_classes)),
    };
    let names = (0..p).map(|j| format!("x{j}")).collect();
    Dataset::new(features, target, names, config.task, config.describe(seed))
}

/// Assigns each score to one of `k` bins bounded by sample quantiles so that
/// bin sizes differ by at most one. Ties are broken by row index.
pub(crate) fn quantile_bins(scores: &[f64], k: usize) -> Vec<usize> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut labels = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = rank * k / n;
    }
    labels
}

/// Seeded uniform shuffle split; the train side gets `floor(n * fraction)` rows.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::OutOfRange {
            what: "train_fraction",
            value: train_fraction.to_string(),
            range: "(0, 1)".into(),
        });
    }
    let n = data.n_rows();
    let n_train = (n as f64 * train_fraction + 1e-9).floor() as usize;
    if n_train == 0 {
        return Err(Error::EmptySplit("train"));
    }
    if n_train >= n {
        return Err(Error::EmptySplit("test"));
    }
    let (train_rows, test_rows) = split_indices(n, n_train, seed);
    if train_rows.len() < 2 {
        return Err(Error::EmptySplit("train"));
    }
    if test_rows.len() < 2 {
        return Err(Error::EmptySplit("test"));
    }
    let note = |side: &str| format!("split({side},fraction={train_fraction},seed={seed})");
    Ok((
        data.select_rows(&train_rows, &note("train"))?,
        data.select_rows(&test_rows, &note("test"))?,
    ))
}

/// Row indices of a seeded split, each side in ascending order.
pub fn split_indices(n: usize, n_train: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, "split"));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// `n_out` rows drawn without replacement.
pub fn subsample(data: &Dataset, n_out: usize, seed: u64) -> Result<Dataset> {
    let n = data.n_rows();
    if n_out < 1 || n_out > n {
        return Err(Error::OutOfRange {
            what: "n_out",
            value: n_out.to_string(),
            range: format!("1..={n}"),
        });
    }
    let rows = index::sample(&mut rng_for(seed, "subsample"), n, n_out).into_vec();
    data.select_rows(&rows, &format!("subsample(n={n_out},seed={seed})"))
}

pub fn drop_feature(data: &Dataset, name: &str) -> Result<Dataset> {
    let j = data
        .feature_names
        .iter()
        .position(|f| f == name)
        .ok_or_else(|| Error::UnknownFeature {
            name: name.to_string(),
            available: data.feature_names.clone(),
        })?;
    if data.n_features() == 1 {
        return Err(Error::InvalidDataset(format!(
            "cannot drop \"{name}\": it is the only feature"
        )));
    }
    let keep: Vec<usize> = (0..data.n_features()).filter(|&k| k != j).collect();
    let features = data.features.select(Axis(1), &keep);
    let names = keep.iter().map(|&k| data.feature_names[k].clone()).collect();
    Dataset::new(
        features,
        data.target.clone(),
        names,
        data.task,
        format!("{} | drop={name}", data.provenance),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regression_cfg(n: usize, weights: Vec<f64>, noise_sd: f64) -> SyntheticConfig {
        SyntheticConfig {
            n,
            p: weights.len(),
            signal_weights: weights,
            noise_sd,
            nonlinearity: Nonlinearity::None,
            task: Task::Regression,
        }
    }

    #[test]
    fn csv_basic() {
        let d = parse_csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n", "y", TaskKind::Regression, "t").unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.feature_names(), ["a", "b"]);
        assert_eq!(d.target(), &Target::Real(vec![3.0, 6.0, 9.0]));
        assert_eq!(d.features()[[2, 1]], 8.0);
    }

    #[test]
    fn csv_duplicate_header() {
        let err = parse_csv("a,a,y\n1,2,3\n4,5,6\n", "y", TaskKind::Regression, "t").unwrap_err();
        assert!(err.to_string().contains("duplicate feature name"), "{err}");
    }

    #[test]
    fn csv_bad_cell_names_row_and_column() {
        let err = parse_csv("a,b,y\n1,2,3\n4,abc,6\n", "y", TaskKind::Regression, "t").unwrap_err();
        match err {
            Error::Parse { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "abc"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            parse_csv("", "y", TaskKind::Regression, "t"),
            Err(Error::MissingHeader)
        ));
        assert!(matches!(
            parse_csv("a,b\n1,2\n3,4\n", "y", TaskKind::Regression, "t"),
            Err(Error::MissingTarget(_))
        ));
        assert!(matches!(
            parse_csv("a,y\n1,-1\n3,0\n", "y", TaskKind::Classification, "t"),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            parse_csv("a,y\n1,0.5\n3,0\n", "y", TaskKind::Classification, "t"),
            Err(Error::Parse { .. })
        ));
        // a single class cannot form a classification task
        assert!(parse_csv("a,y\n1,0\n3,0\n", "y", TaskKind::Classification, "t").is_err());
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y", TaskKind::Regression),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn csv_classes_inferred() {
        let d = parse_csv("a,y\n1,0\n3,2\n4,1\n", "y", TaskKind::Classification, "t").unwrap();
        assert_eq!(d.task(), Task::Classification { n_classes: 3 });
    }

    #[test]
    fn csv_round_trip_through_writer() {
        let d = gen_synthetic(&regression_cfg(20, vec![1.0, 0.5], 0.1), 3).unwrap();
        let back = parse_csv(&d.to_csv_string("y"), "y", TaskKind::Regression, "t").unwrap();
        assert_eq!(back.features(), d.features());
        assert_eq!(back.target(), d.target());
    }

    #[test]
    fn zero_noise_single_signal_is_exact() {
        let d = gen_synthetic(&regression_cfg(100, vec![1.0, 0.0, 0.0], 0.0), 7).unwrap();
        let Target::Real(y) = d.target() else { panic!() };
        for (i, yi) in y.iter().enumerate() {
            assert_eq!(*yi, d.features()[[i, 0]]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = regression_cfg(100, vec![1.0, 0.0, 0.0], 0.3);
        assert_eq!(gen_synthetic(&cfg, 7).unwrap(), gen_synthetic(&cfg, 7).unwrap());
        assert_ne!(gen_synthetic(&cfg, 7).unwrap(), gen_synthetic(&cfg, 8).unwrap());
    }

    #[test]
    fn classification_bins_are_balanced() {
        let mut cfg = regression_cfg(301, vec![1.0, 1.0], 0.5);
        cfg.task = Task::Classification { n_classes: 3 };
        let d = gen_synthetic(&cfg, 1).unwrap();
        let Target::Class(y) = d.target() else { panic!() };
        let mut counts = [0usize; 3];
        y.iter().for_each(|&c| counts[c] += 1);
        assert!(counts.iter().all(|&c| c == 100 || c == 101), "{counts:?}");
    }

    #[test]
    fn invalid_configs() {
        assert!(gen_synthetic(&regression_cfg(10, vec![0.0, 0.0], 0.0), 1).is_err());
        assert!(gen_synthetic(&regression_cfg(10, vec![1.0], -1.0), 1).is_err());
        let mut cfg = regression_cfg(10, vec![1.0], 0.0);
        cfg.p = 2;
        assert!(gen_synthetic(&cfg, 1).is_err());
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split_indices(20640, 16512, 0);
        assert_eq!((tr.len(), te.len()), (16512, 4128));
        let cfg = regression_cfg(20640, vec![1.0], 0.0);
        let d = gen_synthetic(&cfg, 0).unwrap();
        let (a, b) = split(&d, 0.8, 11).unwrap();
        assert_eq!((a.n_rows(), b.n_rows()), (16512, 4128));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let d = gen_synthetic(&regression_cfg(10, vec![1.0], 0.0), 0).unwrap();
        let (a1, b1) = split(&d, 0.8, 5).unwrap();
        let (a2, b2) = split(&d, 0.8, 5).unwrap();
        assert_eq!((&a1, &b1), (&a2, &b2));
        let (tr, te) = split_indices(10, 8, 5);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_split() {
        let d = gen_synthetic(&regression_cfg(2, vec![1.0], 0.0), 0).unwrap();
        let err = split(&d, 0.1, 0).unwrap_err();
        assert_eq!(err.to_string(), "empty train split");
        assert!(split(&d, 1.0, 0).is_err());
    }

    #[test]
    fn subsample_sizes() {
        let d = gen_synthetic(&regression_cfg(50_000, vec![1.0], 0.0), 0).unwrap();
        assert_eq!(subsample(&d, 2000, 1).unwrap().n_rows(), 2000);

        let small = gen_synthetic(&regression_cfg(30, vec![1.0, 2.0], 0.1), 0).unwrap();
        let full = subsample(&small, 30, 4).unwrap();
        let key = |ds: &Dataset| {
            let mut rows: Vec<Vec<u64>> = ds
                .features()
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.to_bits()).collect())
                .collect();
            rows.sort();
            rows
        };
        assert_eq!(key(&full), key(&small));
        assert!(subsample(&small, 31, 4).is_err());
        assert!(subsample(&small, 0, 4).is_err());
    }

    #[test]
    fn drop_feature_behaviour() {
        let mut cfg = regression_cfg(20, vec![1.0; 8], 0.0);
        cfg.p = 8;
        let d = gen_synthetic(&cfg, 0).unwrap();
        let dropped = drop_feature(&d, "x3").unwrap();
        assert_eq!(dropped.n_features(), 7);
        assert!(!dropped.feature_names().iter().any(|n| n == "x3"));
        assert_eq!(dropped.target(), d.target());
        assert!(dropped.provenance().ends_with("drop=x3"));
        match drop_feature(&dropped, "x3").unwrap_err() {
            Error::UnknownFeature { available, .. } => assert_eq!(available.len(), 7),
            other => panic!("unexpected {other}"),
        }
        let one = gen_synthetic(&regression_cfg(10, vec![1.0], 0.0), 0).unwrap();
        assert!(drop_feature(&one, "x0").is_err());
    }
}
