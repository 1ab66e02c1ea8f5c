//! Correlation estimators and the matrices built from them.

pub mod bvn;
pub mod contingency;
pub mod phik;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_metrics::{ErrorKind, ErrorVector};
use crate::scalar::Scalar;

pub use bvn::bvn_rect_prob;
pub use contingency::{chi2_stat, contingency, ContingencyTable};
pub use phik::phik;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    Phik,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pearson => "pearson",
            Method::Phik => "phik",
        }
    }

    /// Value range of the coefficient.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Method::Pearson => (-1.0, 1.0),
            Method::Phik => (0.0, 1.0),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Method::Pearson),
            "phik" => Ok(Method::Phik),
            other => Err(Error::InvalidConfig(format!("unknown method \"{other}\""))),
        }
    }
}

/// Requested method; `Auto` picks Pearson for residuals and phi_K for
/// indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Pearson,
    Phik,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "pearson" => Ok(MethodChoice::Pearson),
            "phik" => Ok(MethodChoice::Phik),
            other => Err(Error::InvalidConfig(format!("unknown method \"{other}\""))),
        }
    }
}

impl MethodChoice {
    pub fn resolve(self, kind: ErrorKind) -> Result<Method> {
        match (self, kind) {
            (MethodChoice::Auto, ErrorKind::Residual) | (MethodChoice::Pearson, _) => Ok(Method::Pearson),
            (MethodChoice::Auto, ErrorKind::Indicator) | (MethodChoice::Phik, ErrorKind::Indicator) => {
                Ok(Method::Phik)
            }
            (MethodChoice::Phik, ErrorKind::Residual) => Err(Error::MethodConflict {
                method: "phik".into(),
                kind: kind.to_string(),
            }),
        }
    }
}

/// A correlation estimate, or the reason it does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrValue<F: Scalar = f64> {
    pub value: Option<F>,
    pub method: Method,
    pub n_points: usize,
    pub undefined_reason: Option<String>,
}

impl<F: Scalar> CorrValue<F> {
    pub fn defined(value: F, method: Method, n_points: usize) -> Self {
        Self {
            value: Some(value),
            method,
            n_points,
            undefined_reason: None,
        }
    }

    pub fn undefined(method: Method, n_points: usize, reason: impl Into<String>) -> Self {
        Self {
            value: None,
            method,
            n_points,
            undefined_reason: Some(reason.into()),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

fn is_constant<F: Scalar>(v: &[F]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Sample Pearson correlation (two-pass). Undefined when either input is
/// constant.
pub fn pearson<F: Scalar>(x: &[F], y: &[F]) -> Result<CorrValue<F>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let m = x.len();
    if m < 2 {
        return Err(Error::OutOfRange {
            what: "number of points",
            value: m.to_string(),
            range: ">= 2".into(),
        });
    }
    if is_constant(x) || is_constant(y) {
        return Ok(CorrValue::undefined(Method::Pearson, m, "zero variance"));
    }
    let n = F::from_count(m);
    let mx = x.iter().copied().sum::<F>() / n;
    let my = y.iter().copied().sum::<F>() / n;
    let (mut sxx, mut syy, mut sxy) = (F::zero(), F::zero(), F::zero());
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    let denom = (sxx * syy).sqrt();
    if denom == F::zero() || !denom.is_finite() {
        return Ok(CorrValue::undefined(Method::Pearson, m, "zero variance"));
    }
    let r = (sxy / denom).max(-F::one()).min(F::one());
    Ok(CorrValue::defined(r, Method::Pearson, m))
}

/// Symmetric matrix of pairwise correlations between labelled series.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<F: Scalar = f64> {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<CorrValue<F>>>,
    pub method: Method,
}

impl<F: Scalar> CorrelationMatrix<F> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> &CorrValue<F> {
        &self.entries[i][j]
    }

    pub fn value(&self, i: usize, j: usize) -> Option<F> {
        self.entries[i][j].value
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Mean of the defined entries over the given unordered index pairs.
    pub fn mean_over(&self, pairs: &[(usize, usize)]) -> Option<F> {
        let vals: Vec<F> = pairs.iter().filter_map(|&(i, j)| self.value(i, j)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().copied().sum::<F>() / F::from_count(vals.len()))
        }
    }

    /// Assembles a matrix from a pairwise function evaluated on `i < j`.
    fn assemble(
        labels: Vec<String>,
        method: Method,
        diagonal: impl Fn(usize) -> CorrValue<F>,
        mut pair: impl FnMut(usize, usize) -> Result<CorrValue<F>>,
    ) -> Result<Self> {
        let k = labels.len();
        let mut entries: Vec<Vec<Option<CorrValue<F>>>> = vec![vec![None; k]; k];
        for i in 0..k {
            entries[i][i] = Some(diagonal(i));
            for j in i + 1..k {
                let v = pair(i, j)?;
                entries[j][i] = Some(v.clone());
                entries[i][j] = Some(v);
            }
        }
        Ok(Self {
            labels,
            entries: entries
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.expect("filled")).collect())
                .collect(),
            method,
        })
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::Fleet(format!("duplicate label \"{l}\"")));
        }
    }
    Ok(())
}

fn as_categories<F: Scalar>(v: &[F]) -> Vec<i64> {
    v.iter().map(|x| x.round().to_i64().unwrap_or(i64::MAX)).collect()
}

/// Correlation of two error vectors by the given method.
pub fn pair_corr<F: Scalar>(a: &ErrorVector<F>, b: &ErrorVector<F>, method: Method) -> Result<CorrValue<F>> {
    match method {
        Method::Pearson => pearson(&a.values, &b.values),
        Method::Phik => {
            let t = contingency(&as_categories(&a.values), &as_categories(&b.values))?;
            phik(&t, true)
        }
    }
}

/// Pairwise error correlations across a fleet evaluated on one test set.
pub fn corr_matrix<F: Scalar>(errors: &[ErrorVector<F>], method: MethodChoice) -> Result<CorrelationMatrix<F>> {
    if errors.len() < 2 {
        return Err(Error::Fleet(format!(
            "need at least 2 error vectors, got {}",
            errors.len()
        )));
    }
    let kind = errors[0].kind;
    if errors.iter().any(|e| e.kind != kind) {
        return Err(Error::MixedKinds);
    }
    let m = errors[0].len();
    if let Some(e) = errors.iter().find(|e| e.len() != m) {
        return Err(Error::LengthMismatch {
            left: m,
            right: e.len(),
        });
    }
    if m < 2 {
        return Err(Error::OutOfRange {
            what: "number of test points",
            value: m.to_string(),
            range: ">= 2".into(),
        });
    }
    let method = method.resolve(kind)?;
    let labels: Vec<String> = errors.iter().map(|e| e.model_label.clone()).collect();
    check_unique(&labels)?;
    let reason = match method {
        Method::Pearson => "zero variance",
        Method::Phik => "constant variable",
    };
    CorrelationMatrix::assemble(
        labels,
        method,
        |i| {
            if errors[i].is_constant() {
                CorrValue::undefined(method, m, reason)
            } else {
                CorrValue::defined(F::one(), method, m)
            }
        },
        |i, j| pair_corr(&errors[i], &errors[j], method),
    )
}

/// Average error per (encoder, downstream dataset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSeries<F: Scalar = f64> {
    pub encoder_labels: Vec<String>,
    pub dataset_labels: Vec<String>,
    /// `avg_errors[e][d]`.
    pub avg_errors: Vec<Vec<F>>,
}

impl<F: Scalar> PerformanceSeries<F> {
    pub fn new(encoder_labels: Vec<String>, dataset_labels: Vec<String>, avg_errors: Vec<Vec<F>>) -> Result<Self> {
        if avg_errors.len() != encoder_labels.len() {
            return Err(Error::LengthMismatch {
                left: encoder_labels.len(),
                right: avg_errors.len(),
            });
        }
        if let Some(row) = avg_errors.iter().find(|r| r.len() != dataset_labels.len()) {
            return Err(Error::LengthMismatch {
                left: dataset_labels.len(),
                right: row.len(),
            });
        }
        check_unique(&encoder_labels)?;
        check_unique(&dataset_labels)?;
        Ok(Self {
            encoder_labels,
            dataset_labels,
            avg_errors,
        })
    }

    pub fn column(&self, label: &str) -> Result<Vec<F>> {
        let d = self
            .dataset_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        Ok(self.avg_errors.iter().map(|r| r[d]).collect())
    }
}

/// Correlation, across encoders, of the average errors on two downstream
/// datasets.
pub fn def2_correlation<F: Scalar>(series: &PerformanceSeries<F>, dataset_a: &str, dataset_b: &str) -> Result<CorrValue<F>> {
    let a = series.column(dataset_a)?;
    let b = series.column(dataset_b)?;
    if a.len() < 3 {
        return Err(Error::OutOfRange {
            what: "number of encoders",
            value: a.len().to_string(),
            range: ">= 3".into(),
        });
    }
    pearson(&a, &b)
}

/// [`def2_correlation`] for every pair of downstream datasets.
pub fn def2_matrix<F: Scalar>(series: &PerformanceSeries<F>) -> Result<CorrelationMatrix<F>> {
    let labels = series.dataset_labels.clone();
    if labels.len() < 2 {
        return Err(Error::Fleet("need at least 2 downstream datasets".into()));
    }
    let m = series.encoder_labels.len();
    let cols: Vec<Vec<F>> = labels.iter().map(|l| series.column(l)).collect::<Result<_>>()?;
    CorrelationMatrix::assemble(
        labels.clone(),
        Method::Pearson,
        |i| {
            if is_constant(&cols[i]) {
                CorrValue::undefined(Method::Pearson, m, "zero variance")
            } else {
                CorrValue::defined(F::one(), Method::Pearson, m)
            }
        },
        |i, j| def2_correlation(series, &labels[i], &labels[j]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_metrics::{indicator_errors, residual_errors};
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 5.0];
        assert_eq!(pearson(&x, &x).unwrap().value, Some(1.0));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap().value, Some(-1.0));
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap().value.unwrap();
        let hand = 3.0 / (2.0f64 * 42.0 / 9.0).sqrt();
        assert!((r - hand).abs() < 1e-12);
        assert!((r - 0.98198).abs() < 1e-5);
        let c = pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.undefined_reason.as_deref(), Some("zero variance"));
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        // single precision works through the same code
        let r32 = pearson(&[1.0f32, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap().value.unwrap();
        assert!((r32 - 0.98198).abs() < 1e-5);
    }

    fn residuals(label: &str, v: &[f64]) -> ErrorVector {
        residual_errors(v, &vec![0.0; v.len()]).unwrap().labeled(label, "t")
    }

    #[test]
    fn matrix_structure() {
        let a = residuals("a", &[1.0, -0.5, 2.0, 0.3, -1.0]);
        let b = residuals("b", &[1.0, -0.5, 2.0, 0.3, -1.0]);
        let m = corr_matrix(&[a.clone(), b], MethodChoice::Auto).unwrap();
        assert_eq!(m.method, Method::Pearson);
        assert_eq!(m.value(0, 1), Some(1.0));

        let fleet: Vec<ErrorVector> = (0..5)
            .map(|k| {
                let v: Vec<f64> = (0..20).map(|i| ((i * (k + 2)) as f64 * 0.7).sin()).collect();
                residuals(&format!("m{k}"), &v)
            })
            .collect();
        let m = corr_matrix(&fleet, MethodChoice::Auto).unwrap();
        assert_eq!(m.len(), 5);
        for i in 0..5 {
            assert_eq!(m.value(i, i), Some(1.0));
            for j in 0..5 {
                assert_eq!(m.get(i, j), m.get(j, i));
                let direct = pearson(&fleet[i].values, &fleet[j].values).unwrap();
                if i != j {
                    assert_eq!(m.get(i, j), &direct);
                }
            }
        }
    }

    #[test]
    fn constant_indicator_row_is_undefined() {
        let mk = |l: &str, p: &[usize]| -> ErrorVector {
            indicator_errors(&[0, 1, 1, 0, 1, 0, 0, 1], p).unwrap().labeled(l, "t")
        };
        let perfect = mk("perfect", &[0, 1, 1, 0, 1, 0, 0, 1]);
        let a = mk("a", &[1, 1, 1, 0, 0, 0, 0, 1]);
        let b = mk("b", &[1, 1, 0, 0, 0, 0, 1, 1]);
        let m = corr_matrix(&[perfect, a, b], MethodChoice::Auto).unwrap();
        assert_eq!(m.method, Method::Phik);
        for j in 0..3 {
            assert_eq!(m.get(0, j).undefined_reason.as_deref(), Some("constant variable"));
        }
        assert!(m.get(1, 2).is_defined());
        assert_eq!(m.value(1, 1), Some(1.0));
    }

    #[test]
    fn matrix_errors() {
        let a = residuals("a", &[1.0, 2.0, 3.0]);
        let i: ErrorVector = indicator_errors(&[0, 1, 0], &[0, 0, 0]).unwrap().labeled("i", "t");
        assert!(matches!(corr_matrix(&[a.clone(), i], MethodChoice::Auto), Err(Error::MixedKinds)));
        let short = residuals("s", &[1.0, 2.0]);
        assert!(corr_matrix(&[a.clone(), short], MethodChoice::Auto).is_err());
        let b = residuals("b", &[3.0, 1.0, 2.0]);
        assert!(matches!(
            corr_matrix(&[a.clone(), b], MethodChoice::Phik),
            Err(Error::MethodConflict { .. })
        ));
        assert!(corr_matrix(&[a], MethodChoice::Auto).is_err());
    }

    fn series(cols: &[Vec<f64>]) -> PerformanceSeries {
        let m = cols[0].len();
        PerformanceSeries::new(
            (0..m).map(|e| format!("enc{e}")).collect(),
            (0..cols.len()).map(|d| format!("d{d}")).collect(),
            (0..m).map(|e| cols.iter().map(|c| c[e]).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn def2_examples() {
        let a = vec![0.1, 0.3, 0.2, 0.25];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 0.05).collect();
        let s = series(&[a.clone(), b]);
        assert_eq!(def2_correlation(&s, "d0", "d0").unwrap().value, Some(1.0));
        assert!((def2_correlation(&s, "d0", "d1").unwrap().value.unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(def2_correlation(&s, "d0", "zz"), Err(Error::UnknownLabel(_))));
        let short = series(&[vec![0.1, 0.2], vec![0.3, 0.1]]);
        assert!(def2_correlation(&short, "d0", "d1").is_err());
        let flat = series(&[vec![0.2, 0.2, 0.2], vec![0.3, 0.1, 0.2]]);
        assert!(!def2_correlation(&flat, "d0", "d1").unwrap().is_defined());
    }

    #[test]
    fn def2_matches_direct_pearson() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for(3, "def2");
        let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..8).map(|_| rng.random::<f64>()).collect()).collect();
        let s = series(&cols);
        let direct = pearson(&cols[0], &cols[1]).unwrap();
        assert_eq!(def2_correlation(&s, "d0", "d1").unwrap(), direct);
        let m = def2_matrix(&s).unwrap();
        assert_eq!(m.get(0, 1), &direct);
    }

    proptest! {
        #[test]
        fn pearson_affine_and_symmetric(
            pts in prop::collection::vec((-100f64..100.0, -100f64..100.0), 3..50),
            a in prop_oneof![-10f64..-0.1, 0.1f64..10.0],
            b in -50f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let base = pearson(&x, &y).unwrap();
            prop_assume!(base.is_defined());
            let r = base.value.unwrap();
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let rs = pearson(&xs, &y).unwrap().value.unwrap();
            prop_assert!((rs - a.signum() * r).abs() < 1e-9);
            prop_assert_eq!(pearson(&y, &x).unwrap().value, Some(r));
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}
