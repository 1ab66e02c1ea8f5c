//! Per-point error terms and their average.
//!
//! Regression errors are residuals `y - y_hat`; classification errors are the
//! mismatch indicator `1[y != y_hat]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::Target;
use crate::error::{Error, Result};
use crate::models::Predictions;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Residual,
    Indicator,
}

impl std::fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorKind::Residual => "residual",
            ErrorKind::Indicator => "indicator",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector<F: Scalar = f64> {
    pub values: Vec<F>,
    pub kind: ErrorKind,
    pub model_label: String,
    pub test_provenance: String,
}

impl<F: Scalar> ErrorVector<F> {
    pub fn labeled(mut self, model_label: impl Into<String>, test_provenance: impl Into<String>) -> Self {
        self.model_label = model_label.into();
        self.test_provenance = test_provenance.into();
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry equals the first one.
    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }
}

pub fn residual_errors<F: Scalar>(y_true: &[F], y_pred: &[F]) -> Result<ErrorVector<F>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("residual inputs"));
    }
    Ok(ErrorVector {
        values: y_true.iter().zip(y_pred).map(|(t, p)| *t - *p).collect(),
        kind: ErrorKind::Residual,
        model_label: String::new(),
        test_provenance: String::new(),
    })
}

pub fn indicator_errors<F: Scalar, L: PartialEq>(y_true: &[L], y_pred: &[L]) -> Result<ErrorVector<F>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    Ok(ErrorVector {
        values: y_true
            .iter()
            .zip(y_pred)
            .map(|(t, p)| if t != p { F::one() } else { F::zero() })
            .collect(),
        kind: ErrorKind::Indicator,
        model_label: String::new(),
        test_provenance: String::new(),
    })
}

/// Arithmetic mean of the error terms (the error frequency for indicators).
pub fn average_error<F: Scalar>(e: &ErrorVector<F>) -> Result<F> {
    if e.values.is_empty() {
        return Err(Error::Empty("error vector"));
    }
    let sum: F = e.values.iter().copied().sum();
    Ok(sum / F::from_count(e.values.len()))
}

/// Aggregate performance metric over a test set.
pub type Metric<F> = fn(&ErrorVector<F>) -> Result<F>;

pub fn default_metric<F: Scalar>() -> Metric<F> {
    average_error::<F>
}

/// Errors of `predictions` against a dataset target, using the error form
/// that matches the target type.
pub fn errors_for(target: &Target, predictions: &Predictions) -> Result<ErrorVector<f64>> {
    match (target, predictions) {
        (Target::Real(y), Predictions::Real(p)) => residual_errors(y, p),
        (Target::Class(y), Predictions::Class(p)) => indicator_errors(y, p),
        _ => Err(Error::InvalidDataset(
            "prediction type does not match target type".into(),
        )),
    }
}

/// Writes one column per model label, one row per test point.
pub fn write_errors_csv<F: Scalar, W: Write>(errors: &[ErrorVector<F>], mut out: W) -> Result<()> {
    let m = errors.first().map_or(0, |e| e.len());
    if let Some(bad) = errors.iter().find(|e| e.len() != m) {
        return Err(Error::LengthMismatch {
            left: m,
            right: bad.len(),
        });
    }
    let io = |e| Error::io("<error csv>", e);
    let header: Vec<&str> = errors.iter().map(|e| e.model_label.as_str()).collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for i in 0..m {
        let row: Vec<String> = errors.iter().map(|e| e.values[i].to_string()).collect();
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn residual_examples() {
        let e = residual_errors(&[3.0, 5.0], &[1.0, 7.0]).unwrap();
        assert_eq!(e.values, vec![2.0, -2.0]);
        assert_eq!(e.kind, ErrorKind::Residual);
        assert_eq!(average_error(&e).unwrap(), 0.0);
        let y = [1.5f32, -2.0, 0.25];
        assert!(residual_errors(&y, &y).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(matches!(
            residual_errors(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        ));
        assert!(residual_errors(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn indicator_examples() {
        let e: ErrorVector = indicator_errors(&[0, 1, 2], &[0, 2, 2]).unwrap();
        assert_eq!(e.values, vec![0.0, 1.0, 0.0]);
        let same: ErrorVector = indicator_errors(&[1, 2, 3], &[1, 2, 3]).unwrap();
        assert!(same.values.iter().all(|v| *v == 0.0));
        assert_eq!(average_error(&same).unwrap(), 0.0);
        let all: ErrorVector = indicator_errors(&[0, 0, 0], &[1, 1, 1]).unwrap();
        assert!(all.values.iter().all(|v| *v == 1.0));
        assert!(indicator_errors::<f64, _>(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn average_of_indicators() {
        let e = ErrorVector::<f64> {
            values: vec![0.0, 1.0, 1.0, 0.0],
            kind: ErrorKind::Indicator,
            model_label: "m".into(),
            test_provenance: String::new(),
        };
        assert_eq!(average_error(&e).unwrap(), 0.5);
        assert_eq!(default_metric::<f64>()(&e).unwrap(), 0.5);
        let empty = ErrorVector::<f64> { values: vec![], ..e };
        assert!(average_error(&empty).is_err());
    }

    #[test]
    fn csv_columns() {
        let a: ErrorVector = residual_errors(&[1.0, 2.0], &[0.5, 2.0]).unwrap().labeled("a", "t");
        let b: ErrorVector = residual_errors(&[1.0, 2.0], &[1.0, 1.0]).unwrap().labeled("b", "t");
        let mut buf = Vec::new();
        write_errors_csv(&[a, b], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n0.5,0\n0,1\n");
    }

    proptest! {
        #[test]
        fn residuals_shift_equivariant(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40),
            c in -1e3f64..1e3,
        ) {
            let (y, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = residual_errors(&y, &p).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
            let ps: Vec<f64> = p.iter().map(|v| v + c).collect();
            let shifted = residual_errors(&ys, &ps).unwrap();
            for (a, b) in base.values.iter().zip(&shifted.values) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs() + c.abs()));
            }
        }

        #[test]
        fn indicator_average_in_unit_interval(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60),
        ) {
            let (y, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let e: ErrorVector = indicator_errors(&y, &p).unwrap();
            let avg = average_error(&e).unwrap();
            prop_assert!((0.0..=1.0).contains(&avg));
        }
    }
}
