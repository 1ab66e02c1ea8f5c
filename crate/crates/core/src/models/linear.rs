//! Least squares with an L2 penalty, solved through the normal equations.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Array1<f64>,
    pub intercept: f64,
}

impl LinearModel {
    /// Minimises `||y - b0 - X b||^2 + l2 * ||b||^2`; the intercept is not
    /// penalised.
    pub fn fit(x: &Array2<f64>, y: &[f64], l2: f64) -> Result<Self> {
        let (n, p) = x.dim();
        let x_mean = x.sum_axis(Axis(0)) / n as f64;
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let xc = x - &x_mean;
        let yc = Array1::from_iter(y.iter().map(|v| v - y_mean));
        let gram = xc.t().dot(&xc);
        let rhs = xc.t().dot(&yc);
        let mut a = DMatrix::from_fn(p, p, |i, j| gram[[i, j]]);
        for i in 0..p {
            a[(i, i)] += l2;
        }
        let b = DVector::from_iterator(p, rhs.iter().copied());
        let beta = match a.clone().cholesky() {
            Some(ch) => ch.solve(&b),
            None => a
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::Divergent("singular normal equations".into()))?,
        };
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergent("non-finite linear coefficients".into()));
        }
        let coefficients = Array1::from_iter(beta.iter().copied());
        let intercept = y_mean - coefficients.dot(&x_mean);
        Ok(Self {
            coefficients,
            intercept,
        })
    }

    pub fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        (x.dot(&self.coefficients) + self.intercept).to_vec()
    }
}
