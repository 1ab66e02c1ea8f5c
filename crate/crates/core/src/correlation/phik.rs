//! The phi_K coefficient for categorical pairs.
//!
//! The observed chi-squared statistic (optionally reduced by its expectation
//! under independence, the degrees of freedom) is matched against the
//! chi-squared a bivariate normal with correlation `rho` would produce when
//! binned with the table's marginals; the matching `rho` is phi_K.

use statrs::distribution::{ContinuousCDF, Normal};

use super::bvn::rect_prob;
use super::contingency::{chi2_stat, ContingencyTable};
use super::{CorrValue, Method};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const RHO_MAX: f64 = 1.0 - 1e-9;
pub const RHO_TOL: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 200;

/// Bin layout of a table on the latent normal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBinning {
    pub row_edges: Vec<f64>,
    pub col_edges: Vec<f64>,
    pub row_freq: Vec<f64>,
    pub col_freq: Vec<f64>,
    pub n: f64,
}

fn edges(freq: &[f64]) -> Vec<f64> {
    let std = Normal::standard();
    let mut out = vec![f64::NEG_INFINITY];
    let mut cum = 0.0;
    for f in &freq[..freq.len() - 1] {
        cum += f;
        out.push(std.inverse_cdf(cum.min(1.0)));
    }
    out.push(f64::INFINITY);
    out
}

impl LatentBinning {
    pub fn from_table<L>(t: &ContingencyTable<L>) -> Result<Self> {
        let rows = t.row_sums();
        let cols = t.col_sums();
        if let Some(i) = rows.iter().position(|&s| s == 0) {
            return Err(Error::ZeroMarginal(format!("row {i}")));
        }
        if let Some(j) = cols.iter().position(|&s| s == 0) {
            return Err(Error::ZeroMarginal(format!("column {j}")));
        }
        let n = t.total() as f64;
        let row_freq: Vec<f64> = rows.iter().map(|&r| r as f64 / n).collect();
        let col_freq: Vec<f64> = cols.iter().map(|&c| c as f64 / n).collect();
        Ok(Self {
            row_edges: edges(&row_freq),
            col_edges: edges(&col_freq),
            row_freq,
            col_freq,
            n,
        })
    }

    /// Chi-squared of the binned bivariate normal with correlation `rho`,
    /// scaled to the table's sample size.
    pub fn chi2_at(&self, rho: f64) -> f64 {
        let mut stat = 0.0;
        for (i, pr) in self.row_freq.iter().enumerate() {
            for (j, pc) in self.col_freq.iter().enumerate() {
                let cell = rect_prob(
                    rho,
                    self.row_edges[i],
                    self.row_edges[i + 1],
                    self.col_edges[j],
                    self.col_edges[j + 1],
                );
                let e = pr * pc;
                stat += (cell - e) * (cell - e) / e;
            }
        }
        self.n * stat
    }
}

/// Degrees of freedom `(r - 1)(c - 1)`.
pub fn pedestal<L>(t: &ContingencyTable<L>) -> f64 {
    ((t.n_rows().saturating_sub(1)) * (t.n_cols().saturating_sub(1))) as f64
}

/// phi_K of a table; undefined when either variable is constant.
pub fn phik<F: Scalar, L>(t: &ContingencyTable<L>, apply_pedestal: bool) -> Result<CorrValue<F>> {
    let n_points = t.total() as usize;
    if t.is_degenerate() {
        return Ok(CorrValue::undefined(Method::Phik, n_points, "constant variable"));
    }
    let mut target: f64 = chi2_stat(t)?;
    if apply_pedestal {
        target = (target - pedestal(t)).max(0.0);
    }
    let rho = if target <= 0.0 {
        0.0
    } else {
        let binning = LatentBinning::from_table(t)?;
        solve_rho(&binning, target)
    };
    Ok(CorrValue::defined(F::lit(rho), Method::Phik, n_points))
}

/// Bisection for `chi2_at(rho) = target` on `[0, RHO_MAX]`; returns 1 when
/// the target is at or beyond the attainable maximum.
pub fn solve_rho(binning: &LatentBinning, target: f64) -> f64 {
    if binning.chi2_at(RHO_MAX) <= target {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, RHO_MAX);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= RHO_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if binning.chi2_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
