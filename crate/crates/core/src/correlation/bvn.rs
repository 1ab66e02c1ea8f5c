//! Rectangle probabilities of the standard bivariate normal.
//!
//! The probability is written as a one-dimensional integral over `x` of the
//! normal density times the conditional probability of the `y` interval,
//! `P = int phi(x) [Phi((y_hi - rho x)/s) - Phi((y_lo - rho x)/s)] dx` with
//! `s = sqrt(1 - rho^2)`, and evaluated with adaptive Gauss-Legendre
//! quadrature. Infinite `x` limits are truncated at +-8.5.

use libm::erfc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TRUNCATION: f64 = 8.5;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

const ABS_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 30;

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        s += w * (f(mid - half * x) + f(mid + half * x));
    }
    s * half
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(f, a, m);
    let right = gauss_legendre(f, m, b);
    let sum = left + right;
    let floor = 4.0 * f64::EPSILON * sum.abs();
    if depth >= MAX_DEPTH || (sum - whole).abs() <= tol.max(floor) {
        return sum;
    }
    let t = 0.5 * tol;
    adaptive(f, a, m, left, t, depth + 1) + adaptive(f, m, b, right, t, depth + 1)
}

/// Integral of `f` over `[a, b]`, split at `breaks` first.
pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|p| *p > a && *p < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| adaptive(f, w[0], w[1], gauss_legendre(f, w[0], w[1]), tol, 0))
        .sum()
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// `Phi(b) - Phi(a)`, using upper tails when both ends are positive.
pub fn norm_interval(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        norm_cdf(-a) - norm_cdf(-b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// Probability that `(X, Y)`, standard bivariate normal with correlation
/// `rho`, falls in `[x_lo, x_hi] x [y_lo, y_hi]`. Bounds may be infinite.
pub fn bvn_rect_prob<F: Scalar>(rho: F, x_lo: F, x_hi: F, y_lo: F, y_hi: F) -> Result<F> {
    let rho = rho.as_f64();
    let (x_lo, x_hi, y_lo, y_hi) = (x_lo.as_f64(), x_hi.as_f64(), y_lo.as_f64(), y_hi.as_f64());
    if !(rho.abs() < 1.0) {
        return Err(Error::OutOfRange {
            what: "rho",
            value: rho.to_string(),
            range: "(-1, 1)".into(),
        });
    }
    if [x_lo, x_hi, y_lo, y_hi].iter().any(|v| v.is_nan()) || !(x_lo < x_hi) || !(y_lo < y_hi) {
        return Err(Error::InvalidBounds(format!(
            "[{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"
        )));
    }
    Ok(F::lit(rect_prob(rho, x_lo, x_hi, y_lo, y_hi)))
}

pub(crate) fn rect_prob(rho: f64, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> f64 {
    if rho == 0.0 {
        return norm_interval(x_lo, x_hi) * norm_interval(y_lo, y_hi);
    }
    let a = x_lo.max(-TRUNCATION);
    let b = x_hi.min(TRUNCATION);
    if a >= b {
        return 0.0;
    }
    let s = (1.0 - rho * rho).sqrt();
    let f = |x: f64| norm_pdf(x) * norm_interval((y_lo - rho * x) / s, (y_hi - rho * x) / s);
    // the conditional interval probability jumps near x = y / rho when s is small
    let mut breaks = vec![0.0];
    for y in [y_lo, y_hi] {
        if y.is_finite() {
            let c = y / rho;
            breaks.extend([c - 8.0 * s / rho.abs(), c, c + 8.0 * s / rho.abs()]);
        }
    }
    integrate(&f, a, b, &breaks, ABS_TOL).clamp(0.0, 1.0)
}
