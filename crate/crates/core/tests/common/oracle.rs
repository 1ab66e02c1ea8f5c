//! Reference implementations used to check the library.
//!
//! `bvn_upper` follows Genz's BVND algorithm (Drezner-Wesolowsky with
//! Gauss-Legendre rules of 6, 12 and 20 points); it shares no code with the
//! library's quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

const W: [&[f64]; 3] = [
    &[0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4],
    &[
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ],
    &[
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ],
];
const X: [&[f64]; 3] = [
    &[-0.932_469_514_203_152_2, -0.661_209_386_466_264_7, -0.238_619_186_083_197],
    &[
        -0.981_560_634_246_719_1,
        -0.904_117_256_370_475,
        -0.769_902_674_194_305,
        -0.587_317_954_286_617_1,
        -0.367_831_498_998_180_2,
        -0.125_233_408_511_469_2,
    ],
    &[
        -0.993_128_599_185_094_9,
        -0.963_971_927_277_913_8,
        -0.912_234_428_251_326,
        -0.839_116_971_822_218_8,
        -0.746_331_906_460_150_8,
        -0.636_053_680_726_515,
        -0.510_867_001_950_827_1,
        -0.373_706_088_715_419_6,
        -0.227_785_851_141_645_1,
        -0.076_526_521_133_497_33,
    ],
];

pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(X > h, Y > k)` for a standard bivariate normal with correlation `r`.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let ng = if r.abs() < 0.3 {
        0
    } else if r.abs() < 0.75 {
        1
    } else {
        2
    };
    let (w, x) = (W[ng], X[ng]);
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for i in 0..w.len() {
            for s in [1.0, -1.0] {
                let sn = (asr * (s * x[i] + 1.0) / 2.0).sin();
                bvn += w[i] * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (4.0 * PI) + phi(-h) * phi(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a * (-(bs / as_ + hk) / 2.0).exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * (2.0 * PI).sqrt() * phi(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for i in 0..w.len() {
            for s in [-1.0, 1.0] {
                let xs = (a * (s * x[i] + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a * w[i] * asr.exp() * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + phi(-h.max(k))
    } else {
        -bvn + (phi(-h) - phi(-k)).max(0.0)
    }
}

fn upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        0.0
    } else if h == f64::NEG_INFINITY {
        phi(-k)
    } else if k == f64::NEG_INFINITY {
        phi(-h)
    } else {
        bvn_upper(h, k, r)
    }
}

/// Rectangle probability by inclusion-exclusion over upper orthants.
pub fn rect(r: f64, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> f64 {
    upper(x_lo, y_lo, r) - upper(x_hi, y_lo, r) - upper(x_lo, y_hi, r) + upper(x_hi, y_hi, r)
}

pub fn chi2(t: &[Vec<u64>]) -> f64 {
    let n: u64 = t.iter().flatten().sum();
    let rows: Vec<u64> = t.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).sum()).collect();
    let mut s = 0.0;
    for (i, r) in t.iter().enumerate() {
        for (j, o) in r.iter().enumerate() {
            let e = rows[i] as f64 * cols[j] as f64 / n as f64;
            s += (*o as f64 - e).powi(2) / e;
        }
    }
    s
}

fn edges(counts: &[u64], n: u64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut e = vec![f64::NEG_INFINITY];
    let mut cum = 0;
    for c in &counts[..counts.len() - 1] {
        cum += c;
        e.push(normal.inverse_cdf(cum as f64 / n as f64));
    }
    e.push(f64::INFINITY);
    e
}

/// Latent chi-squared of a table's binning at correlation `r`.
pub struct LatentChi2 {
    xe: Vec<f64>,
    ye: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    n: f64,
}

impl LatentChi2 {
    pub fn new(t: &[Vec<u64>]) -> Self {
        let n: u64 = t.iter().flatten().sum();
        let rows: Vec<u64> = t.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<u64> = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).sum()).collect();
        Self {
            xe: edges(&rows, n),
            ye: edges(&cols, n),
            p: rows.iter().map(|c| *c as f64 / n as f64).collect(),
            q: cols.iter().map(|c| *c as f64 / n as f64).collect(),
            n: n as f64,
        }
    }

    pub fn at(&self, r: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.p.len() {
            for j in 0..self.q.len() {
                let pij = rect(r, self.xe[i], self.xe[i + 1], self.ye[j], self.ye[j + 1]);
                let e = self.p[i] * self.q[j];
                s += (pij - e).powi(2) / e;
            }
        }
        self.n * s
    }
}

/// `argmin_rho |X2_bvn(rho) - X2|` over the grid `0, 1e-4, ..., 0.9999`,
/// with the pedestal `(r - 1)(c - 1)` subtracted first.
pub fn phik_grid(t: &[Vec<u64>]) -> f64 {
    let dof = ((t.len() - 1) * (t[0].len() - 1)) as f64;
    let target = (chi2(t) - dof).max(0.0);
    let latent = LatentChi2::new(t);
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..10_000 {
        let r = i as f64 * 1e-4;
        let d = (latent.at(r) - target).abs();
        if d < best.0 {
            best = (d, r);
        }
    }
    best.1
}

/// Two-pass Pearson coefficient with sample (n - 1) moments.
pub fn pearson_two_pass(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}
