use std::collections::BTreeMap;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Cross-tabulated counts with sorted category labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable<L = i64> {
    pub counts: Vec<Vec<u64>>,
    pub row_labels: Vec<L>,
    pub col_labels: Vec<L>,
}

impl ContingencyTable<usize> {
    /// Table from raw counts, labelled `0..r` and `0..c`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || c == 0 {
            return Err(Error::Empty("contingency table"));
        }
        if let Some(row) = counts.iter().find(|r| r.len() != c) {
            return Err(Error::LengthMismatch {
                left: c,
                right: row.len(),
            });
        }
        let r = counts.len();
        Ok(Self {
            counts,
            row_labels: (0..r).collect(),
            col_labels: (0..c).collect(),
        })
    }
}

impl<L> ContingencyTable<L> {
    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_cols())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Fewer than two categories on either axis.
    pub fn is_degenerate(&self) -> bool {
        self.n_rows() < 2 || self.n_cols() < 2
    }

    pub fn transpose(&self) -> ContingencyTable<L>
    where
        L: Clone,
    {
        let counts = (0..self.n_cols())
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        ContingencyTable {
            counts,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }
}

/// Counts of each `(a[t], b[t])` pair; categories are sorted ascending.
pub fn contingency<L: Ord + Clone>(a: &[L], b: &[L]) -> Result<ContingencyTable<L>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let index = |v: &[L]| -> BTreeMap<L, usize> {
        let mut m: BTreeMap<L, usize> = v.iter().map(|x| (x.clone(), 0)).collect();
        for (i, slot) in m.values_mut().enumerate() {
            *slot = i;
        }
        m
    };
    let (ra, rb) = (index(a), index(b));
    let mut counts = vec![vec![0u64; rb.len()]; ra.len()];
    for (x, y) in a.iter().zip(b) {
        counts[ra[x]][rb[y]] += 1;
    }
    Ok(ContingencyTable {
        counts,
        row_labels: ra.into_keys().collect(),
        col_labels: rb.into_keys().collect(),
    })
}

/// Pearson's chi-squared statistic `sum (O - E)^2 / E` with
/// `E = row * col / total`.
///
/// Generic over the number type so it can be evaluated exactly (e.g. with
/// rationals) as well as in floating point.
pub fn chi2_stat<F, L>(t: &ContingencyTable<L>) -> Result<F>
where
    F: Num + Copy + FromPrimitive,
{
    let rows = t.row_sums();
    let cols = t.col_sums();
    if let Some(i) = rows.iter().position(|&s| s == 0) {
        return Err(Error::ZeroMarginal(format!("row {i}")));
    }
    if let Some(j) = cols.iter().position(|&s| s == 0) {
        return Err(Error::ZeroMarginal(format!("column {j}")));
    }
    let conv = |v: u64| F::from_u64(v).expect("count representable");
    let n = conv(t.total());
    let mut stat = F::zero();
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = conv(rows[i]) * conv(cols[j]) / n;
            let d = conv(o) - e;
            stat = stat + d * d / e;
        }
    }
    Ok(stat)
}
