//! File output: correlation matrices as JSON/CSV, SVG heatmaps, and the
//! per-encoder error table.
//!
//! Every file is written to a temporary sibling first and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlation::{CorrValue, CorrelationMatrix, Method, PerformanceSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TOOL_NAME: &str = "errcorr";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ERRCORR_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Cell {
    Value(f64),
    Missing(String),
}

const NA: &str = "NA";

/// On-disk layout of a correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixDoc {
    tool: String,
    version: String,
    method: Method,
    labels: Vec<String>,
    n_points: Vec<Vec<usize>>,
    values: Vec<Vec<Cell>>,
    reasons: Vec<Vec<Option<String>>>,
}

fn grid<F: Scalar, T>(m: &CorrelationMatrix<F>, f: impl Fn(&CorrValue<F>) -> T) -> Vec<Vec<T>> {
    m.entries.iter().map(|row| row.iter().map(&f).collect()).collect()
}

fn is_square<T>(rows: &[Vec<T>], k: usize) -> bool {
    rows.len() == k && rows.iter().all(|r| r.len() == k)
}

impl MatrixDoc {
    fn from_matrix<F: Scalar>(m: &CorrelationMatrix<F>) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            method: m.method,
            labels: m.labels.clone(),
            n_points: grid(m, |c| c.n_points),
            values: grid(m, |c| match c.value {
                Some(v) => Cell::Value(v.as_f64()),
                None => Cell::Missing(NA.into()),
            }),
            reasons: grid(m, |c| c.undefined_reason.clone()),
        }
    }

    fn into_matrix<F: Scalar>(self) -> Result<CorrelationMatrix<F>> {
        let k = self.labels.len();
        if !is_square(&self.values, k) || !is_square(&self.reasons, k) || !is_square(&self.n_points, k) {
            return Err(Error::InvalidConfig(format!("matrix document is not {k}x{k}")));
        }
        let mut entries = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                let n = self.n_points[i][j];
                let reason = self.reasons[i][j].clone();
                row.push(match (&self.values[i][j], reason) {
                    (Cell::Value(v), None) => CorrValue::defined(F::lit(*v), self.method, n),
                    (Cell::Missing(s), Some(r)) if s == NA => CorrValue::undefined(self.method, n, r),
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "matrix entry ({i}, {j}) must be a number or \"NA\" with a reason"
                        )))
                    }
                });
            }
            entries.push(row);
        }
        Ok(CorrelationMatrix {
            labels: self.labels,
            entries,
            method: self.method,
        })
    }
}

impl<F: Scalar> Serialize for CorrelationMatrix<F> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixDoc::from_matrix(self).serialize(s)
    }
}

impl<'de, F: Scalar> Deserialize<'de> for CorrelationMatrix<F> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixDoc::deserialize(d)?.into_matrix().map_err(serde::de::Error::custom)
    }
}

pub fn matrix_to_json<F: Scalar>(m: &CorrelationMatrix<F>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(m)?;
    s.push('\n');
    Ok(s)
}

pub fn matrix_from_json<F: Scalar>(text: &str) -> Result<CorrelationMatrix<F>> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_matrix_json<F: Scalar>(m: &CorrelationMatrix<F>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, matrix_to_json(m)?.as_bytes())
}

pub fn read_matrix_json<F: Scalar>(path: impl AsRef<Path>) -> Result<CorrelationMatrix<F>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_json(&text)
}

/// Labels as header and first column; undefined entries as `NA:<reason>`.
pub fn matrix_to_csv<F: Scalar>(m: &CorrelationMatrix<F>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in m.labels.iter().zip(&m.entries) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|c| match (c.value, &c.undefined_reason) {
            (Some(v), _) => v.as_f64().to_string(),
            (None, r) => format!("{NA}:{}", r.as_deref().unwrap_or("")),
        }));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_matrix_csv<F: Scalar>(m: &CorrelationMatrix<F>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, matrix_to_csv(m)?.as_bytes())
}

/// One row per encoder, one column per downstream dataset.
pub fn series_to_csv<F: Scalar>(s: &PerformanceSeries<F>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["encoder".to_string()];
    header.extend(s.dataset_labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in s.encoder_labels.iter().zip(&s.avg_errors) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.as_f64().to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_series_csv<F: Scalar>(s: &PerformanceSeries<F>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, series_to_csv(s)?.as_bytes())
}

pub type Rgb = [f64; 3];

/// Relative luminance of an sRGB colour with channels in `[0, 1]`.
pub fn luminance(c: Rgb) -> f64 {
    let lin = |v: f64| {
        if v <= 0.04045 {
            v / 12.92
        } else {
            ((v + 0.055) / 1.055).powf(2.4)
        }
    };
    0.2126 * lin(c[0]) + 0.7152 * lin(c[1]) + 0.0722 * lin(c[2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStyle {
    /// Colour stops from light to dark; channels in `[0, 1]`.
    pub palette: Vec<Rgb>,
    pub cell_size: u32,
    pub precision: usize,
    /// Value range mapped onto the palette; the method's range when unset.
    pub range: Option<(f64, f64)>,
    pub undefined_fill: Rgb,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            palette: vec![[1.0, 1.0, 1.0], [8.0 / 255.0, 48.0 / 255.0, 107.0 / 255.0]],
            cell_size: 48,
            precision: 2,
            range: None,
            undefined_fill: [0.74, 0.74, 0.74],
        }
    }
}

impl HeatmapStyle {
    pub fn validate(&self) -> Result<()> {
        if self.palette.len() < 2 {
            return Err(Error::InvalidConfig("palette needs at least two colours".into()));
        }
        if self.palette.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidConfig("palette channels must lie in [0, 1]".into()));
        }
        // every channel non-increasing and luminance strictly decreasing keeps
        // the interpolated ramp strictly darker towards the end
        for w in self.palette.windows(2) {
            if (0..3).any(|c| w[1][c] > w[0][c]) || luminance(w[1]) >= luminance(w[0]) {
                return Err(Error::InvalidConfig("palette must darken monotonically".into()));
            }
        }
        if self.cell_size == 0 {
            return Err(Error::InvalidConfig("cell size must be positive".into()));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo < hi) {
                return Err(Error::InvalidBounds(format!("heatmap range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Fill colour for `value`, clamped into the range.
    pub fn color(&self, value: f64, method: Method) -> Rgb {
        let (lo, hi) = self.range.unwrap_or_else(|| method.range());
        let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
        let segments = (self.palette.len() - 1) as f64;
        let pos = t * segments;
        let i = (pos.floor() as usize).min(self.palette.len() - 2);
        let f = pos - i as f64;
        let (a, b) = (self.palette[i], self.palette[i + 1]);
        [0, 1, 2].map(|c| a[c] + (b[c] - a[c]) * f)
    }
}

fn css(c: Rgb) -> String {
    format!(
        "rgb({:.6}%,{:.6}%,{:.6}%)",
        c[0] * 100.0,
        c[1] * 100.0,
        c[2] * 100.0
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn heatmap_svg<F: Scalar>(m: &CorrelationMatrix<F>, style: &HeatmapStyle) -> Result<String> {
    style.validate()?;
    let k = m.len();
    if k < 2 {
        return Err(Error::Fleet(format!("heatmap needs k >= 2, got {k}")));
    }
    let cs = style.cell_size as usize;
    let longest = m.labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let margin = 12 + 7 * longest;
    let size = margin + k * cs + 8;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    ));
    s.push_str(&format!("<title>{} correlation</title>\n", m.method));
    for (i, label) in m.labels.iter().enumerate() {
        let c = margin + i * cs + cs / 2;
        s.push_str(&format!(
            "<text class=\"axis-label\" x=\"{}\" y=\"{c}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
            margin - 6,
            escape(label)
        ));
        s.push_str(&format!(
            "<text class=\"axis-label\" x=\"{c}\" y=\"{}\" text-anchor=\"start\" dominant-baseline=\"middle\" transform=\"rotate(-90 {c} {})\">{}</text>\n",
            margin - 6,
            margin - 6,
            escape(label)
        ));
    }
    for i in 0..k {
        for j in 0..k {
            let (x, y) = (margin + j * cs, margin + i * cs);
            let entry = m.get(i, j);
            let (fill, text) = match entry.value {
                Some(v) => {
                    let v = v.as_f64();
                    (style.color(v, m.method), format!("{v:.*}", style.precision))
                }
                None => (style.undefined_fill, NA.to_string()),
            };
            let ink = if luminance(fill) < 0.35 { "#ffffff" } else { "#000000" };
            s.push_str(&format!(
                "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{cs}\" height=\"{cs}\" fill=\"{}\" stroke=\"#ffffff\"",
                css(fill)
            ));
            if let Some(r) = &entry.undefined_reason {
                s.push_str(&format!("><title>{}</title></rect>\n", escape(r)));
            } else {
                s.push_str("/>\n");
            }
            s.push_str(&format!(
                "<text class=\"cell-value\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"{ink}\">{text}</text>\n",
                x + cs / 2,
                y + cs / 2
            ));
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_heatmap_svg<F: Scalar>(m: &CorrelationMatrix<F>, style: &HeatmapStyle, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, heatmap_svg(m, style)?.as_bytes())
}
