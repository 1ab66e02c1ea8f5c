use errcorr::correlation::{corr_matrix, CorrValue, CorrelationMatrix, Method, MethodChoice};
use errcorr::error_metrics::{indicator_errors, residual_errors, ErrorVector};
use errcorr::report::{
    emit_heatmap_svg, emit_matrix_json, heatmap_svg, luminance, matrix_from_json, matrix_to_json, read_matrix_json,
    HeatmapStyle,
};
use proptest::prelude::*;

fn from_values(values: &[Vec<Option<f64>>], method: Method) -> CorrelationMatrix {
    let k = values.len();
    CorrelationMatrix {
        labels: (0..k).map(|i| format!("model_{i}")).collect(),
        entries: values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Some(x) => CorrValue::defined(*x, method, 50),
                        None => CorrValue::undefined(method, 50, "zero variance"),
                    })
                    .collect()
            })
            .collect(),
        method,
    }
}

/// Fills of the `k * k` cells in row-major order.
fn cell_fills(svg: &str) -> Vec<[f64; 3]> {
    svg.lines()
        .filter(|l| l.starts_with("<rect class=\"cell\""))
        .map(|l| {
            let start = l.find("fill=\"rgb(").unwrap() + "fill=\"rgb(".len();
            let end = start + l[start..].find(')').unwrap();
            let parts: Vec<f64> = l[start..end]
                .split(',')
                .map(|p| p.trim_end_matches('%').parse::<f64>().unwrap() / 100.0)
                .collect();
            [parts[0], parts[1], parts[2]]
        })
        .collect()
}

fn sample_fleet() -> Vec<ErrorVector> {
    let y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let preds = [
        [1.1, 2.3, 2.7, 4.2, 4.6, 6.4],
        [0.8, 2.2, 2.9, 4.5, 4.9, 6.1],
        [1.0, 1.5, 3.5, 3.6, 5.2, 5.8],
    ];
    preds
        .iter()
        .enumerate()
        .map(|(i, p)| residual_errors(&y, p).unwrap().labeled(format!("m{i}"), "test"))
        .collect()
}

#[test]
fn json_round_trip_and_stable_bytes() {
    let m = corr_matrix(&sample_fleet(), MethodChoice::Auto).unwrap();
    let text = matrix_to_json(&m).unwrap();
    assert_eq!(matrix_from_json::<f64>(&text).unwrap(), m);
    assert_eq!(matrix_to_json(&m).unwrap(), text);

    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    emit_matrix_json(&m, &a).unwrap();
    emit_matrix_json(&m, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_matrix_json::<f64>(&a).unwrap(), m);
}

#[test]
fn undefined_entries_survive_json() {
    let mut fleet: Vec<ErrorVector> = vec![
        indicator_errors(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(),
        indicator_errors(&[0, 1, 2, 1], &[1, 1, 2, 0]).unwrap(),
        indicator_errors(&[0, 1, 2, 1], &[0, 2, 2, 0]).unwrap(),
    ];
    for (i, e) in fleet.iter_mut().enumerate() {
        e.model_label = format!("clf{i}");
    }
    let m = corr_matrix(&fleet, MethodChoice::Auto).unwrap();
    assert_eq!(m.method, Method::Phik);
    assert!(!m.get(0, 1).is_defined());
    let text = matrix_to_json(&m).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["values"][0][1], "NA");
    assert!(doc["reasons"][0][1].as_str().unwrap().contains("constant"));
    assert_eq!(matrix_from_json::<f64>(&text).unwrap(), m);
}

#[test]
fn five_by_five_structure() {
    let mut v = vec![vec![Some(0.3); 5]; 5];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    let svg = heatmap_svg(&from_values(&v, Method::Pearson), &HeatmapStyle::default()).unwrap();
    assert_eq!(svg.matches("class=\"cell\"").count(), 25);
    assert_eq!(svg.matches("class=\"axis-label\"").count(), 10);
    assert_eq!(svg.matches(">0.30</text>").count(), 20);
}

#[test]
fn diagonal_darkest_and_zero_off_diagonal_uniform() {
    let k = 4;
    let v: Vec<Vec<Option<f64>>> = (0..k)
        .map(|i| (0..k).map(|j| Some(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let fills = cell_fills(&heatmap_svg(&from_values(&v, Method::Phik), &HeatmapStyle::default()).unwrap());
    let lum: Vec<f64> = fills.iter().map(|c| luminance(*c)).collect();
    let off: Vec<[f64; 3]> = (0..k * k).filter(|n| n / k != n % k).map(|n| fills[n]).collect();
    assert!(off.iter().all(|c| *c == off[0]));
    assert!(luminance(off[0]) >= lum.iter().copied().fold(0.0, f64::max) - 1e-12);
    for i in 0..k {
        assert!(lum[i * k + i] < luminance(off[0]));
    }
}

#[test]
fn undefined_cells_are_gray_and_labelled() {
    let v = vec![vec![None, None], vec![None, Some(1.0)]];
    let style = HeatmapStyle::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.svg");
    emit_heatmap_svg(&from_values(&v, Method::Pearson), &style, &path).unwrap();
    let svg = std::fs::read_to_string(path).unwrap();
    let fills = cell_fills(&svg);
    assert_eq!(fills[0], style.undefined_fill);
    assert_eq!(svg.matches(">NA</text>").count(), 3);
    assert_eq!(svg.matches("<title>zero variance</title>").count(), 3);
}

proptest! {
    #[test]
    fn larger_values_are_darker(vals in prop::collection::vec(-1.0f64..=1.0, 6)) {
        let v = vec![
            vec![Some(1.0), Some(vals[0]), Some(vals[1])],
            vec![Some(vals[2]), Some(1.0), Some(vals[3])],
            vec![Some(vals[4]), Some(vals[5]), Some(1.0)],
        ];
        let m = from_values(&v, Method::Pearson);
        let fills = cell_fills(&heatmap_svg(&m, &HeatmapStyle::default()).unwrap());
        let flat: Vec<f64> = v.iter().flatten().map(|x| x.unwrap()).collect();
        for a in 0..9 {
            for b in 0..9 {
                if flat[a] > flat[b] + 1e-6 {
                    prop_assert!(luminance(fills[a]) < luminance(fills[b]));
                }
            }
        }
    }

    #[test]
    fn json_round_trip_any_matrix(
        vals in prop::collection::vec(prop::option::of(-1.0f64..=1.0), 9),
    ) {
        let v: Vec<Vec<Option<f64>>> = vals.chunks(3).map(|c| c.to_vec()).collect();
        let m = from_values(&v, Method::Pearson);
        prop_assert_eq!(matrix_from_json::<f64>(&matrix_to_json(&m).unwrap()).unwrap(), m);
    }
}
