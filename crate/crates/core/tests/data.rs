use errcorr::data::{drop_feature, gen_synthetic, load_csv, split, subsample, Nonlinearity, SyntheticConfig, Task, TaskKind};
use errcorr::models::{feature_importance, train, Family, ModelSpec};
use proptest::prelude::*;

fn config(n: usize, weights: Vec<f64>, noise_sd: f64, task: Task) -> SyntheticConfig {
    SyntheticConfig {
        n,
        p: weights.len(),
        signal_weights: weights,
        noise_sd,
        nonlinearity: Nonlinearity::None,
        task,
    }
}

fn row_bits(d: &errcorr::Dataset) -> Vec<Vec<u64>> {
    d.features()
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect()
}

#[test]
fn dominant_features_carry_the_gain() {
    let mut w = vec![5.0, 5.0, 5.0];
    w.extend([0.1; 5]);
    let d = gen_synthetic(&config(1500, w, 0.5, Task::Regression), 21).unwrap();
    let m = train(&ModelSpec::new(Family::Gboost, "gb"), &d, 1).unwrap();
    let imp = feature_importance(&m).unwrap();
    let weakest_strong = imp.shares[..3].iter().copied().fold(f64::INFINITY, f64::min);
    assert!(imp.shares[3..].iter().all(|s| *s < weakest_strong), "{:?}", imp.shares);
}

#[test]
fn csv_files_load_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("houses.csv");
    std::fs::write(&path, "rooms,population,price\n3,100,2.5\n4,250,3.1\n2,80,1.9\n").unwrap();
    let d = load_csv(&path, "price", TaskKind::Regression).unwrap();
    assert_eq!(d.feature_names(), ["rooms", "population"]);
    assert!(d.provenance().contains("houses.csv"));
    let d = drop_feature(&d, "population").unwrap();
    assert_eq!(d.feature_names(), ["rooms"]);

    assert!(load_csv(dir.path().join("missing.csv"), "price", TaskKind::Regression).is_err());
    std::fs::write(&path, "a,y\n1,0\n2,1\n3,2\n").unwrap();
    let c = load_csv(&path, "y", TaskKind::Classification).unwrap();
    assert_eq!(c.task(), Task::Classification { n_classes: 3 });
}

#[test]
fn written_csv_reloads_identically() {
    let d = gen_synthetic(&config(40, vec![1.0, 0.5, 2.0], 0.3, Task::Regression), 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    d.write_csv(&path, "y").unwrap();
    let back = load_csv(&path, "y", TaskKind::Regression).unwrap();
    assert_eq!(row_bits(&back), row_bits(&d));
    assert_eq!(back.target(), d.target());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_partitions_rows(n in 4usize..300, fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let d = gen_synthetic(&config(n, vec![1.0, 1.0], 0.5, Task::Regression), 1).unwrap();
        match split(&d, fraction, seed) {
            Ok((train_set, test_set)) => {
                prop_assert_eq!(train_set.n_rows(), (n as f64 * fraction + 1e-9).floor() as usize);
                prop_assert_eq!(train_set.n_rows() + test_set.n_rows(), n);
                let mut all = row_bits(&train_set);
                all.extend(row_bits(&test_set));
                all.sort();
                let mut orig = row_bits(&d);
                orig.sort();
                prop_assert_eq!(all, orig);
            }
            Err(e) => prop_assert!(e.to_string().starts_with("empty")),
        }
    }

    #[test]
    fn generation_is_a_function_of_config_and_seed(
        n in 2usize..60,
        weights in prop::collection::vec(0.1f64..3.0, 1..5),
        noise in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let cfg = config(n, weights, noise, Task::Regression);
        let a = gen_synthetic(&cfg, seed).unwrap();
        let b = gen_synthetic(&cfg, seed).unwrap();
        prop_assert_eq!(row_bits(&a), row_bits(&b));
        prop_assert_eq!(a.target(), b.target());
        let s1 = subsample(&a, n / 2 + 1, seed).unwrap();
        let s2 = subsample(&b, n / 2 + 1, seed).unwrap();
        prop_assert_eq!(row_bits(&s1), row_bits(&s2));
    }

    #[test]
    fn single_unit_weight_without_noise_is_exact(p in 1usize..6, pick in 0usize..6, seed in any::<u64>()) {
        let j = pick % p;
        let mut w = vec![0.0; p];
        w[j] = 1.0;
        let d = gen_synthetic(&config(30, w, 0.0, Task::Regression), seed).unwrap();
        let y = d.target().as_real();
        for (i, row) in d.features().rows().into_iter().enumerate() {
            prop_assert_eq!(y[i], row[j]);
        }
    }
}
