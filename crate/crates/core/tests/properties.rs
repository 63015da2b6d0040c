//! Property tests for the invariants that hold for any well-formed input.

use eyestate::bench::{f1_score, make_folds, make_folds_with};
use eyestate::connectivity::{adjacency, correlation_matrix, StateFilter};
use eyestate::ingest::{parse_arff, parse_csv, write_arff, write_csv, ChannelSeries, Recording};
use eyestate::learners::knn::knn_train;
use eyestate::learners::{train, Dataset, ForestParams, Hyperparameters, LogRegParams};
use eyestate::preprocess::{center, remove_outliers, remove_outliers_to_fixed_point};
use eyestate::selection::{entropy, mutual_information, HistogramConfig};
use proptest::prelude::*;

fn recording_strategy(max_len: usize) -> impl Strategy<Value = Recording<f64>> {
    (2usize..5, 3usize..max_len).prop_flat_map(|(c, n)| {
        (
            prop::collection::vec(prop::collection::vec(-5000.0f64..5000.0, n), c),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_map(move |(cols, labels)| {
                let channels = cols.into_iter().enumerate().map(|(i, v)| ChannelSeries::new(format!("ch{i}"), v)).collect();
                Recording::new(channels, labels, 128).unwrap()
            })
    })
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(rec in recording_strategy(40)) {
        let mut buf = Vec::new();
        write_csv(&rec, &mut buf).unwrap();
        let back: Recording<f64> = parse_csv(&buf[..], true, 128).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn arff_and_csv_agree(rec in recording_strategy(30)) {
        let mut arff = Vec::new();
        write_arff(&rec, "r", &mut arff).unwrap();
        let mut csv = Vec::new();
        write_csv(&rec, &mut csv).unwrap();
        let a: Recording<f64> = parse_arff(&arff[..], 128).unwrap();
        let c: Recording<f64> = parse_csv(&csv[..], true, 128).unwrap();
        prop_assert_eq!(&a, &c);
        prop_assert_eq!(&a, &rec);
    }

    #[test]
    fn outlier_removal_keeps_rows_aligned(rec in recording_strategy(40), factor in 1.5f64..4.0) {
        let (out, report) = remove_outliers(&rec, factor).unwrap();
        prop_assert_eq!(out.len() + report.removed(), rec.len());
        prop_assert!(report.removed_indices.windows(2).all(|w| w[0] < w[1]));
        let kept: Vec<usize> = (0..rec.len()).filter(|t| !report.removed_indices.contains(t)).collect();
        for (r, &t) in kept.iter().enumerate() {
            prop_assert_eq!(out.row(r), rec.row(t));
            prop_assert_eq!(out.labels()[r], rec.labels()[t]);
        }
        // repeated passes at small factors may empty the recording, which is an error
        let Ok((_, fixed)) = remove_outliers_to_fixed_point(&rec, factor, 50) else { return Ok(()) };
        prop_assert!(fixed.removed() >= report.removed());
        prop_assert!(report.removed_indices.iter().all(|t| fixed.removed_indices.contains(t)));
    }

    #[test]
    fn centering_is_idempotent(rec in recording_strategy(40)) {
        let once = center(&rec).unwrap();
        let twice = center(&once).unwrap();
        for (a, b) in once.channels().iter().zip(twice.channels()) {
            let m = a.values.iter().sum::<f64>() / a.values.len() as f64;
            prop_assert!(m.abs() < 1e-9);
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn correlation_is_pearson(rec in recording_strategy(60)) {
        let rec = center(&rec).unwrap();
        let Ok(corr) = correlation_matrix(&rec, StateFilter::All) else { return Ok(()) };
        for i in 0..corr.size() {
            prop_assert_eq!(corr.get(i, i), 1.0);
            for j in 0..corr.size() {
                prop_assert_eq!(corr.get(i, j), corr.get(j, i));
                if i != j {
                    let p = pearson(&rec.channel(i).values, &rec.channel(j).values);
                    prop_assert!((corr.get(i, j) - p).abs() < 1e-12, "{} vs {}", corr.get(i, j), p);
                }
            }
        }
    }

    #[test]
    fn adjacency_is_monotone_in_tau(rec in recording_strategy(60), a in -0.9f64..0.9, b in -0.9f64..0.9) {
        let rec = center(&rec).unwrap();
        let Ok(corr) = correlation_matrix(&rec, StateFilter::All) else { return Ok(()) };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let g_lo = adjacency(&corr, lo, StateFilter::All).unwrap();
        let g_hi = adjacency(&corr, hi, StateFilter::All).unwrap();
        for (i, j) in g_hi.edges() {
            prop_assert!(g_lo.has_edge(i, j));
        }
        for i in 0..g_lo.size() {
            prop_assert!(!g_lo.has_edge(i, i));
        }
    }

    #[test]
    fn correlation_follows_channel_permutation(rec in recording_strategy(40), seed in any::<u64>()) {
        let rec = center(&rec).unwrap();
        let Ok(corr) = correlation_matrix(&rec, StateFilter::All) else { return Ok(()) };
        let mut order: Vec<usize> = (0..rec.n_channels()).collect();
        order.rotate_left((seed % rec.n_channels() as u64) as usize);
        let permuted = rec.select_channels(&order).unwrap();
        let corr_p = correlation_matrix(&permuted, StateFilter::All).unwrap();
        prop_assert_eq!(corr_p, corr.permuted(&order));
    }

    #[test]
    fn mutual_information_is_symmetric_and_bounded(
        x in prop::collection::vec(-100.0f64..100.0, 2..200),
        seed in any::<u64>(),
        bins in 2usize..20,
    ) {
        let cfg = HistogramConfig::new(bins).unwrap();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v * 0.3 + ((i as u64 ^ seed) % 17) as f64).sin()).collect();
        let xy = mutual_information(&x, &y, &cfg).unwrap().nats;
        let yx = mutual_information(&y, &x, &cfg).unwrap().nats;
        prop_assert_eq!(xy, yx);
        prop_assert!(xy >= -1e-12);
        prop_assert!(xy <= entropy(&x, &cfg).min(entropy(&y, &cfg)) + 1e-12);
        let xx = mutual_information(&x, &x, &cfg).unwrap().nats;
        prop_assert!((xx - entropy(&x, &cfg)).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_ignores_positive_affine_maps(
        x in prop::collection::vec(0i32..40, 2..100),
        y in prop::collection::vec(0i32..40, 2..100),
        scale in 1i32..50,
        shift in -1000i32..1000,
    ) {
        let n = x.len().min(y.len());
        let xf: Vec<f64> = x[..n].iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y[..n].iter().map(|&v| v as f64).collect();
        let xs: Vec<f64> = xf.iter().map(|v| scale as f64 * v + shift as f64).collect();
        let cfg = HistogramConfig::default();
        prop_assert_eq!(
            mutual_information(&xf, &yf, &cfg).unwrap().nats,
            mutual_information(&xs, &yf, &cfg).unwrap().nats
        );
    }

    #[test]
    fn folds_partition_rows(labels in prop::collection::vec(0u8..=1, 10..300), k in 2usize..8, seed in any::<u64>()) {
        let n0 = labels.iter().filter(|&&l| l == 0).count();
        let n1 = labels.len() - n0;
        let plain = make_folds_with(&labels, k, seed, false).unwrap();
        let sizes = plain.fold_sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), labels.len());
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut seen = vec![0; labels.len()];
        for f in 0..k {
            for r in plain.test_rows(f) {
                seen[r] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        if n0 >= k && n1 >= k {
            let strat = make_folds(&labels, k, seed).unwrap();
            let sizes = strat.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for f in 0..k {
                let ones = strat.test_rows(f).iter().filter(|&&r| labels[r] == 1).count();
                prop_assert!(ones == n1 / k || ones == n1.div_ceil(k), "fold {} has {} positives of {}", f, ones, n1);
            }
            prop_assert_eq!(strat, make_folds(&labels, k, seed).unwrap());
        }
    }

    #[test]
    fn f1_matches_confusion_counts(pairs in prop::collection::vec((0u8..=1, 0u8..=1), 1..200)) {
        let (pred, actual): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let mut confusion = [[0usize; 2]; 2];
        for (&p, &a) in pred.iter().zip(&actual) {
            confusion[a as usize][p as usize] += 1;
        }
        let (tp, fp, fn_) = (confusion[1][1], confusion[0][1], confusion[1][0]);
        let expected = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        prop_assert_eq!(f1_score(&pred, &actual).unwrap(), expected);
    }

    #[test]
    fn knn_ignores_training_order(
        rows in prop::collection::vec((-50i32..50, -50i32..50, 0u8..=1), 4..40),
        queries in prop::collection::vec((-60i32..60, -60i32..60), 1..10),
        k in 1usize..4,
        rot in 0usize..40,
    ) {
        let feats: Vec<Vec<f64>> = rows.iter().map(|&(a, b, _)| vec![a as f64, b as f64]).collect();
        let labels: Vec<u8> = rows.iter().map(|r| r.2).collect();
        let data = Dataset::from_rows(&feats, labels.clone()).unwrap();
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        idx.rotate_left(rot % rows.len());
        idx.reverse();
        let shuffled = data.subset(&idx).unwrap();
        let m1 = knn_train(&data, k).unwrap();
        let m2 = knn_train(&shuffled, k).unwrap();
        for &(a, b) in &queries {
            let q = [a as f64, b as f64];
            prop_assert_eq!(m1.predict_row(&q), m2.predict_row(&q));
        }
    }

    #[test]
    fn training_leaves_data_untouched(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 6..30),
    ) {
        let feats: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
        let labels: Vec<u8> = (0..feats.len()).map(|i| (i % 2) as u8).collect();
        let data = Dataset::from_rows(&feats, labels).unwrap();
        let copy = data.clone();
        for params in [
            Hyperparameters::Knn { k: 3 },
            Hyperparameters::LogReg(LogRegParams { max_iter: 50, ..LogRegParams::default() }),
            Hyperparameters::Svc(eyestate::learners::SvcParams { gamma: 0.5, ..Default::default() }),
            Hyperparameters::Rf(ForestParams { n_trees: 5, ..ForestParams::default() }),
        ] {
            train(&data, &params).unwrap();
            prop_assert_eq!(&data, &copy);
        }
    }
}
