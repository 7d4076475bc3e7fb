//! Scorer and metric results against brute-force and first-order oracles.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruvfair_core::compas::Race;
use ruvfair_core::metrics::{
    aggregate_splits, fit_logistic, penalized_gradient, penalized_loss, predict_prob, rates, roc,
    GroupRates, LogisticOptions, Rates, SplitRates,
};
use ruvfair_core::Matrix;

/// Pairwise win rate of positives over negatives, ties counting ½.
fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins2, mut pairs) = (0u64, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                pairs += 1;
                wins2 += if si > sj {
                    2
                } else if si == sj {
                    1
                } else {
                    0
                };
            }
        }
    }
    wins2 as f64 / (2 * pairs) as f64
}

fn dataset(seed: u64, n: usize) -> (Matrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, 2, |_, _| rng.random_range(-2.0..2.0));
    let labels = (0..n)
        .map(|i| {
            let eta = 0.4 + 1.2 * x[(i, 0)] - 0.8 * x[(i, 1)];
            rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())
        })
        .collect();
    (x, labels)
}

#[test]
fn logistic_matches_gradient_descent() {
    let (x, labels) = dataset(2, 20);
    assert!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
    let opts = LogisticOptions::default();
    let model = fit_logistic(&x, &labels, &opts).unwrap();
    assert!(model.converged);

    // plain gradient descent on the same objective
    let mut w = vec![0.0; 3];
    for _ in 0..200_000 {
        let g = penalized_gradient(&x, &labels, &w, opts.ridge).unwrap();
        if g.iter().all(|v| v.abs() < 1e-11) {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= 0.05 * gi;
        }
    }
    let dist: f64 = w
        .iter()
        .zip(&model.weights)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(dist <= 1e-4, "{w:?} vs {:?}", model.weights);
}

#[test]
fn fitted_gradient_is_below_tolerance() {
    let (x, labels) = dataset(8, 200);
    let opts = LogisticOptions::default();
    let model = fit_logistic(&x, &labels, &opts).unwrap();
    let g = penalized_gradient(&x, &labels, &model.weights, opts.ridge).unwrap();
    assert!(g.iter().all(|v| v.abs() <= opts.tol));
    assert!(model.iterations <= opts.max_iter);
}

#[test]
fn separable_data_still_returns_finite_weights() {
    let x = Matrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]]).unwrap();
    let model = fit_logistic(&x, &[false, false, true, true], &LogisticOptions::default()).unwrap();
    assert!(model.weights.iter().all(|w| w.is_finite()));
    assert!(model.weights[1] > 0.0);
}

#[test]
fn iteration_budget_is_respected() {
    let (x, labels) = dataset(4, 50);
    let opts = LogisticOptions {
        max_iter: 1,
        ..LogisticOptions::default()
    };
    let model = fit_logistic(&x, &labels, &opts).unwrap();
    assert_eq!(model.iterations, 1);
    assert!(!model.converged);
}

#[test]
fn roc_ten_point_case() {
    let scores = [0.9, 0.8, 0.8, 0.7, 0.55, 0.5, 0.5, 0.3, 0.2, 0.1];
    let labels = [
        true, false, true, true, false, true, false, false, true, false,
    ];
    let curve = roc(&scores, &labels).unwrap();
    assert_eq!(curve.auc, mann_whitney(&scores, &labels));
}

#[test]
fn prediction_invariant_under_feature_permutation() {
    let (x, labels) = dataset(12, 60);
    let model = fit_logistic(&x, &labels, &LogisticOptions::default()).unwrap();
    let swapped_x = x.select_columns(&[1, 0]);
    let mut swapped = model.clone();
    swapped.weights = vec![model.weights[0], model.weights[2], model.weights[1]];
    let a = predict_prob(&model, &x).unwrap();
    let b = predict_prob(&swapped, &swapped_x).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-15);
    }
}

fn rates_of(v: f64) -> Rates {
    Rates {
        fpr: Some(v),
        fnr: Some(1.0 - v),
        accuracy: Some(v / 2.0),
        counts: Default::default(),
    }
}

fn split_of(v: f64) -> SplitRates {
    let g = GroupRates {
        population: rates_of(v),
        caucasian: rates_of(v * 0.5),
        african_american: Rates {
            fpr: None,
            ..rates_of(v)
        },
    };
    SplitRates {
        raw: g,
        debiased: g,
        compas: g,
    }
}

#[test]
fn aggregate_thirty_splits() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let values: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
    let table = aggregate_splits(&values.iter().map(|&v| split_of(v)).collect::<Vec<_>>()).unwrap();

    // two-pass textbook formulas
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();

    let cell = table.raw.population.fpr;
    assert!((cell.mean.unwrap() - mean).abs() <= 1e-14);
    assert!((cell.se.unwrap() - se).abs() <= 1e-14);
    let fnr = table.debiased.population.fnr;
    assert!((fnr.mean.unwrap() - (1.0 - mean)).abs() <= 1e-14);
    assert!((fnr.se.unwrap() - se).abs() <= 1e-14);
    let caucasian = table.compas.caucasian.fpr;
    assert!((caucasian.mean.unwrap() - 0.5 * mean).abs() <= 1e-14);
    assert!((caucasian.se.unwrap() - 0.5 * se).abs() <= 1e-14);
    let undefined = table.raw.african_american.fpr;
    assert_eq!(
        (undefined.mean, undefined.defined, undefined.undefined),
        (None, 0, 30)
    );
    assert_eq!(table.splits, 30);
}

#[test]
fn aggregate_identical_and_two_point() {
    let table = aggregate_splits(&[split_of(0.3), split_of(0.3), split_of(0.3)]).unwrap();
    assert_eq!(table.raw.population.fpr.se, Some(0.0));
    let table = aggregate_splits(&[split_of(0.2), split_of(0.4)]).unwrap();
    let cell = table.raw.population.fpr;
    assert!((cell.mean.unwrap() - 0.3).abs() < 1e-15);
    assert!((cell.se.unwrap() - 0.1).abs() < 1e-15);
    assert!(aggregate_splits(&[]).is_err());
}

fn race_strategy() -> impl Strategy<Value = Race> {
    prop_oneof![Just(Race::AfricanAmerican), Just(Race::Caucasian)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn auc_equals_pairwise_win_rate(
        data in (2usize..=12).prop_flat_map(|n| (
            prop::collection::vec(0u8..6, n),
            prop::collection::vec(any::<bool>(), n),
        ))
    ) {
        let (raw, labels) = data;
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        // few distinct values so ties are common
        let scores: Vec<f64> = raw.iter().map(|&v| f64::from(v) / 5.0).collect();
        let curve = roc(&scores, &labels).unwrap();
        prop_assert_eq!(curve.auc, mann_whitney(&scores, &labels));
        prop_assert_eq!(curve.points.first().copied(), Some((0.0, 0.0)));
        prop_assert_eq!(curve.points.last().copied(), Some((1.0, 1.0)));
        for w in curve.points.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn raising_threshold_is_monotone(
        scores in prop::collection::vec(0.0f64..1.0, 1..40),
        seed in any::<u64>(),
        t1 in 0.0f64..1.0,
        dt in 0.0f64..0.5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<bool> = scores.iter().map(|_| rng.random()).collect();
        let lo = rates(&scores, &labels, t1).unwrap();
        let hi = rates(&scores, &labels, t1 + dt).unwrap();
        if let (Some(a), Some(b)) = (lo.fpr, hi.fpr) {
            prop_assert!(b <= a);
        }
        if let (Some(a), Some(b)) = (lo.fnr, hi.fnr) {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn finite_difference_gradient(
        w in prop::collection::vec(-2.0f64..2.0, 3),
        seed in 0u64..1000,
    ) {
        let (x, labels) = dataset(seed, 25);
        let ridge = 0.3;
        let g = penalized_gradient(&x, &labels, &w, ridge).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut up = w.clone();
            let mut down = w.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (penalized_loss(&x, &labels, &up, ridge).unwrap()
                - penalized_loss(&x, &labels, &down, ridge).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "{} vs {}", fd, g[i]);
        }
    }

    #[test]
    fn group_rates_partition_counts(
        rows in prop::collection::vec((0.0f64..1.0, any::<bool>(), race_strategy()), 1..30),
    ) {
        let scores: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
        let races: Vec<Race> = rows.iter().map(|r| r.2).collect();
        let g = ruvfair_core::metrics::group_rates(&scores, &labels, &races, 0.5).unwrap();
        let (c, a, p) = (g.caucasian.counts, g.african_american.counts, g.population.counts);
        prop_assert_eq!(c.tp + a.tp, p.tp);
        prop_assert_eq!(c.fp + a.fp, p.fp);
        prop_assert_eq!(c.tn + a.tn, p.tn);
        prop_assert_eq!(c.fn_ + a.fn_, p.fn_);
    }
}
