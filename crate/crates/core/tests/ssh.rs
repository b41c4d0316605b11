use locallearn::netsim::data::TrainingSet;
use locallearn::netsim::train::{train_unit, EtaSchedule, UnitTrainConfig, WeightInit};
use locallearn::netsim::transfer::TransferFunction;
use locallearn::rng::seeded;
use locallearn::rules::clamped_hebb;
use locallearn::ssh::*;
use proptest::prelude::*;
use rand::Rng;

fn random_binary(m: usize, n: usize, r: &mut locallearn::rng::Rng) -> TrainingSet {
    let inputs = (0..m)
        .map(|_| (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect())
        .collect();
    let targets = (0..m).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    TrainingSet::with_scalar_targets(inputs, targets).unwrap()
}

#[test]
fn scaled_identity_is_orthogonal_and_learnt() {
    let data = orthogonal_family(10, &mut seeded(3));
    let v = predict_and_verify(&data, false, &VerifyConfig::default()).unwrap();
    assert!(v.report.flags.mutually_orthogonal);
    assert!(v.report.flags.all_row_sums_positive);
    assert_eq!(v.predicted, Some(true));
    assert!(v.empirical);
}

#[test]
fn common_orthant_family_is_flagged() {
    for seed in 0..20 {
        let data = common_orthant_family(10, 10, &mut seeded(seed));
        let v = predict_and_verify(&data, false, &VerifyConfig::default()).unwrap();
        assert!(v.report.flags.common_orthant);
        assert_eq!(v.predicted, Some(true));
        assert!(v.empirical);
    }
}

#[test]
fn single_example_is_learnt() {
    let data = TrainingSet::with_scalar_targets(vec![vec![0.3, -2.0]], vec![-1.0]).unwrap();
    let v = predict_and_verify(&data, false, &VerifyConfig::default()).unwrap();
    assert_eq!(v.predicted, Some(true));
    assert!(v.empirical);
    assert_eq!(v.report.row_sums, vec![1.0]);
}

#[test]
fn non_positive_row_sum_is_not_learnt() {
    // Search small binary sets for an equal-length consistent set with a
    // non-positive row sum, then confirm a long training run fails on it.
    let mut r = seeded(11);
    let mut found = 0;
    for _ in 0..2000 {
        let data = random_binary(6, 4, &mut r);
        let Ok(c) = canonicalize(&data, false) else { continue };
        let rep = criteria(&c);
        if rep.flags.all_row_sums_positive {
            continue;
        }
        let cfg = VerifyConfig {
            epochs: Some(10_000),
            ..VerifyConfig::default()
        };
        let v = predict_and_verify(&data, false, &cfg).unwrap();
        assert_eq!(v.predicted, Some(false));
        assert!(!v.empirical);
        found += 1;
        if found == 5 {
            break;
        }
    }
    assert_eq!(found, 5);
}

#[test]
fn equal_length_branch_is_exact() {
    let mut r = seeded(2024);
    let mut checked = 0;
    for _ in 0..3000 {
        let n = r.random_range(1..=10);
        let m = r.random_range(1..=20);
        let with_bias = r.random_bool(0.5);
        let data = random_binary(m, n, &mut r);
        let Ok(v) = predict_and_verify(&data, with_bias, &VerifyConfig::default()) else { continue };
        assert!(v.report.flags.equal_lengths);
        assert_eq!(v.predicted, Some(v.empirical), "{data:?}");
        checked += 1;
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn sufficient_conditions_hold_from_random_starts() {
    let mut r = seeded(5);
    for trial in 0..200 {
        let data = match trial % 3 {
            0 => orthogonal_family(8, &mut r),
            1 => common_orthant_family(12, 6, &mut r),
            _ => separable_binary_family(10, 10, &mut r),
        };
        let cfg = VerifyConfig {
            init: WeightInit::Normal { std: 1.0 },
            seed: trial,
            ..VerifyConfig::default()
        };
        let Ok(v) = predict_and_verify(&data, trial % 2 == 0, &cfg) else { continue };
        if v.predicted == Some(true) {
            assert!(v.empirical, "trial {trial}");
        }
    }
}

#[test]
fn epsilon_pair_needs_equal_lengths() {
    let data = TrainingSet::with_scalar_targets(vec![vec![1.0, 0.0], vec![-0.1, 0.0]], vec![1.0, 1.0]).unwrap();
    let v = predict_and_verify(&data, false, &VerifyConfig::default()).unwrap();
    assert_eq!(v.predicted, None);
    // Row sums are zero yet the margins differ: only the long vector is learnt.
    assert!(!v.empirical);
    assert_eq!(*v.accuracy.last().unwrap(), 0.5);
}

#[test]
fn accuracy_csv_has_a_row_per_epoch() {
    let data = orthogonal_family(4, &mut seeded(1));
    let cfg = VerifyConfig {
        epochs: Some(3),
        ..VerifyConfig::default()
    };
    let csv = accuracy_csv(&predict_and_verify(&data, false, &cfg).unwrap());
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("epoch,training_accuracy\n0,"));
}

fn train(data: &TrainingSet, w0: Vec<f64>, epochs: usize, seed: u64, eta: EtaSchedule) -> Vec<Vec<f64>> {
    let cfg = UnitTrainConfig {
        transfer: TransferFunction::threshold11(),
        eta,
        epochs,
        seed,
        init: WeightInit::Given { weights: w0 },
        shuffle: true,
    };
    train_unit(&clamped_hebb(), data, &cfg).unwrap().records.into_iter().map(|r| r.weights).collect()
}

proptest! {
    #[test]
    fn increment_per_epoch_is_eta_times_mean(seed in 0u64..1000, m in 1usize..15, n in 1usize..8) {
        let data = random_binary(m, n, &mut seeded(seed));
        let Ok(c) = canonicalize(&data, false) else { return Ok(()) };
        let mu = c.mean();
        let ws = train(&data, vec![0.5; n], 4, seed, EtaSchedule::EpochAveraged { eta: 0.1 });
        for pair in ws.windows(2) {
            for i in 0..n {
                prop_assert!((pair[1][i] - pair[0][i] - 0.1 * mu[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_set_trains_identically(seed in 0u64..1000, m in 1usize..15, n in 1usize..8, bias in any::<bool>()) {
        let data = random_binary(m, n, &mut seeded(seed));
        let Ok(c) = canonicalize(&data, bias) else { return Ok(()) };
        let original = if bias { data.with_bias_column() } else { data.clone() };
        let canon = TrainingSet::with_scalar_targets(c.vectors.clone(), vec![1.0; m]).unwrap();
        let w0: Vec<f64> = (0..original.input_dim()).map(|i| i as f64 * 0.1 - 0.2).collect();
        let eta = EtaSchedule::Constant { eta: 0.1 };
        prop_assert_eq!(train(&original, w0.clone(), 5, seed, eta), train(&canon, w0, 5, seed, eta));
    }
}
