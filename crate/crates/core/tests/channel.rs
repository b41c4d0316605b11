use locallearn::channel::*;
use locallearn::deep_targets::rule_to_target;
use locallearn::netsim::net::LayeredNet;
use locallearn::netsim::transfer::TransferFunction;
use locallearn::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

fn random_net(sizes: &[usize], seed: u64, out: TransferFunction) -> LayeredNet {
    let mut transfers = vec![TransferFunction::tanh(); sizes.len() - 2];
    transfers.push(out);
    let mut net = LayeredNet::new(sizes.to_vec(), transfers).unwrap();
    net.init_normal(0.7, &mut seeded(seed));
    net
}

fn example(n: usize, m: usize, seed: u64, unit_targets: bool) -> (Vec<f64>, Vec<f64>) {
    let mut r = seeded(seed ^ 0x5eed);
    let x = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let t = (0..m)
        .map(|_| if unit_targets { r.random_range(0.05..0.95) } else { r.random_range(-1.0..1.0) })
        .collect();
    (x, t)
}

#[test]
fn backprop_matches_central_differences() {
    for seed in 0..10 {
        for (loss, out) in [(Loss::Squared, TransferFunction::linear()), (Loss::CrossEntropy, TransferFunction::logistic())] {
            let net = random_net(&[5, 4, 3, 2], seed, out);
            let (x, t) = example(5, 2, seed, loss == Loss::CrossEntropy);
            let sup = Supervision::top(&net, t);
            let b = backprop(&net, &x, &sup, loss).unwrap();
            let bp = param_gradient(&net, &b.gradient);
            let fd = finite_difference_gradient(&net, &x, &sup, loss, 1e-5, FdScheme::Central, &mut Default::default()).unwrap();
            assert!(max_relative_error(&bp, &fd) <= 1e-5, "{seed} {loss:?}");
        }
    }
}

#[test]
fn pwlr_direction_agrees_with_backprop() {
    for seed in 0..10 {
        let net = random_net(&[6, 5, 1], seed, TransferFunction::linear());
        let (x, t) = example(6, 1, seed, false);
        let sup = Supervision::top(&net, t);
        let bp = run(&ChannelAlgorithm::new(AlgorithmKind::Bp), &net, &x, &sup, Loss::Squared, 0).unwrap();
        let lr = run(&ChannelAlgorithm::new(AlgorithmKind::Pwlr { epsilon: 1e-6 }), &net, &x, &sup, Loss::Squared, 0).unwrap();
        let gap = bp.step_unit_vector.iter().zip(&lr.step_unit_vector).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-4, "{gap}");
        assert!((bp.o_emp.unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn palr_recovers_the_gradient() {
    let net = random_net(&[4, 6, 3, 2], 3, TransferFunction::linear());
    let (x, t) = example(4, 2, 3, false);
    let sup = Supervision::top(&net, t);
    let r = run(&ChannelAlgorithm::new(AlgorithmKind::Palr { epsilon: 1e-7 }), &net, &x, &sup, Loss::Squared, 0).unwrap();
    assert!(r.o_emp.unwrap() > 1.0 - 1e-8);
}

#[test]
fn every_step_is_a_unit_vector() {
    let net = random_net(&[5, 5, 1], 1, TransferFunction::linear());
    let (x, t) = example(5, 1, 1, false);
    let sup = Supervision::top(&net, t);
    let kinds = [
        AlgorithmKind::Bp,
        AlgorithmKind::Pwgb,
        AlgorithmKind::Pwlr { epsilon: 1e-6 },
        AlgorithmKind::Pwlb { epsilon: 1e-6 },
        AlgorithmKind::Palr { epsilon: 1e-6 },
        AlgorithmKind::Pwgbk { k: 5 },
        AlgorithmKind::Pwgrk { k: 5 },
    ];
    for kind in kinds {
        for seed in 0..20 {
            let rep = run(&ChannelAlgorithm::new(kind), &net, &x, &sup, Loss::Squared, seed).unwrap();
            let norm: f64 = rep.step_unit_vector.iter().map(|u| u * u).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "{kind:?}");
            assert!(rep.r <= 64.0, "{kind:?}");
            assert_eq!(rep.w, 36);
        }
    }
}

#[test]
fn global_binary_feedback_never_increases_error() {
    let net = random_net(&[6, 6, 2], 4, TransferFunction::linear());
    let (x, t) = example(6, 2, 4, false);
    let sup = Supervision::top(&net, t);
    let strict = ChannelAlgorithm {
        reverse_on_failure: false,
        ..ChannelAlgorithm::new(AlgorithmKind::Pwgb)
    };
    let flip = ChannelAlgorithm::new(AlgorithmKind::Pwgb);
    for seed in 0..1000 {
        let a = run(&strict, &net, &x, &sup, Loss::Squared, seed).unwrap();
        assert!(a.error_after <= a.error_before);
        // Reversal is a first-order guess: allow the second-order remainder.
        let b = run(&flip, &net, &x, &sup, Loss::Squared, seed).unwrap();
        assert!(b.error_after <= b.error_before + 10.0 * 1e-8);
    }
}

#[test]
fn local_binary_improvement_matches_expectation() {
    let (net, x, sup) = probe_net(15, 8).unwrap();
    let alg = ChannelAlgorithm::new(AlgorithmKind::Pwlb { epsilon: 1e-6 });
    let first = run(&alg, &net, &x, &sup, Loss::Squared, 0).unwrap();
    let expected = first.o_theory.unwrap();
    let trials = 10_000;
    let mean = (0..trials)
        .map(|s| run(&alg, &net, &x, &sup, Loss::Squared, s).unwrap().o_emp.unwrap())
        .sum::<f64>()
        / trials as f64;
    assert!((mean / expected - 1.0).abs() <= 0.10, "{mean} vs {expected}");
}

fn ratio(h: usize) -> (f64, u64) {
    let (net, x, sup) = probe_net(h, 1).unwrap();
    let bp = run(&ChannelAlgorithm::new(AlgorithmKind::Bp), &net, &x, &sup, Loss::Squared, 0).unwrap();
    let lr = run(&ChannelAlgorithm::new(AlgorithmKind::Pwlr { epsilon: 1e-6 }), &net, &x, &sup, Loss::Squared, 0).unwrap();
    (lr.ops as f64 / bp.ops as f64, bp.ops)
}

#[test]
fn operation_counts_scale_with_the_weights() {
    let (r1, b1) = ratio(15);
    let (r2, b2) = ratio(31);
    // W goes from 256 to 1024.
    assert!((b2 as f64 / b1 as f64 / 4.0 - 1.0).abs() <= 0.10, "{b1} {b2}");
    assert!((r2 / r1 / 4.0 - 1.0).abs() <= 0.20, "{r1} {r2}");
}

#[test]
fn unfolded_three_unit_net_has_six_parameters() {
    let rec = vec![vec![0.0, 0.4, -0.3], vec![0.2, 0.0, 0.5], vec![-0.6, 0.1, 0.0]];
    let net = unfold(&rec, 4, TransferFunction::tanh()).unwrap();
    assert_eq!(net.free_parameters(), 6);
    let x = [0.5, -0.2, 0.9];
    let sup = Supervision {
        targets: vec![(2, vec![0.1, 0.2, -0.3]), (4, vec![-0.5, 0.0, 0.4])],
    };
    let b = backprop(&net, &x, &sup, Loss::Squared).unwrap();
    let g = param_gradient(&net, &b.gradient);
    assert_eq!(g.len(), 6);
    let fd = finite_difference_gradient(&net, &x, &sup, Loss::Squared, 1e-5, FdScheme::Central, &mut Default::default()).unwrap();
    assert!(max_relative_error(&g, &fd) <= 1e-5);
    // Backprop through time: the shared gradient is the sum over the copies.
    let acts = net.forward(&x).unwrap();
    let per_copy: f64 = (0..4).map(|l| b.deltas[l][0] * acts[l][1]).sum();
    assert!((g[0] - per_copy).abs() < 1e-12);
}

#[test]
fn unfold_rejects_self_connections() {
    assert!(unfold(&[vec![1.0]], 2, TransferFunction::tanh()).is_err());
}

#[test]
fn local_target_equals_backpropagated_error() {
    let net = random_net(&[4, 5, 3, 2], 6, TransferFunction::logistic());
    let (x, t) = example(4, 2, 6, true);
    let b = backprop_gradient(&net, &x, &t, Loss::Squared).unwrap();
    let acts = net.forward(&x).unwrap();
    let eta = 0.05;
    for l in 1..=3 {
        for i in 0..net.layer_sizes[l] {
            for j in 0..net.layer_sizes[l - 1] {
                let pre = acts[l - 1][j];
                if pre.abs() < 1e-3 {
                    continue;
                }
                // Gradient descent step on weight (i, j), read as a local rule.
                let f = -eta * b.deltas[l - 1][i] * pre;
                let target = rule_to_target(f, acts[l][i], pre, eta).unwrap();
                assert!((target - acts[l][i] + b.deltas[l - 1][i]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn global_rules_scale_as_predicted() {
    let alg = ChannelAlgorithm::new(AlgorithmKind::Pwgb);
    let s = scaling_study(&alg, &Sweep::Width { hidden: vec![7, 15, 31] }, Fit::LogLog, 2000, 1).unwrap();
    assert!((s.fit.slope + 0.5).abs() <= 0.1, "{:?}", s.fit);
    let alg = ChannelAlgorithm::new(AlgorithmKind::Pwgrk { k: 1 });
    let s = scaling_study(&alg, &Sweep::Repeats { k: vec![4, 16, 64], hidden: 31 }, Fit::LogLog, 300, 2).unwrap();
    assert!((s.fit.slope - 0.5).abs() <= 0.1, "{:?}", s.fit);
    let alg = ChannelAlgorithm::new(AlgorithmKind::Pwgbk { k: 1 });
    let s = scaling_study(&alg, &Sweep::Repeats { k: vec![2, 4, 8, 16, 32, 64], hidden: 15 }, Fit::SqrtLog, 500, 3).unwrap();
    assert!(s.fit.r2 >= 0.9, "{:?}", s.fit);
    assert_eq!(s.trials_csv().lines().next(), Some("alg,W,N,K,trial,O_emp,ops,bits"));
}

#[test]
fn backprop_is_optimal_over_the_grid() {
    let ws = [1e2, 1e3, 1e4, 1e5, 1e6];
    let ns = [10.0, 100.0, 1000.0];
    let ks = [1.0, 10.0, 100.0, 1000.0];
    let ds = [16.0, 32.0, 64.0];
    assert!(optimality_violations(&ws, &ns, &ks, &ds).unwrap().is_empty());
}

#[test]
fn bad_arguments_are_rejected() {
    let (net, x, sup) = probe_net(3, 0).unwrap();
    assert!(run(&ChannelAlgorithm::new(AlgorithmKind::Pwgbk { k: 0 }), &net, &x, &sup, Loss::Squared, 0).is_err());
    assert!(run(&ChannelAlgorithm::new(AlgorithmKind::Pwlr { epsilon: 0.0 }), &net, &x, &sup, Loss::Squared, 0).is_err());
    assert!(table8(&Table8Params::new(0.0, 1.0, 1.0, 1.0)).is_err());
    let bad = Supervision::top(&net, vec![1.0, 2.0]);
    assert!(backprop(&net, &x, &bad, Loss::Squared).is_err());
}

proptest! {
    #[test]
    fn binary_feedback_on_threshold_nets_runs_without_gradient(seed in 0u64..200) {
        let mut net = LayeredNet::uniform_transfer(vec![3, 2, 1], TransferFunction::threshold11()).unwrap();
        net.init_normal(1.0, &mut seeded(seed));
        let sup = Supervision::top(&net, vec![1.0]);
        let rep = run(&ChannelAlgorithm::new(AlgorithmKind::Pwgb), &net, &[1.0, -1.0, 1.0], &sup, Loss::Squared, seed).unwrap();
        prop_assert!(rep.o_emp.is_none());
        prop_assert!(backprop(&net, &[1.0, -1.0, 1.0], &sup, Loss::Squared).is_err());
    }

    #[test]
    fn table_rates_never_beat_backprop(w in 1.0f64..1e7, n in 1.0f64..1e4, k in 1.0f64..1e4, d in 1.0f64..128.0) {
        let rows = table8(&Table8Params::new(w, n.min(w), k, d)).unwrap();
        for r in &rows {
            prop_assert!(r.o <= 1.0);
            prop_assert!(r.r <= d * (1.0 + 1e-12));
        }
    }
}

#[test]
fn global_binary_constant_transfers_across_sizes() {
    let alg = ChannelAlgorithm::new(AlgorithmKind::Pwgb);
    let mean_abs = |h: usize| {
        let (net, x, sup) = probe_net(h, 12).unwrap();
        (0..10_000)
            .map(|s| run(&alg, &net, &x, &sup, Loss::Squared, s).unwrap().o_emp.unwrap().abs())
            .sum::<f64>()
            / 10_000.0
    };
    // W = 25 and W = 100.
    let c = mean_abs(4) * 5.0;
    let at_100 = mean_abs(9);
    assert!((at_100 / (c / 10.0) - 1.0).abs() <= 0.20, "{at_100} vs {}", c / 10.0);
}
