use locallearn::hopfield::*;
use locallearn::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

fn random_memory(n: usize, r: &mut locallearn::rng::Rng) -> Vec<i8> {
    (0..n).map(|_| if r.random_bool(0.5) { 1 } else { -1 }).collect()
}

#[test]
fn single_memory_weights_and_energy() {
    let m = vec![1, -1, 1, 1, -1];
    let net = store(std::slice::from_ref(&m)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let expect = if i == j { 0 } else { (m[i] * m[j]) as i64 };
            assert_eq!(net.w(i, j), expect);
        }
    }
    assert_eq!(net.energy_of(&m).unwrap(), -10);
    let neg: Vec<i8> = m.iter().map(|v| -v).collect();
    let doubled = store(&[m.clone(), neg.clone()]).unwrap();
    assert!(doubled.weights.iter().zip(&net.weights).all(|(a, b)| *a == 2 * b));

    let o = orientation(&net).unwrap();
    assert!(o.is_sink(to_state(&m).unwrap()));
    assert!(o.is_sink(to_state(&neg).unwrap()));
    assert!(o.is_acyclic());
}

#[test]
fn zero_weights_tie_everywhere() {
    let net = HopfieldNet::zeros(6);
    let o = orientation(&net).unwrap();
    assert!(o.all_tie());
    assert_eq!(o.edge_count(), 6 * 32);
    assert!((0..64).all(|x| net.energy(x) == 0));
}

#[test]
fn bad_memories_and_caps() {
    assert!(store(&[vec![1, 0, -1]]).is_err());
    assert!(store(&[vec![1, 1], vec![1]]).is_err());
    assert!(orientation(&HopfieldNet::zeros(15)).is_err());
    assert!(orientation(&HopfieldNet::zeros(9)).unwrap().to_csv().is_err());
}

#[test]
fn storage_conjugates_under_isometries() {
    let mut r = seeded(4);
    for _ in 0..100 {
        let n = r.random_range(2..=8);
        let mems: Vec<Vec<i8>> = (0..r.random_range(1..5)).map(|_| random_memory(n, &mut r)).collect();
        let h = Isometry::random(n, &mut r);
        let moved: Vec<Vec<i8>> = mems.iter().map(|m| h.apply_vec(m).unwrap()).collect();
        let a = store(&mems).unwrap();
        let b = store(&moved).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s = (h.sign_flips[i] * h.sign_flips[j]) as i64;
                assert_eq!(b.w(h.permutation[i], h.permutation[j]), s * a.w(i, j));
            }
        }
    }
}

#[test]
fn hebb_commutes_on_random_pairs_up_to_eight() {
    let mut r = seeded(8);
    for _ in 0..1000 {
        let n = r.random_range(2..=8);
        let mems: Vec<Vec<i8>> = (0..r.random_range(1..6)).map(|_| random_memory(n, &mut r)).collect();
        let h = Isometry::random(n, &mut r);
        assert!(commutes(&mems, &h, RuleCoeffs::HEBB).unwrap());
        assert!(commutes(&mems, &Isometry::identity(n), RuleCoeffs::new(1, 1, 0)).unwrap());
    }
    assert_eq!(random_commutation_violations(8, RuleCoeffs::HEBB, 1000, 6, 1).unwrap(), 0);
}

#[test]
fn hebb_commutes_exhaustively_at_four() {
    let cfg = SearchConfig {
        exhaust: true,
        ..SearchConfig::default()
    };
    let out = uniqueness_search(4, RuleCoeffs::HEBB, &cfg).unwrap();
    assert!(out.exhaustive);
    assert_eq!(out.checked, 65535 * 384);
    assert!(out.counterexample.is_none());
}

#[test]
fn other_symmetric_rules_break_commutation() {
    for rule in [RuleCoeffs::new(1, 1, 0), RuleCoeffs::new(1, 0, 1)] {
        let out = uniqueness_search(4, rule, &SearchConfig::default()).unwrap();
        let ce = out.counterexample.expect("violation");
        assert!(!commutes(&ce.memories, &ce.isometry, rule).unwrap());
    }
    let constant = uniqueness_search(3, RuleCoeffs::new(0, 0, 1), &SearchConfig::default()).unwrap();
    assert!(constant.counterexample.is_some() || constant.all_tie_sets > 0);
}

#[test]
fn random_search_above_the_cap() {
    let cfg = SearchConfig {
        trials: 200,
        ..SearchConfig::default()
    };
    let out = uniqueness_search(6, RuleCoeffs::HEBB, &cfg).unwrap();
    assert!(!out.exhaustive && out.counterexample.is_none());
    assert_eq!(out.checked, 200);
    assert!(uniqueness_search(6, RuleCoeffs::new(1, 1, 0), &cfg).unwrap().counterexample.is_some());
}

#[test]
fn generators_build_every_isometry() {
    use Generator::*;
    let h = Isometry::from_generators(3, &[Swap(0, 1), Flip(0), Swap(1, 2)]).unwrap();
    // Unit 0 moves to 1 and then to 2; the flip hits whatever sits at 0.
    assert_eq!(h.permutation, vec![2, 0, 1]);
    assert_eq!(h.sign_flips, vec![1, -1, 1]);
    assert!(Isometry::from_generators(3, &[Flip(3)]).is_err());
    assert!(Isometry::new(vec![0, 0], vec![1, 1]).is_err());
}

#[test]
fn dynamics_stop_at_terminal_states() {
    let mut r = seeded(2);
    for _ in 0..50 {
        let n = r.random_range(3..=10);
        let mems: Vec<Vec<i8>> = (0..3).map(|_| random_memory(n, &mut r)).collect();
        let net = store(&mems).unwrap();
        let o = orientation(&net).unwrap();
        assert!(o.is_acyclic());
        let start = r.random_range(0..1u32 << n);
        let end = net.descend(start, &mut r);
        assert!(o.is_terminal(end));
        assert!(net.energy(end) <= net.energy(start));
    }
}

#[test]
fn edge_list_csv() {
    let net = store(&[vec![1, 1]]).unwrap();
    let csv = orientation(&net).unwrap().to_csv().unwrap();
    assert_eq!(csv, "state_a,state_b,orientation\n--,+-,b_to_a\n--,-+,b_to_a\n+-,++,a_to_b\n-+,++,a_to_b\n");
}

proptest! {
    #[test]
    fn isometries_preserve_hamming_distance(seed in 0u64..10_000, n in 1usize..16) {
        let mut r = seeded(seed);
        let h = Isometry::random(n, &mut r);
        let x = r.random_range(0..1u32 << n);
        let y = r.random_range(0..1u32 << n);
        prop_assert_eq!((h.apply(x) ^ h.apply(y)).count_ones(), (x ^ y).count_ones());
    }

    #[test]
    fn energy_is_even_in_the_state(seed in 0u64..10_000, n in 2usize..12) {
        let mut r = seeded(seed);
        let mems: Vec<Vec<i8>> = (0..3).map(|_| random_memory(n, &mut r)).collect();
        let net = store(&mems).unwrap();
        let x = r.random_range(0..1u32 << n);
        prop_assert_eq!(net.energy(x), net.energy(!x & ((1 << n) - 1)));
    }
}
