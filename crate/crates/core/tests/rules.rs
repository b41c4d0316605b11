use locallearn::rules::*;
use proptest::prelude::*;
use PostMode::{Error as Err_, Output, Target};

fn mode(k: u8) -> PostMode {
    [Output, Target, Err_][k as usize % 3]
}

fn arb_term() -> impl Strategy<Value = RuleTerm> {
    (-3.0f64..3.0, 0u8..3, 0u32..2, 0u32..3, 0u32..2, 0u32..1)
        .prop_map(|(c, m, nt, np, ni, nw)| RuleTerm::new(c, mode(m), np, ni, nw).with_target(nt))
}

#[test]
fn spec_updates() {
    assert_eq!(evaluate_update(&simple_hebb(), 1.0, -1.0, 0.3, None, 1.0).unwrap(), -1.0);
    assert_eq!(evaluate_update(&oja(), 2.0, 1.0, 0.5, None, 1.0).unwrap(), 0.0);
    let g = evaluate_update(&gradient(), 0.25, 2.0, 0.0, Some(1.0), 0.1).unwrap();
    assert!((g - 0.15).abs() < 1e-15);
    assert!(evaluate_update(&clamped_hebb(), 0.0, 1.0, 0.0, None, 1.0).is_err());
}

#[test]
fn named_degree_labels() {
    let labels = [
        (simple_hebb(), 2, 1),
        (oja(), 3, 3),
        (bounded_hebb(1.0), 4, 3),
        (clamped_hebb(), 2, 0),
        (gradient(), 2, 1),
        (riccati(), 3, 2),
    ];
    for (rule, n, d) in labels {
        let got = classify_degrees(&rule).unwrap();
        assert_eq!((got.n, got.d), (n, d), "{}", rule.name);
    }
}

#[test]
fn catalog_survives_json_and_lookup() {
    for rule in catalog() {
        let back = LearningRule::from_json(&rule.to_json().unwrap()).unwrap();
        assert_eq!(back, rule);
        assert_eq!(lookup(&rule.name).unwrap(), rule);
        let d = classify_degrees(&rule).unwrap();
        assert!(d.d <= d.n && d.n <= 5, "{}", rule.name);
    }
}

#[test]
fn hebb_moves_under_range_change() {
    let out = range_transform(QuadraticCoefficients::new(1.0, 0.0, 0.0, 0.0), RangeConvention::ZeroOne);
    assert_eq!(out.as_array(), [4.0, -2.0, -2.0, 1.0]);
    for b in range_fixed_points() {
        assert_eq!(range_transform(b, RangeConvention::ZeroOne), b);
    }
}

proptest! {
    #[test]
    fn update_is_homogeneous_in_eta(
        terms in prop::collection::vec(arb_term(), 1..5),
        o in -2.0f64..2.0, i in -2.0f64..2.0, w in -2.0f64..2.0, t in -2.0f64..2.0, eta in 1e-4f64..10.0,
    ) {
        let rule = LearningRule::new("r", terms).unwrap();
        let a = evaluate_update(&rule, o, i, w, Some(t), eta).unwrap();
        let b = evaluate_update(&rule, o, i, w, Some(t), 2.0 * eta).unwrap();
        prop_assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn merging_like_terms_keeps_the_update(
        terms in prop::collection::vec(arb_term(), 1..6),
        o in -2.0f64..2.0, i in -2.0f64..2.0, w in -2.0f64..2.0, t in -2.0f64..2.0,
    ) {
        let mut doubled = terms.clone();
        doubled.extend(terms.iter().map(|x| RuleTerm { coefficient: -0.5 * x.coefficient, ..*x }));
        let rule = LearningRule::new("r", doubled).unwrap();
        let raw = evaluate_update(&rule, o, i, w, Some(t), 1.0).unwrap();
        let merged = evaluate_update(&rule.normalized(), o, i, w, Some(t), 1.0).unwrap();
        prop_assert!((raw - merged).abs() <= 1e-9 * (1.0 + raw.abs()));
    }

    #[test]
    fn range_transform_round_trips(v in prop::array::uniform4(-100.0f64..100.0)) {
        let q = QuadraticCoefficients::from_array(v);
        for from in [RangeConvention::ZeroOne, RangeConvention::MinusOneOne] {
            let back = range_transform(range_transform(q, from), from.other());
            for (a, b) in back.as_array().iter().zip(v) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn range_transform_is_linear(
        a in prop::array::uniform4(-10.0f64..10.0),
        b in prop::array::uniform4(-10.0f64..10.0),
        s in -5.0f64..5.0,
    ) {
        let f = |v: [f64; 4]| range_transform(QuadraticCoefficients::from_array(v), RangeConvention::ZeroOne).as_array();
        let mut mix = [0.0; 4];
        for k in 0..4 {
            mix[k] = a[k] + s * b[k];
        }
        let (fa, fb, fm) = (f(a), f(b), f(mix));
        for k in 0..4 {
            prop_assert!((fm[k] - fa[k] - s * fb[k]).abs() <= 1e-9);
        }
    }
}
