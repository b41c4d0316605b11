use locallearn::moments::*;
use locallearn::netsim::data::{generate, GeneratorSpec, LinearTeacher, TrainingSet};
use locallearn::netsim::transfer::{logistic, TransferKind};
use locallearn::reproduce::{compare_dynamics, dynamics_data, linear_catalog_rules, DYNAMICS_RELATIVE_TOLERANCE};
use locallearn::rng::seeded;
use locallearn::rules::{self, PostMode, RuleTerm};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn gaussian(m: usize, seed: u64) -> TrainingSet {
    generate(
        &GeneratorSpec::Gaussian {
            n: 3,
            m,
            mean: vec![0.5, -0.2, 1.0],
            cov: vec![vec![1.0, 0.3, 0.0], vec![0.3, 0.5, 0.1], vec![0.0, 0.1, 0.8]],
            teacher: Some(LinearTeacher {
                weights: vec![1.0, -0.5, 0.25],
                bias: 0.1,
                noise: 0.3,
            }),
        },
        seed,
    )
    .unwrap()
}

/// Every monomial the tables cover, by `(mode, nT, nPost, nPre, nW)`.
fn table_terms() -> Vec<RuleTerm> {
    use PostMode::*;
    let mut out = Vec::new();
    for nw in 0..=2 {
        for (mode, nt, np, ni) in [
            (Output, 0, 0, 0),
            (Output, 0, 0, 1),
            (Output, 0, 0, 2),
            (Output, 0, 1, 0),
            (Output, 0, 1, 1),
            (Output, 0, 2, 0),
            (Target, 0, 1, 0),
            (Target, 0, 1, 1),
            (Output, 1, 1, 0),
            (Target, 0, 2, 0),
            (Error, 0, 1, 1),
            (Error, 0, 2, 0),
            (Target, 0, 2, 2),
        ] {
            out.push(RuleTerm::new(1.0, mode, np, ni, nw).with_target(nt));
        }
    }
    out
}

#[test]
fn table_rows_match_monte_carlo() {
    let model = compute_moments(&gaussian(100_000, 1)).unwrap();
    let fresh = gaussian(100_000, 2);
    let w = [0.4, -0.7, 0.3];
    for term in table_terms() {
        let predicted = term_expectation(&term, &model, &w).unwrap();
        for i in 0..3 {
            let samples: Vec<f64> = fresh
                .inputs
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let o: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
                    term.evaluate(o, x[i], w[i], fresh.scalar_target(k)).unwrap()
                })
                .collect();
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            // Both sides are sample estimates, so the spread doubles.
            let se = (2.0 * var / n).sqrt();
            assert!(
                (mean - predicted[i]).abs() <= 3.0 * se + 1e-9 * predicted[i].abs().max(1.0),
                "{term:?} weight {i}: {mean} vs {}",
                predicted[i]
            );
        }
    }
}

#[test]
fn third_order_terms_are_rejected() {
    let m = compute_moments(&gaussian(100, 3)).unwrap();
    let to2 = RuleTerm::new(1.0, PostMode::Output, 2, 0, 0).with_target(1);
    let err = term_expectation(&to2, &m, &[0.1, 0.2, 0.3]).unwrap_err();
    assert!(err.to_string().contains("higher-order moments required"));
    let o2i = RuleTerm::new(1.0, PostMode::Output, 2, 1, 1);
    assert!(term_expectation(&o2i, &m, &[0.1, 0.2, 0.3]).is_err());
}

#[test]
fn sample_moment_invariants() {
    let m = compute_moments(&gaussian(2000, 4)).unwrap();
    let s = m.sigma_ii_matrix();
    assert_eq!(s, s.transpose());
    let eig = m.covariance().symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12));
    assert!(m.m2_t >= m.mu_t * m.mu_t);
    assert_eq!(m.n_samples, 2000);
}

#[test]
fn linear_rules_follow_their_recurrence() {
    let data = dynamics_data(10, 500, 77);
    let data = data.unwrap();
    for rule in linear_catalog_rules().unwrap() {
        let cmp = compare_dynamics(&rule, &data, 1e-3, 50, 77).unwrap();
        assert!(
            cmp.max_relative_error <= DYNAMICS_RELATIVE_TOLERANCE,
            "{}: {}",
            cmp.rule,
            cmp.max_relative_error
        );
    }
}

#[test]
fn hebb_recurrence_is_identity_plus_sigma() {
    let m = compute_moments(&gaussian(50, 5)).unwrap();
    let Recurrence::Linear(spec) = rule_recurrence(&rules::simple_hebb(), &m, 0.01, &[0.0; 3]).unwrap() else {
        panic!("linear");
    };
    let expect = DMatrix::identity(3, 3) + m.sigma_ii_matrix() * 0.01;
    assert!((spec.a - expect).amax() < 1e-15);
    let Recurrence::Linear(spec) = rule_recurrence(&rules::clamped_hebb(), &m, 0.01, &[0.0; 3]).unwrap() else {
        panic!("linear");
    };
    assert_eq!(spec.a, DMatrix::identity(3, 3));
    for i in 0..3 {
        assert!((spec.b[i] - 0.01 * m.sigma_it[i]).abs() < 1e-15);
    }
}

#[test]
fn dropout_bound_holds_for_gaussian_sums() {
    let mut r = seeded(6);
    let d = Normal::new(1.0, 0.5).unwrap();
    let n = 1_000_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..n {
        let v = logistic(d.sample(&mut r));
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let m = DataMoments {
        mu: vec![1.0],
        sigma_ii: vec![vec![1.25]],
        sigma_it: vec![0.0],
        mu_t: 0.0,
        m2_t: 0.0,
        m2_t_ii: vec![0.0],
        n_samples: 1,
    };
    let (est, bound) = dropout_mean(&m, &[1.0], TransferKind::Logistic01).unwrap();
    assert_eq!(est, logistic(1.0));
    assert!((mean - est).abs() <= bound + 3.0 * se, "{mean} vs {est} bound {bound}");
}

proptest! {
    #[test]
    fn eigen_path_matches_iteration(seed in 0u64..1000, n in 1usize..6, k in 0u64..=200) {
        let mut r = seeded(seed);
        let raw: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let sym = (&raw + raw.transpose()) * 0.5;
        let radius = sym.symmetric_eigenvalues().amax().max(1e-9);
        let a = sym * (r.random_range(0.1..1.05) / radius);
        let spec = RecurrenceSpec {
            a,
            b: DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0)),
            w0: DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0)),
        };
        let e = solve_recurrence(&spec, k);
        let it = iterate_recurrence(&spec, k);
        prop_assert!((&e - &it).amax() <= 1e-9 * it.amax().max(1.0));
    }

    #[test]
    fn riccati_solves_its_ode(eta in 0.01f64..1.0, mu in -2.0f64..2.0, w0 in -0.99f64..0.99, t in 0.0f64..10.0) {
        let h = 1e-5;
        let d = (riccati_solution(eta, mu, w0, t + h) - riccati_solution(eta, mu, w0, t - h)) / (2.0 * h);
        let w = riccati_solution(eta, mu, w0, t);
        prop_assert!((d - eta * mu * (1.0 - w * w)).abs() <= 1e-8 * (1.0 + d.abs()));
    }
}
