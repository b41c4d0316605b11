//! Expected epoch updates of polynomial rules on a linear unit, computed from
//! first- and second-order data moments, and closed-form trajectories.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::data::TrainingSet;
use crate::netsim::transfer::{logistic, TransferKind};
use crate::rules::{LearningRule, PostMode, RuleTerm};

/// Sample moments of a training set, divided by `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMoments {
    pub mu: Vec<f64>,
    pub sigma_ii: Vec<Vec<f64>>,
    pub sigma_it: Vec<f64>,
    pub mu_t: f64,
    pub m2_t: f64,
    /// `E(T^2 I_i^2)`, the one fourth-order moment a clamped decay needs.
    #[serde(default)]
    pub m2_t_ii: Vec<f64>,
    pub n_samples: usize,
}

impl DataMoments {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma_ii_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.sigma_ii[i][j])
    }

    /// Centred variance of input `i`.
    pub fn variance(&self, i: usize) -> f64 {
        self.sigma_ii[i][i] - self.mu[i] * self.mu[i]
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.sigma_ii[i][j] - self.mu[i] * self.mu[j])
    }
}

/// Moments over all examples; the target is the first target component and
/// its moments are zero when the set has no targets.
pub fn compute_moments(data: &TrainingSet) -> Result<DataMoments> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.input_dim();
    let m = data.len();
    let mut mu = vec![0.0; n];
    let mut sigma_ii = vec![vec![0.0; n]; n];
    let mut sigma_it = vec![0.0; n];
    let mut m2_t_ii = vec![0.0; n];
    let (mut mu_t, mut m2_t) = (0.0, 0.0);
    for (k, x) in data.inputs.iter().enumerate() {
        let t = data.scalar_target(k).unwrap_or(0.0);
        mu_t += t;
        m2_t += t * t;
        for i in 0..n {
            mu[i] += x[i];
            sigma_it[i] += x[i] * t;
            m2_t_ii[i] += (x[i] * t).powi(2);
            for j in i..n {
                sigma_ii[i][j] += x[i] * x[j];
            }
        }
    }
    let inv = 1.0 / m as f64;
    for i in 0..n {
        mu[i] *= inv;
        sigma_it[i] *= inv;
        m2_t_ii[i] *= inv;
        for j in i..n {
            sigma_ii[i][j] *= inv;
            sigma_ii[j][i] = sigma_ii[i][j];
        }
    }
    Ok(DataMoments {
        mu,
        sigma_ii,
        sigma_it,
        mu_t: mu_t * inv,
        m2_t: m2_t * inv,
        m2_t_ii,
        n_samples: m,
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E(T^a O^b I_i^c)` for every `i`, with `O = w.I`; needs `a + b + c <= 2`
/// apart from `E(T^2 I_i^2)`.
fn base_expectation(a: u32, b: u32, c: u32, m: &DataMoments, w: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    let sw = |i: usize| -> f64 { (0..n).map(|j| m.sigma_ii[i][j] * w[j]).sum() };
    let v = match (a, b, c) {
        (0, 0, 0) => vec![1.0; n],
        (0, 0, 1) => m.mu.clone(),
        (0, 0, 2) => (0..n).map(|i| m.sigma_ii[i][i]).collect(),
        (0, 1, 0) => vec![dot(w, &m.mu); n],
        (0, 1, 1) => (0..n).map(sw).collect(),
        (0, 2, 0) => {
            let q: f64 = (0..n).map(|i| w[i] * sw(i)).sum();
            vec![q; n]
        }
        (1, 0, 0) => vec![m.mu_t; n],
        (1, 0, 1) => m.sigma_it.clone(),
        (1, 1, 0) => vec![dot(w, &m.sigma_it); n],
        (2, 0, 0) => vec![m.m2_t; n],
        (2, 0, 2) if m.m2_t_ii.len() == n => m.m2_t_ii.clone(),
        _ => {
            return Err(Error::HigherOrderMoments(format!(
                "E(T^{a} O^{b} I^{c}) needs moments of order {}",
                a + b + c
            )))
        }
    };
    Ok(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expected update of one monomial on a linear unit, per weight.
pub fn term_expectation(term: &RuleTerm, moments: &DataMoments, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != moments.dim() {
        return Err(Error::DimensionMismatch {
            expected: moments.dim(),
            got: w.len(),
        });
    }
    // Expand the postsynaptic factor into T^a O^b pieces.
    let p = term.exp_post;
    let pieces: Vec<(f64, u32, u32)> = match term.post_mode {
        PostMode::Output => vec![(1.0, term.exp_target, p)],
        PostMode::Target => vec![(1.0, term.exp_target + p, 0)],
        PostMode::Error => (0..=p)
            .map(|k| {
                let sign = if (p - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                (sign * binomial(p, k), term.exp_target + k, p - k)
            })
            .collect(),
    };
    let n = moments.dim();
    let mut out = vec![0.0; n];
    for (coef, a, b) in pieces {
        let base = base_expectation(a, b, term.exp_pre, moments, w)?;
        for i in 0..n {
            out[i] += coef * base[i];
        }
    }
    for (o, wi) in out.iter_mut().zip(w) {
        *o *= term.coefficient * wi.powi(term.exp_weight as i32);
    }
    Ok(out)
}

/// Expected update `E(F)` of a whole rule (without the learning rate).
pub fn rule_expectation(rule: &LearningRule, moments: &DataMoments, w: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; moments.dim()];
    for term in rule.normalized_terms() {
        for (o, v) in out.iter_mut().zip(term_expectation(&term, moments, w)?) {
            *o += v;
        }
    }
    Ok(out)
}

/// `w(k + 1) = A w(k) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSpec {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub w0: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recurrence {
    Linear(RecurrenceSpec),
    /// Effective degree above one: no linear recurrence exists.
    Nonlinear { d: u32 },
}

/// Epoch recurrence of a rule with effective degree at most one.
pub fn rule_recurrence(rule: &LearningRule, moments: &DataMoments, eta: f64, w0: &[f64]) -> Result<Recurrence> {
    let degrees = rule.degrees()?;
    let n = moments.dim();
    if w0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w0.len(),
        });
    }
    // Reject unsupported terms before the degree routing so errors are uniform.
    let zero = vec![0.0; n];
    let b0 = rule_expectation(rule, moments, &zero)?;
    if degrees.d > 1 {
        return Ok(Recurrence::Nonlinear { d: degrees.d });
    }
    let mut a = DMatrix::identity(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = rule_expectation(rule, moments, &e)?;
        for i in 0..n {
            a[(i, j)] += eta * (col[i] - b0[i]);
        }
        e[j] = 0.0;
    }
    Ok(Recurrence::Linear(RecurrenceSpec {
        a,
        b: DVector::from_iterator(n, b0.iter().map(|v| eta * v)),
        w0: DVector::from_column_slice(w0),
    }))
}

/// `(lambda^k - 1) / (lambda - 1)`, equal to `k` at `lambda = 1`.
pub fn geometric_sum(lambda: f64, k: u64) -> f64 {
    let h = lambda - 1.0;
    if h == 0.0 {
        return k as f64;
    }
    if h.abs() < 1e-3 {
        // Cancellation-free form near one.
        return (k as f64 * h.ln_1p()).exp_m1() / h;
    }
    (pow_u64(lambda, k) - 1.0) / h
}

fn pow_u64(x: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        x.powi(k as i32)
    } else {
        x.powf(k as f64)
    }
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    let scale = a.amax().max(1.0);
    a.nrows() == a.ncols()
        && (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= 1e-12 * scale))
}

/// `w(k) = A^k w0 + (I + A + ... + A^{k-1}) b`, by eigendecomposition when
/// `A` is symmetric and by iteration otherwise.
pub fn solve_recurrence(spec: &RecurrenceSpec, k: u64) -> DVector<f64> {
    if is_symmetric(&spec.a) {
        let eig = spec.a.clone().symmetric_eigen();
        let q = &eig.eigenvectors;
        let w0 = q.transpose() * &spec.w0;
        let b = q.transpose() * &spec.b;
        let z = DVector::from_fn(w0.len(), |i, _| {
            let l = eig.eigenvalues[i];
            pow_u64(l, k) * w0[i] + geometric_sum(l, k) * b[i]
        });
        q * z
    } else {
        iterate_recurrence(spec, k)
    }
}

pub fn iterate_recurrence(spec: &RecurrenceSpec, k: u64) -> DVector<f64> {
    let mut w = spec.w0.clone();
    for _ in 0..k {
        w = &spec.a * w + &spec.b;
    }
    w
}

/// Solution of `dw/dt = eta mu (1 - w^2)` with `w(0) = w0`.
pub fn riccati_solution(eta: f64, mu: f64, w0: f64, t: f64) -> f64 {
    if w0 == -1.0 {
        return -1.0;
    }
    let c = (1.0 - w0) / (2.0 * (1.0 + w0));
    let e = 2.0 * c * (-2.0 * eta * mu * t).exp();
    if !e.is_finite() {
        return -1.0;
    }
    (1.0 - e) / (1.0 + e)
}

/// `E(f(S)) ~ f(E(S))` for a sigmoidal unit, with the bound `2E(1-E)|1-2E|`
/// on the logistic scale (doubled for tanh).
pub fn dropout_mean(moments: &DataMoments, w: &[f64], transfer: TransferKind) -> Result<(f64, f64)> {
    if w.len() != moments.dim() {
        return Err(Error::DimensionMismatch {
            expected: moments.dim(),
            got: w.len(),
        });
    }
    let s = dot(w, &moments.mu);
    let bound = |e: f64| 2.0 * e * (1.0 - e) * (1.0 - 2.0 * e).abs();
    match transfer {
        TransferKind::Logistic01 => {
            let e = logistic(s);
            Ok((e, bound(e)))
        }
        TransferKind::Tanh11 => {
            let e = logistic(2.0 * s);
            Ok((2.0 * e - 1.0, 2.0 * bound(e)))
        }
        other => Err(Error::InvalidArgument(format!("dropout approximation needs a sigmoid, got {other:?}"))),
    }
}

/// Small-weight estimate `E(O I_i) ~ f'(0) w_i var(I_i)` for centred data.
pub fn nonlinear_hebb_estimate(moments: &DataMoments, w: &[f64], transfer: TransferKind) -> Result<Vec<f64>> {
    let slope = match transfer {
        TransferKind::Logistic01 => 0.25,
        TransferKind::Tanh11 | TransferKind::Linear => 1.0,
        other => return Err(Error::InvalidArgument(format!("no derivative at zero for {other:?}"))),
    };
    Ok((0..moments.dim()).map(|i| slope * w[i] * moments.variance(i)).collect())
}

/// Predicted per-epoch weights for `epochs` epochs with per-epoch rate `eta`:
/// the closed-form recurrence when `d <= 1`, the Riccati solution for
/// `(1 - w^2) I`, otherwise an error.
pub fn predict(rule: &LearningRule, moments: &DataMoments, eta: f64, w0: &[f64], epochs: u64) -> Result<Vec<Vec<f64>>> {
    match rule_recurrence(rule, moments, eta, w0)? {
        Recurrence::Linear(spec) => Ok((0..=epochs)
            .map(|k| solve_recurrence(&spec, k).iter().copied().collect())
            .collect()),
        Recurrence::Nonlinear { d } => {
            if *rule == crate::rules::riccati() {
                Ok((0..=epochs)
                    .map(|k| {
                        (0..w0.len())
                            .map(|i| riccati_solution(eta, moments.mu[i], w0[i], k as f64))
                            .collect()
                    })
                    .collect())
            } else {
                Err(Error::InvalidArgument(format!(
                    "rule {} has effective degree {d}; no closed form",
                    rule.name
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::data::{generate, GeneratorSpec};
    use crate::rules::{self, RuleTerm};
    use PostMode::{Output, Target};

    fn two_point() -> DataMoments {
        let set = TrainingSet::with_scalar_targets(vec![vec![1.0, -1.0], vec![-1.0, 1.0]], vec![1.0, -1.0]).unwrap();
        compute_moments(&set).unwrap()
    }

    #[test]
    fn two_point_moments() {
        let m = two_point();
        assert_eq!(m.mu, vec![0.0, 0.0]);
        assert_eq!(m.sigma_ii, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(m.sigma_it, vec![1.0, -1.0]);
        assert_eq!(m.mu_t, 0.0);
        assert!(compute_moments(&TrainingSet::new(vec![], None).unwrap()).is_err());
    }

    #[test]
    fn constant_input_moments() {
        let set = TrainingSet::new(vec![vec![1.0; 3]; 4], None).unwrap();
        let m = compute_moments(&set).unwrap();
        assert!(m.sigma_ii.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn moments_match_double_loop() {
        let spec = GeneratorSpec::Gaussian {
            n: 4,
            m: 50,
            mean: vec![0.1, 0.2, -0.3, 1.0],
            cov: vec![
                vec![1.0, 0.3, 0.0, 0.0],
                vec![0.3, 2.0, 0.1, 0.0],
                vec![0.0, 0.1, 0.5, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
            teacher: Some(crate::netsim::data::LinearTeacher {
                weights: vec![1.0, -1.0, 0.5, 0.0],
                bias: 0.2,
                noise: 0.1,
            }),
        };
        let set = generate(&spec, 8).unwrap();
        let m = compute_moments(&set).unwrap();
        let len = set.len() as f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for x in &set.inputs {
                    s += x[i] * x[j];
                }
                assert!((s / len - m.sigma_ii[i][j]).abs() < 1e-12);
            }
            let s: f64 = set.inputs.iter().enumerate().map(|(k, x)| x[i] * set.scalar_target(k).unwrap()).sum();
            assert!((s / len - m.sigma_it[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn table_rows() {
        let m = two_point();
        let w = [0.5, 2.0];
        let io = term_expectation(&RuleTerm::new(1.0, Output, 1, 1, 0), &m, &w).unwrap();
        assert_eq!(io, vec![0.5 - 2.0, -0.5 + 2.0]);
        let wit = term_expectation(&RuleTerm::new(1.0, Target, 1, 1, 1), &m, &w).unwrap();
        assert_eq!(wit, vec![0.5, -2.0]);
        let o2 = term_expectation(&RuleTerm::new(1.0, Output, 2, 0, 0), &m, &w).unwrap();
        assert_eq!(o2, vec![2.25, 2.25]);
        let to2 = RuleTerm::new(1.0, Output, 2, 0, 0).with_target(1);
        assert!(matches!(term_expectation(&to2, &m, &w), Err(Error::HigherOrderMoments(_))));
        let zero = term_expectation(&RuleTerm::new(1.0, Output, 1, 1, 0), &m, &[0.0, 0.0]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn recurrence_forms() {
        let m = two_point();
        let eta = 0.1;
        let Recurrence::Linear(spec) = rule_recurrence(&rules::simple_hebb(), &m, eta, &[0.0, 0.0]).unwrap() else {
            panic!("hebb is linear");
        };
        let expected = DMatrix::identity(2, 2) + m.sigma_ii_matrix() * eta;
        assert!((spec.a - expected).amax() < 1e-15);
        assert_eq!(spec.b.amax(), 0.0);
        let Recurrence::Linear(spec) = rule_recurrence(&rules::clamped_hebb(), &m, eta, &[0.0, 0.0]).unwrap() else {
            panic!("clamped hebb is linear");
        };
        assert_eq!(spec.a, DMatrix::identity(2, 2));
        assert!((spec.b[0] - 0.1).abs() < 1e-15 && (spec.b[1] + 0.1).abs() < 1e-15);
        assert_eq!(
            rule_recurrence(&rules::oja(), &m, eta, &[0.0, 0.0]).unwrap(),
            Recurrence::Nonlinear { d: 3 }
        );
    }

    #[test]
    fn identity_recurrence_is_linear_in_k() {
        let spec = RecurrenceSpec {
            a: DMatrix::identity(3, 3),
            b: DVector::from_vec(vec![1.0, -2.0, 0.5]),
            w0: DVector::from_vec(vec![0.1, 0.2, 0.3]),
        };
        let w = solve_recurrence(&spec, 7);
        assert!((w - DVector::from_vec(vec![7.1, -13.8, 3.8])).amax() < 1e-12);
    }

    #[test]
    fn independent_inputs_grow_geometrically() {
        let sig = [0.5, 1.0, 2.0];
        let eta = 0.01;
        let a = DMatrix::from_diagonal(&DVector::from_iterator(3, sig.iter().map(|s| 1.0 + eta * s)));
        let spec = RecurrenceSpec {
            a,
            b: DVector::zeros(3),
            w0: DVector::from_vec(vec![1.0, -1.0, 0.5]),
        };
        let w = solve_recurrence(&spec, 50);
        for i in 0..3 {
            let exp = (1.0 + eta * sig[i]).powi(50) * spec.w0[i];
            assert!((w[i] - exp).abs() < 1e-12 * exp.abs());
        }
    }

    #[test]
    fn contracting_recurrence_converges() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let spec = RecurrenceSpec {
            a: a.clone(),
            b: b.clone(),
            w0: DVector::from_vec(vec![5.0, -5.0]),
        };
        let fixed = (DMatrix::identity(2, 2) - a).try_inverse().unwrap() * b;
        let w = solve_recurrence(&spec, 1000);
        let it = iterate_recurrence(&spec, 1000);
        assert!((&w - &fixed).amax() <= 1e-9 * fixed.amax());
        assert!((&w - &it).amax() <= 1e-9 * fixed.amax());
    }

    #[test]
    fn geometric_sum_is_stable_near_one() {
        assert_eq!(geometric_sum(1.0, 10), 10.0);
        let l: f64 = 1.0 + 1e-10;
        let exact = 10.0 + 45.0 * 1e-10;
        assert!((geometric_sum(l, 10) - exact).abs() < 1e-12);
        assert!((geometric_sum(2.0, 10) - 1023.0).abs() < 1e-9);
    }

    #[test]
    fn riccati_cases() {
        for &t in &[0.0, 0.5, 3.0] {
            assert_eq!(riccati_solution(0.1, 1.0, 1.0, t), 1.0);
            assert!((riccati_solution(1.0, 1.0, 0.0, t) - f64::tanh(t)).abs() < 1e-15);
            assert_eq!(riccati_solution(0.3, 2.0, -1.0, t), -1.0);
        }
        assert!((riccati_solution(0.1, 0.5, -0.9, 1e4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn riccati_satisfies_its_ode() {
        let (eta, mu, w0) = (0.2, 0.7, -0.4);
        for &t in &[0.0, 1.0, 4.0, 10.0] {
            let h = 1e-5;
            let d = (riccati_solution(eta, mu, w0, t + h) - riccati_solution(eta, mu, w0, t - h)) / (2.0 * h);
            let w = riccati_solution(eta, mu, w0, t);
            assert!((d - eta * mu * (1.0 - w * w)).abs() < 1e-8);
        }
    }

    #[test]
    fn dropout_identities() {
        let m = two_point();
        let (e, _) = dropout_mean(&m, &[0.0, 0.0], TransferKind::Logistic01).unwrap();
        assert_eq!(e, 0.5);
        let (e, _) = dropout_mean(&m, &[0.0, 0.0], TransferKind::Tanh11).unwrap();
        assert_eq!(e, 0.0);
        let mut mm = m.clone();
        mm.mu = vec![0.3, -0.8];
        let w = [1.2, 0.4];
        let (l, _) = dropout_mean(&mm, &[2.0 * w[0], 2.0 * w[1]], TransferKind::Logistic01).unwrap();
        let (t, _) = dropout_mean(&mm, &w, TransferKind::Tanh11).unwrap();
        assert_eq!(t, 2.0 * l - 1.0);
    }

    #[test]
    fn predict_routes_by_degree() {
        let m = two_point();
        assert!(predict(&rules::oja(), &m, 0.1, &[0.0, 0.0], 3).is_err());
        let r = predict(&rules::riccati(), &m, 0.1, &[0.0, 0.0], 3).unwrap();
        assert_eq!(r.len(), 4);
        let h = predict(&rules::clamped_hebb(), &m, 0.1, &[0.0, 0.0], 2).unwrap();
        assert!((h[2][0] - 0.2).abs() < 1e-12);
    }
}
