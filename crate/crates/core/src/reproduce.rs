//! Reproduction runs for the headline results, each reduced to a pass/fail
//! verdict with its measured numbers. The CLI and the acceptance tests both
//! call these.

use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::boolean::{self, LearnConfig};
use crate::channel::{self, AlgorithmKind, ChannelAlgorithm, FdScheme, Fit, Loss, Supervision, Sweep};
use crate::deep_targets::{self, AutoencoderConfig, DeepTargetsRun};
use crate::error::{Error, Result};
use crate::hopfield::{self, RuleCoeffs, SearchConfig};
use crate::moments;
use crate::netsim::data::{generate, GeneratorSpec, LinearTeacher, TrainingSet};
use crate::netsim::net::LayeredNet;
use crate::netsim::train::{train_unit, EtaSchedule, Trajectory, UnitTrainConfig, WeightInit};
use crate::netsim::transfer::TransferFunction;
use crate::rng::{self, derive_seed};
use crate::rules::{self, QuadraticCoefficients, RangeConvention, RuleTerm};
use crate::ssh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Quick,
    Full,
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Budget::Quick),
            "full" => Ok(Budget::Full),
            other => Err(Error::InvalidArgument(format!("unknown budget {other}; use quick or full"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Measured values against their expectations.
    pub detail: Vec<String>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {} ({:.1}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail.join("; ")
        )
    }
}

struct Checks {
    ok: bool,
    detail: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { ok: true, detail: Vec::new() }
    }

    fn check(&mut self, pass: bool, msg: impl Into<String>) {
        let msg = msg.into();
        self.ok &= pass;
        self.detail.push(if pass { msg } else { format!("FAILED {msg}") });
    }
}

fn timed(id: u8, name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    if let Err(e) = f(&mut c) {
        c.check(false, format!("error: {e}"));
    }
    CriterionResult {
        id,
        name: name.to_string(),
        passed: c.ok,
        detail: c.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub const CENSUS_SEED: u64 = 2024;

/// Restart budgets used for the census reproductions.
pub fn census_config() -> LearnConfig {
    LearnConfig {
        restarts: 16384,
        shallow_restarts: 4096,
        ..LearnConfig::default()
    }
}

pub fn table6() -> Result<Vec<boolean::CensusResult>> {
    let cfg = census_config();
    (2..=3).map(|n| boolean::census(n, false, &boolean::census_rules(), &cfg, CENSUS_SEED)).collect()
}

pub fn table7() -> Result<Vec<boolean::CensusResult>> {
    let cfg = census_config();
    (2..=4).map(|n| boolean::census(n, true, &boolean::census_rules(), &cfg, CENSUS_SEED)).collect()
}

fn census_checks(c: &mut Checks, results: &[boolean::CensusResult], expected: &[(usize, usize, usize)], monotone: bool) -> Result<()> {
    for (res, &(shallow, deep, total)) in results.iter().zip(expected) {
        let n = res.rows[0].fan_in;
        let separable = boolean::enumerate_functions(n, monotone)?
            .iter()
            .filter(|f| boolean::linearly_separable(f))
            .count();
        for row in &res.rows {
            c.check(
                (row.shallow_count, row.deep_count, row.total) == (shallow, deep, total),
                format!("n={n} {} {}/{}/{} want {shallow}/{deep}/{total}", row.rule_name, row.shallow_count, row.deep_count, row.total),
            );
            c.check(row.shallow_count == separable, format!("n={n} {} shallow equals {separable} separable", row.rule_name));
        }
    }
    Ok(())
}

pub fn criterion_1(_: Budget) -> CriterionResult {
    timed(1, "boolean census", |c| census_checks(c, &table6()?, &[(14, 16, 16), (104, 256, 256)], false))
}

pub fn criterion_2(_: Budget) -> CriterionResult {
    timed(2, "monotone census", |c| census_checks(c, &table7()?, &[(6, 6, 6), (20, 20, 20), (150, 168, 168)], true))
}

/// Formula columns of the rate/improvement table, in row order.
pub const TABLE8_FORMULAS: [[&str; 5]; 7] = [
    ["PWGB", "1/W", "1", "1/W", "C/sqrt(W)"],
    ["PWLR", "D", "W", "D/W", "1"],
    ["PWLB", "1", "W", "1/W", "(sqrt(3/W)/2) sum_i g_i"],
    ["PALR", "D", "N", "D/N", "1"],
    ["PWGBK", "log K/W", "K", "(log K/W)/K", "C sqrt(log K)/sqrt(W)"],
    ["PWGRK", "KD/W", "K", "D/W", "C sqrt(K)/sqrt(W)"],
    ["BP", "D", "1", "D", "1"],
];

pub const SLOPE_TOLERANCE: f64 = 0.1;
pub const SQRT_LOG_MIN_R2: f64 = 0.9;
pub const BP_IMPROVEMENT_TOLERANCE: f64 = 1e-12;
pub const PWLR_DIRECTION_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table8Reproduction {
    pub theory: Vec<channel::Table8Row>,
    pub pwgb: channel::ScalingResult,
    pub pwgrk: channel::ScalingResult,
    pub pwgbk: channel::ScalingResult,
    pub bp_improvement: f64,
    pub pwlr_gap: f64,
}

pub fn table8(budget: Budget, seed: u64) -> Result<Table8Reproduction> {
    let trials = match budget {
        Budget::Quick => 1000,
        Budget::Full => 10_000,
    };
    let theory = channel::table8(&channel::Table8Params::new(1024.0, 63.0, 16.0, 64.0))?;
    let pwgb = channel::scaling_study(
        &ChannelAlgorithm::new(AlgorithmKind::Pwgb),
        &Sweep::Width { hidden: vec![7, 15, 31] },
        Fit::LogLog,
        trials,
        derive_seed(seed, 1),
    )?;
    let pwgrk = channel::scaling_study(
        &ChannelAlgorithm::new(AlgorithmKind::Pwgrk { k: 1 }),
        &Sweep::Repeats { k: vec![4, 16, 64], hidden: 31 },
        Fit::LogLog,
        trials,
        derive_seed(seed, 2),
    )?;
    let pwgbk = channel::scaling_study(
        &ChannelAlgorithm::new(AlgorithmKind::Pwgbk { k: 1 }),
        &Sweep::Repeats { k: vec![2, 4, 8, 16, 32, 64], hidden: 15 },
        Fit::SqrtLog,
        trials,
        derive_seed(seed, 3),
    )?;
    let (net, x, sup) = channel::probe_net(15, derive_seed(seed, 4))?;
    let bp = channel::run(&ChannelAlgorithm::new(AlgorithmKind::Bp), &net, &x, &sup, Loss::Squared, seed)?;
    let lr = channel::run(&ChannelAlgorithm::new(AlgorithmKind::Pwlr { epsilon: 1e-6 }), &net, &x, &sup, Loss::Squared, seed)?;
    let pwlr_gap = bp
        .step_unit_vector
        .iter()
        .zip(&lr.step_unit_vector)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(Table8Reproduction {
        theory,
        pwgb,
        pwgrk,
        pwgbk,
        bp_improvement: bp.o_emp.unwrap_or(f64::NAN),
        pwlr_gap,
    })
}

pub fn criterion_3(budget: Budget) -> CriterionResult {
    timed(3, "rate/improvement table", |c| {
        let t = table8(budget, 8)?;
        for (row, want) in t.theory.iter().zip(TABLE8_FORMULAS.iter()) {
            let got = [
                row.algorithm.as_str(),
                row.information.as_str(),
                row.computation.as_str(),
                row.rate.as_str(),
                row.improvement.as_str(),
            ];
            c.check(got == *want, format!("{} formulas", want[0]));
        }
        c.check(t.theory.len() == 7, "seven rows");
        c.check(
            (t.pwgb.fit.slope + 0.5).abs() <= SLOPE_TOLERANCE,
            format!("PWGB slope {:.3} want -0.5", t.pwgb.fit.slope),
        );
        c.check(
            (t.pwgrk.fit.slope - 0.5).abs() <= SLOPE_TOLERANCE,
            format!("PWGRK slope {:.3} want +0.5", t.pwgrk.fit.slope),
        );
        c.check(
            t.pwgbk.fit.r2 >= SQRT_LOG_MIN_R2,
            format!("PWGBK R^2 {:.3} on sqrt(log K)", t.pwgbk.fit.r2),
        );
        c.check(
            (t.bp_improvement - 1.0).abs() <= BP_IMPROVEMENT_TOLERANCE,
            format!("BP O = {}", t.bp_improvement),
        );
        c.check(t.pwlr_gap <= PWLR_DIRECTION_TOLERANCE, format!("|u_PWLR - u_BP| = {:.2e}", t.pwlr_gap));
        Ok(())
    })
}

pub fn criterion_4(_: Budget) -> CriterionResult {
    timed(4, "backprop optimality", |c| {
        let ws = [1e2, 1e3, 1e4, 1e5, 1e6];
        let ns = [10.0, 100.0, 1000.0];
        let ks = [1.0, 10.0, 100.0, 1000.0];
        let ds = [16.0, 32.0, 64.0];
        let v = channel::optimality_violations(&ws, &ns, &ks, &ds)?;
        let points = ws.len() * ns.len() * ks.len() * ds.len();
        c.check(v.is_empty(), format!("{} violations over {points} grid points", v.len()));
        for line in v.iter().take(5) {
            c.check(false, line.clone());
        }
        Ok(())
    })
}

pub const DYNAMICS_RELATIVE_TOLERANCE: f64 = 0.05;
pub const RICCATI_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsComparison {
    pub rule: String,
    /// Largest `|dw_sim - dw_pred| / |dw_pred|` over epochs, `dw = w(k) - w(0)`.
    pub max_relative_error: f64,
    pub simulated: Vec<Vec<f64>>,
    pub predicted: Vec<Vec<f64>>,
}

/// Gaussian inputs with mean `0.1 (i + 1)` and covariance `0.8 I + 0.2`,
/// plus a noisy linear teacher.
pub fn dynamics_data(n: usize, m: usize, seed: u64) -> Result<TrainingSet> {
    let mut r = rng::seeded(derive_seed(seed, 0));
    let teacher = LinearTeacher {
        weights: (0..n).map(|_| r.random_range(-1.0..1.0)).collect(),
        bias: 0.0,
        noise: 0.1,
    };
    let cov = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.2 }).collect()).collect();
    generate(
        &GeneratorSpec::Gaussian {
            n,
            m,
            mean: (0..n).map(|i| 0.1 * (i + 1) as f64).collect(),
            cov,
            teacher: Some(teacher),
        },
        derive_seed(seed, 1),
    )
}

fn init_weights(n: usize, seed: u64) -> Vec<f64> {
    let d = Normal::new(0.0, 0.1).expect("valid");
    let mut r = rng::seeded(seed);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

/// Closed-form expectation dynamics against on-line simulation of a linear
/// unit with per-epoch rate `eta`.
pub fn compare_dynamics(rule: &rules::LearningRule, data: &TrainingSet, eta: f64, epochs: usize, seed: u64) -> Result<DynamicsComparison> {
    let n = data.input_dim();
    let w0 = init_weights(n, derive_seed(seed, 2));
    let m = moments::compute_moments(data)?;
    let predicted = moments::predict(rule, &m, eta, &w0, epochs as u64)?;
    let cfg = UnitTrainConfig {
        transfer: TransferFunction::linear(),
        eta: EtaSchedule::EpochAveraged { eta },
        epochs,
        seed: derive_seed(seed, 3),
        init: WeightInit::Given { weights: w0.clone() },
        shuffle: true,
    };
    let simulated: Vec<Vec<f64>> = train_unit(rule, data, &cfg)?.records.into_iter().map(|r| r.weights).collect();
    let mut worst: f64 = 0.0;
    for (s, p) in simulated.iter().zip(&predicted).skip(1) {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            num += (s[i] - p[i]).powi(2);
            den += (p[i] - w0[i]).powi(2);
        }
        worst = worst.max(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() });
    }
    Ok(DynamicsComparison {
        rule: rule.name.clone(),
        max_relative_error: worst,
        simulated,
        predicted,
    })
}

/// Catalog rules whose expected update is linear in the weights.
pub fn linear_catalog_rules() -> Result<Vec<rules::LearningRule>> {
    let mut out = Vec::new();
    for r in rules::catalog() {
        if rules::classify_degrees(&r)?.d <= 1 {
            out.push(r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiComparison {
    pub max_deviation: f64,
    pub simulated: Vec<Vec<f64>>,
    pub predicted: Vec<Vec<f64>>,
}

/// `(1 - w^2) I` on independent positive-mean inputs against the Riccati
/// solution, one weight per input.
pub fn riccati_comparison(eta: f64, epochs: usize, seed: u64) -> Result<RiccatiComparison> {
    let n = 5;
    let mut r = rng::seeded(seed);
    let inputs: Vec<Vec<f64>> = (0..500)
        .map(|_| (0..n).map(|i| 0.2 * (i + 1) as f64 + r.random_range(-0.5..0.5)).collect())
        .collect();
    let data = TrainingSet::new(inputs, None)?;
    let m = moments::compute_moments(&data)?;
    let w0: Vec<f64> = (0..n).map(|i| -0.8 + 0.3 * i as f64).collect();
    let predicted = moments::predict(&rules::riccati(), &m, eta, &w0, epochs as u64)?;
    let cfg = UnitTrainConfig {
        transfer: TransferFunction::linear(),
        eta: EtaSchedule::EpochAveraged { eta },
        epochs,
        seed: derive_seed(seed, 1),
        init: WeightInit::Given { weights: w0 },
        shuffle: true,
    };
    let simulated: Vec<Vec<f64>> = train_unit(&rules::riccati(), &data, &cfg)?.records.into_iter().map(|r| r.weights).collect();
    let max_deviation = simulated
        .iter()
        .zip(&predicted)
        .flat_map(|(s, p)| s.iter().zip(p).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    Ok(RiccatiComparison {
        max_deviation,
        simulated,
        predicted,
    })
}

/// Bounded clamped rule on a 21-input threshold unit with random `{-1,1}`
/// data; the weight norm settles near `sqrt(21)`.
pub fn fig3(seed: u64) -> Result<Trajectory> {
    let data = generate(&GeneratorSpec::LinsepRandom { n: 21, m: 500 }, seed)?;
    let cfg = UnitTrainConfig {
        transfer: TransferFunction::threshold11(),
        eta: EtaSchedule::Constant { eta: 0.01 },
        epochs: 200,
        seed: derive_seed(seed, 1),
        init: WeightInit::Normal { std: 0.1 },
        shuffle: true,
    };
    train_unit(&rules::bounded_clamped(1.0), &data, &cfg)
}

impl RiccatiComparison {
    /// `epoch,sim_0..,pred_0..`.
    pub fn to_csv(&self) -> String {
        let n = self.simulated.first().map_or(0, Vec::len);
        let mut out = String::from("epoch");
        for i in 0..n {
            out.push_str(&format!(",sim_{i}"));
        }
        for i in 0..n {
            out.push_str(&format!(",pred_{i}"));
        }
        out.push('\n');
        for (k, (s, p)) in self.simulated.iter().zip(&self.predicted).enumerate() {
            out.push_str(&k.to_string());
            for v in s.iter().chain(p) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn criterion_5(_: Budget) -> CriterionResult {
    timed(5, "analytic vs simulated dynamics", |c| {
        let data = dynamics_data(10, 500, 5)?;
        for rule in linear_catalog_rules()? {
            let cmp = compare_dynamics(&rule, &data, 1e-3, 50, 5)?;
            c.check(
                cmp.max_relative_error <= DYNAMICS_RELATIVE_TOLERANCE,
                format!("{} {:.2e}", cmp.rule, cmp.max_relative_error),
            );
        }
        let ric = riccati_comparison(0.05, 50, 5)?;
        c.check(ric.max_deviation <= RICCATI_TOLERANCE, format!("riccati max deviation {:.4}", ric.max_deviation));
        Ok(())
    })
}

pub const GRADIENT_TOLERANCE: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;

/// Worst backprop-vs-central-difference error over random nets with one to
/// three hidden layers, both losses.
pub fn gradient_check(nets: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..nets {
        let mut r = rng::seeded(derive_seed(seed, k as u64));
        let hidden = 1 + k % 3;
        let mut sizes = vec![r.random_range(2..7)];
        sizes.extend((0..hidden).map(|_| r.random_range(2..7)));
        sizes.push(r.random_range(1..4));
        let cross = k % 2 == 1;
        let mut transfers: Vec<TransferFunction> = (0..hidden)
            .map(|h| if h % 2 == 0 { TransferFunction::tanh() } else { TransferFunction::logistic() })
            .collect();
        transfers.push(if cross { TransferFunction::logistic() } else { TransferFunction::linear() });
        let mut net = LayeredNet::new(sizes.clone(), transfers)?;
        net.init_normal(0.7, &mut r);
        let x: Vec<f64> = (0..sizes[0]).map(|_| r.random_range(-1.0..1.0)).collect();
        let t: Vec<f64> = (0..*sizes.last().unwrap())
            .map(|_| if cross { r.random_range(0.05..0.95) } else { r.random_range(-1.0..1.0) })
            .collect();
        let loss = if cross { Loss::CrossEntropy } else { Loss::Squared };
        worst = worst.max(compare_gradient(&net, &x, &Supervision::top(&net, t), loss)?);
    }
    Ok(worst)
}

fn compare_gradient(net: &LayeredNet, x: &[f64], sup: &Supervision, loss: Loss) -> Result<f64> {
    let b = channel::backprop(net, x, sup, loss)?;
    let g = channel::param_gradient(net, &b.gradient);
    let fd = channel::finite_difference_gradient(net, x, sup, loss, FD_STEP, FdScheme::Central, &mut Default::default())?;
    Ok(channel::max_relative_error(&g, &fd))
}

/// The same check through time on a three-unit recurrent net unfolded over
/// `1..=max_steps` steps, targets at step 2 (when present) and the last step.
pub fn bptt_check(max_steps: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for steps in 1..=max_steps {
        let mut r = rng::seeded(derive_seed(seed, steps as u64));
        let rec: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { r.random_range(-0.8..0.8) }).collect())
            .collect();
        let net = channel::unfold(&rec, steps, TransferFunction::tanh())?;
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut targets = Vec::new();
        let mut at: Vec<usize> = vec![2, steps];
        at.retain(|&s| s <= steps);
        at.dedup();
        for s in at {
            targets.push((s, (0..3).map(|_| r.random_range(-0.9..0.9)).collect()));
        }
        worst = worst.max(compare_gradient(&net, &x, &Supervision { targets }, Loss::Squared)?);
    }
    Ok(worst)
}

pub fn criterion_6(_: Budget) -> CriterionResult {
    timed(6, "gradient correctness", |c| {
        let g = gradient_check(60, 6)?;
        c.check(g <= GRADIENT_TOLERANCE, format!("feedforward max rel err {g:.2e}"));
        let b = bptt_check(10, 6)?;
        c.check(b <= GRADIENT_TOLERANCE, format!("unfolded max rel err {b:.2e}"));
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SshAudit {
    pub datasets: usize,
    pub agreements: usize,
    pub sufficient_predictions: usize,
    pub false_positives: usize,
}

/// Random equal-length binary sets: row-sum verdict against training, then
/// the sufficient-condition families from random starts.
pub fn ssh_audit(datasets: usize, seed: u64) -> Result<SshAudit> {
    let mut r = rng::seeded(seed);
    let mut agreements = 0;
    let mut done = 0;
    while done < datasets {
        let n = r.random_range(1..=10);
        let m = r.random_range(1..=20);
        let inputs: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect()).collect();
        let targets: Vec<f64> = (0..m).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let data = TrainingSet::with_scalar_targets(inputs, targets)?;
        let with_bias = r.random_bool(0.5);
        let Ok(v) = ssh::predict_and_verify(&data, with_bias, &ssh::VerifyConfig::default()) else {
            continue;
        };
        done += 1;
        agreements += usize::from(v.predicted == Some(v.empirical));
    }
    let mut sufficient = 0;
    let mut false_positives = 0;
    for trial in 0..datasets as u64 {
        let data = match trial % 3 {
            0 => ssh::orthogonal_family(8, &mut r),
            1 => ssh::common_orthant_family(12, 6, &mut r),
            _ => ssh::separable_binary_family(10, 10, &mut r),
        };
        let cfg = ssh::VerifyConfig {
            init: WeightInit::Normal { std: 1.0 },
            seed: derive_seed(seed, trial),
            ..ssh::VerifyConfig::default()
        };
        let Ok(v) = ssh::predict_and_verify(&data, trial % 2 == 0, &cfg) else {
            continue;
        };
        let f = v.report.flags;
        if f.common_orthant || (f.mutually_orthogonal && f.all_row_sums_positive) {
            sufficient += 1;
            false_positives += usize::from(!v.empirical);
        }
    }
    Ok(SshAudit {
        datasets,
        agreements,
        sufficient_predictions: sufficient,
        false_positives,
    })
}

pub fn criterion_7(_: Budget) -> CriterionResult {
    timed(7, "supervised Hebb theorems", |c| {
        let a = ssh_audit(200, 7)?;
        c.check(a.agreements == a.datasets, format!("{}/{} verdicts agree", a.agreements, a.datasets));
        c.check(
            a.false_positives == 0 && a.sufficient_predictions > 0,
            format!("{} false positives in {} sufficient-condition predictions", a.false_positives, a.sufficient_predictions),
        );
        Ok(())
    })
}

pub const AUTOENCODER_TRAIN_REDUCTION: f64 = 0.8;
pub const AUTOENCODER_TEST_REDUCTION: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderSummary {
    pub initial_train: f64,
    pub initial_test: f64,
    pub best_epoch: usize,
    pub train_reduction: f64,
    pub test_reduction: f64,
    pub final_train_reduction: f64,
    pub final_test_reduction: f64,
}

/// Reductions at the epoch with the lowest training error, and at the end.
pub fn summarize_autoencoder(run: &DeepTargetsRun) -> Result<AutoencoderSummary> {
    let first = run.epochs.first().ok_or(Error::EmptyDataset)?;
    let test0 = first.test_error.ok_or(Error::MissingTarget)?;
    let best = run
        .epochs
        .iter()
        .min_by(|a, b| a.train_error.total_cmp(&b.train_error))
        .expect("non-empty");
    let last = run.epochs.last().expect("non-empty");
    let red = |now: f64, then: f64| 1.0 - now / then;
    Ok(AutoencoderSummary {
        initial_train: first.train_error,
        initial_test: test0,
        best_epoch: best.epoch,
        train_reduction: red(best.train_error, first.train_error),
        test_reduction: red(best.test_error.unwrap_or(test0), test0),
        final_train_reduction: red(last.train_error, first.train_error),
        final_test_reduction: red(last.test_error.unwrap_or(test0), test0),
    })
}

pub fn fig11(seed: u64) -> Result<DeepTargetsRun> {
    deep_targets::autoencoder_experiment(&AutoencoderConfig {
        seed,
        ..AutoencoderConfig::default()
    })
}

pub fn criterion_8(_: Budget) -> CriterionResult {
    timed(8, "deep-targets autoencoder", |c| {
        let s = summarize_autoencoder(&fig11(0)?)?;
        c.check((s.initial_train - 0.5).abs() <= 0.05, format!("initial error {:.3}", s.initial_train));
        c.check(
            s.train_reduction >= AUTOENCODER_TRAIN_REDUCTION,
            format!("train reduction {:.3} at epoch {}", s.train_reduction, s.best_epoch),
        );
        c.check(s.test_reduction >= AUTOENCODER_TEST_REDUCTION, format!("test reduction {:.3}", s.test_reduction));
        c.detail.push(format!(
            "final epoch reductions {:.3}/{:.3}",
            s.final_train_reduction, s.final_test_reduction
        ));
        Ok(())
    })
}

pub fn criterion_9(_: Budget) -> CriterionResult {
    timed(9, "Hopfield isometry invariance", |c| {
        let exhaustive = SearchConfig {
            exhaust: true,
            ..SearchConfig::default()
        };
        let hebb = hopfield::uniqueness_search(4, RuleCoeffs::HEBB, &exhaustive)?;
        c.check(
            hebb.exhaustive && hebb.counterexample.is_none(),
            format!("n=4 exhaustive: {} pairs, {} violations", hebb.checked, u8::from(hebb.counterexample.is_some())),
        );
        let v = hopfield::random_commutation_violations(8, RuleCoeffs::HEBB, 1000, 6, 9)?;
        c.check(v == 0, format!("n=8 random: {v} violations in 1000"));
        for rule in [RuleCoeffs::new(1, 1, 0), RuleCoeffs::new(1, 0, 1)] {
            let found = (1..=4).find_map(|n| {
                hopfield::uniqueness_search(n, rule, &SearchConfig::default())
                    .ok()
                    .and_then(|o| o.counterexample.map(|ce| (n, ce)))
            });
            c.check(
                found.is_some(),
                format!(
                    "({},{},{}) violation {}",
                    rule.alpha,
                    rule.beta,
                    rule.gamma,
                    found.map_or("not found".into(), |(n, _)| format!("found at n={n}"))
                ),
            );
        }
        Ok(())
    })
}

pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
pub const TRAJECTORY_TOLERANCE: f64 = 1e-10;

/// Largest weight difference between a logistic unit trained with
/// `eta (T - O) I` on `{0,1}` targets and its `[-1,1]` counterpart on
/// `T' = 2T - 1`. With `natural` the counterpart is `tanh(S/2)` at rate
/// `eta/2` and equal weights; otherwise plain `tanh` at rate `eta/4` with
/// weights compared as `w = 2 w'`.
pub fn range_invariance_gap(natural: bool, epochs: usize, seed: u64) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let n = 6;
    let inputs: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let mut x: Vec<f64> = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
            x.push(1.0);
            x
        })
        .collect();
    let t01: Vec<f64> = (0..40).map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let t11: Vec<f64> = t01.iter().map(|t| 2.0 * t - 1.0).collect();
    let a = TrainingSet::with_scalar_targets(inputs.clone(), t01)?;
    let b = TrainingSet::with_scalar_targets(inputs, t11)?;
    let w0 = init_weights(n, derive_seed(seed, 1));
    let eta = 0.1;
    let run = |data: &TrainingSet, transfer: TransferFunction, rate: f64, w: Vec<f64>| -> Result<Vec<Vec<f64>>> {
        let cfg = UnitTrainConfig {
            transfer,
            eta: EtaSchedule::Constant { eta: rate },
            epochs,
            seed: derive_seed(seed, 2),
            init: WeightInit::Given { weights: w },
            shuffle: true,
        };
        Ok(train_unit(&rules::gradient(), data, &cfg)?.records.into_iter().map(|r| r.weights).collect())
    };
    let base = run(&a, TransferFunction::logistic(), eta, w0.clone())?;
    let (other, scale) = if natural {
        (run(&b, TransferFunction::tanh().with_slope(0.5), eta / 2.0, w0)?, 1.0)
    } else {
        (run(&b, TransferFunction::tanh(), eta / 4.0, w0.iter().map(|w| w / 2.0).collect())?, 2.0)
    };
    Ok(base
        .iter()
        .zip(&other)
        .flat_map(|(p, q)| p.iter().zip(q).map(move |(x, y)| (x - scale * y).abs()))
        .fold(0.0, f64::max))
}

/// Degree labels stated for named rules, `(rule, n, d)`.
pub fn stated_degrees() -> Vec<(rules::LearningRule, u32, u32)> {
    use rules::PostMode::Output;
    let w_o2_i = rules::LearningRule::new("w O^2 I", vec![RuleTerm::new(1.0, Output, 2, 1, 1)]).expect("valid rule");
    vec![
        (rules::simple_hebb(), 2, 1),
        (rules::oja(), 3, 3),
        (w_o2_i, 4, 3),
        (rules::bounded_hebb(1.0), 4, 3),
    ]
}

pub fn criterion_10(_: Budget) -> CriterionResult {
    timed(10, "range transform and rule algebra", |c| {
        let mut r = rng::seeded(10);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let v = QuadraticCoefficients::new(
                r.random_range(-10.0..10.0),
                r.random_range(-10.0..10.0),
                r.random_range(-10.0..10.0),
                r.random_range(-10.0..10.0),
            );
            for from in [RangeConvention::ZeroOne, RangeConvention::MinusOneOne] {
                let back = rules::range_transform(rules::range_transform(v, from), from.other());
                for (a, b) in back.as_array().iter().zip(v.as_array()) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        c.check(worst <= ROUND_TRIP_TOLERANCE, format!("round trip {worst:.1e}"));
        let hebb = rules::range_transform(QuadraticCoefficients::new(1.0, 0.0, 0.0, 0.0), RangeConvention::ZeroOne);
        c.check(hebb.as_array() == [4.0, -2.0, -2.0, 1.0], "Hebb [0,1] -> (4,-2,-2,1)");
        for (rule, n, d) in stated_degrees() {
            let got = rules::classify_degrees(&rule)?;
            c.check((got.n, got.d) == (n, d), format!("{} ({},{})", rule.name, got.n, got.d));
        }
        for natural in [true, false] {
            let gap = range_invariance_gap(natural, 50, 10)?;
            c.check(
                gap <= TRAJECTORY_TOLERANCE,
                format!("{} tanh trajectory gap {gap:.1e}", if natural { "tanh(S/2)" } else { "plain" }),
            );
        }
        Ok(())
    })
}

pub fn criterion(id: u8, budget: Budget) -> Result<CriterionResult> {
    Ok(match id {
        1 => criterion_1(budget),
        2 => criterion_2(budget),
        3 => criterion_3(budget),
        4 => criterion_4(budget),
        5 => criterion_5(budget),
        6 => criterion_6(budget),
        7 => criterion_7(budget),
        8 => criterion_8(budget),
        9 => criterion_9(budget),
        10 => criterion_10(budget),
        other => return Err(Error::InvalidArgument(format!("no criterion {other}"))),
    })
}

pub fn reproduce_all(budget: Budget) -> Vec<CriterionResult> {
    (1..=10).map(|id| criterion(id, budget).expect("ids 1..=10 exist")).collect()
}
