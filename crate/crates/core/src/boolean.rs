//! Small Boolean functions: enumeration, linear separability, and the
//! learnability census for shallow and two-layer local learning.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::data::{boolean_table, TrainingSet};
use crate::netsim::net::LayeredNet;
use crate::netsim::train::{train_deep_local, DeepLocalConfig, EtaSchedule};
use crate::netsim::transfer::TransferFunction;
use crate::rng::{self, derive_seed};
use crate::rules::{supervised_variant, LearningRule};

pub const MAX_MONOTONE_INPUTS: usize = 4;
pub const MAX_ALL_INPUTS: usize = 3;

/// Truth table over `{-1, +1}^n`: bit `k` is set when the output on input
/// row `k` is `+1`, and row `k` has `x_i = +1` exactly when bit `i` of `k` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BooleanFunction {
    pub n_inputs: usize,
    pub truth_table: u64,
}

impl BooleanFunction {
    pub fn new(n_inputs: usize, truth_table: u64) -> Result<Self> {
        if n_inputs > 6 {
            return Err(Error::AboveCap {
                what: format!("{n_inputs} inputs"),
                cap: 6,
            });
        }
        if n_inputs < 6 && truth_table >> (1u64 << n_inputs) != 0 {
            return Err(Error::InvalidArgument(format!(
                "truth table {truth_table:#x} longer than 2^{n_inputs}"
            )));
        }
        Ok(BooleanFunction { n_inputs, truth_table })
    }

    pub fn rows(&self) -> usize {
        1 << self.n_inputs
    }

    pub fn value(&self, row: usize) -> f64 {
        if self.truth_table >> row & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.rows()).map(|k| self.value(k)).collect()
    }

    pub fn and(n: usize) -> Self {
        BooleanFunction {
            n_inputs: n,
            truth_table: 1 << ((1 << n) - 1),
        }
    }

    pub fn parity(n: usize) -> Self {
        // +1 when the number of -1 inputs is odd, i.e. the product of inputs is -1.
        let table = (0..1u64 << n)
            .filter(|k| (n as u32 - k.count_ones()) % 2 == 1)
            .fold(0, |acc, k| acc | 1 << k);
        BooleanFunction {
            n_inputs: n,
            truth_table: table,
        }
    }

    pub fn constant(n: usize, value: bool) -> Self {
        let full = if n >= 6 { u64::MAX } else { (1u64 << (1 << n)) - 1 };
        BooleanFunction {
            n_inputs: n,
            truth_table: if value { full } else { 0 },
        }
    }

    pub fn training_set(&self) -> TrainingSet {
        let (inputs, targets) = boolean_table(self.n_inputs, self.truth_table).expect("valid function");
        TrainingSet::with_scalar_targets(inputs, targets).expect("consistent table")
    }

    /// Raising any input from -1 to +1 never lowers the output.
    pub fn is_monotone(&self) -> bool {
        (0..self.rows()).all(|k| {
            (0..self.n_inputs)
                .filter(|i| k >> i & 1 == 0)
                .all(|i| self.truth_table >> k & 1 <= self.truth_table >> (k | 1 << i) & 1)
        })
    }
}

fn monotone_tables(n: usize) -> Vec<u64> {
    if n == 0 {
        return vec![0, 1];
    }
    // Split on the top variable: f = (f0 on x_{n-1} = -1, f1 on x_{n-1} = +1) with f0 <= f1.
    let lower = monotone_tables(n - 1);
    let half = 1u32 << (n - 1);
    let mut out = Vec::new();
    for &f0 in &lower {
        for &f1 in &lower {
            if f0 & !f1 == 0 {
                out.push(f0 | f1 << half);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn enumerate_functions(n: usize, monotone_only: bool) -> Result<Vec<BooleanFunction>> {
    enumerate_functions_capped(n, monotone_only, MAX_MONOTONE_INPUTS, MAX_ALL_INPUTS)
}

pub fn enumerate_functions_capped(
    n: usize,
    monotone_only: bool,
    monotone_cap: usize,
    all_cap: usize,
) -> Result<Vec<BooleanFunction>> {
    let cap = if monotone_only { monotone_cap } else { all_cap };
    if n > cap || n > 5 {
        return Err(Error::AboveCap {
            what: format!("enumeration of {} functions of {n} inputs", if monotone_only { "monotone" } else { "all" }),
            cap: cap.min(5),
        });
    }
    let tables: Vec<u64> = if monotone_only {
        monotone_tables(n)
    } else {
        (0..1u64 << (1 << n)).collect()
    };
    Ok(tables
        .into_iter()
        .map(|t| BooleanFunction {
            n_inputs: n,
            truth_table: t,
        })
        .collect())
}

/// Integer weight magnitude that realises every threshold function of up to
/// four inputs.
const WEIGHT_RANGE: i64 = 3;

fn separable_tables(n: usize) -> &'static HashMap<u64, Vec<i64>> {
    static TABLES: OnceLock<Vec<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_MONOTONE_INPUTS).map(build_separable).collect())[n]
}

/// Map from truth table to a certificate `(w_1..w_n, b)` found by exhaustive
/// search. Biases run over odd values only when the weight sum is even and
/// vice versa, so no input ever lands on the threshold.
fn build_separable(n: usize) -> HashMap<u64, Vec<i64>> {
    let mut out = HashMap::new();
    let rows = 1usize << n;
    let mut w = vec![-WEIGHT_RANGE; n];
    loop {
        let total: i64 = w.iter().map(|v| v.abs()).sum();
        // Every S = b + sum(+-w_i) has the parity of b + sum(w_i).
        let parity = total.rem_euclid(2);
        let mut b = -(total + 1);
        while b <= total + 1 {
            if (b + parity).rem_euclid(2) == 1 {
                let mut table = 0u64;
                for k in 0..rows {
                    let s: i64 = b + (0..n).map(|i| if k >> i & 1 == 1 { w[i] } else { -w[i] }).sum::<i64>();
                    if s > 0 {
                        table |= 1 << k;
                    }
                }
                out.entry(table).or_insert_with(|| {
                    let mut c = w.clone();
                    c.push(b);
                    c
                });
            }
            b += 1;
        }
        let mut i = 0;
        while i < n {
            w[i] += 1;
            if w[i] <= WEIGHT_RANGE {
                break;
            }
            w[i] = -WEIGHT_RANGE;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    out
}

/// Exact verdict for `n <= 4` by exhaustive integer search.
pub fn linearly_separable(f: &BooleanFunction) -> bool {
    separating_weights(f).is_some()
}

/// Integer weights and bias `(w_1..w_n, b)` realising `f` strictly, if any.
pub fn separating_weights(f: &BooleanFunction) -> Option<Vec<i64>> {
    assert!(f.n_inputs <= MAX_MONOTONE_INPUTS, "separability search supports at most 4 inputs");
    separable_tables(f.n_inputs).get(&f.truth_table).cloned()
}

/// Independent oracle: the perceptron algorithm on the truth table. Returns
/// real weights `(w, b)` when it converges within `max_epochs`.
pub fn perceptron_certificate(f: &BooleanFunction, max_epochs: usize) -> Option<Vec<f64>> {
    let set = f.training_set();
    let n = f.n_inputs;
    let mut w = vec![0.0; n + 1];
    for _ in 0..max_epochs {
        let mut errors = 0;
        for (x, t) in set.inputs.iter().zip(set.targets.as_ref().unwrap()) {
            let s: f64 = w[n] + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            if s * t[0] <= 0.0 {
                errors += 1;
                for i in 0..n {
                    w[i] += t[0] * x[i];
                }
                w[n] += t[0];
            }
        }
        if errors == 0 {
            return Some(w);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    Shallow,
    TwoLayer,
}

/// Training protocol for one learnability trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    /// Restart budget for the two-layer net.
    pub restarts: usize,
    /// Restart budget for the single-unit net. Non-separable functions always
    /// exhaust it, so it is kept separate to bound census time.
    #[serde(default = "default_shallow_restarts")]
    pub shallow_restarts: usize,
    /// Hidden width for the two-layer net; `None` means `2^n`.
    #[serde(default)]
    pub hidden_width: Option<usize>,
    pub hidden_epochs: usize,
    pub top_epochs: usize,
    pub eta0: f64,
    pub hidden_init_std: f64,
    pub top_init_std: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            restarts: 64,
            shallow_restarts: 64,
            hidden_width: None,
            hidden_epochs: 1,
            top_epochs: 10,
            eta0: 0.1,
            hidden_init_std: 1.0,
            top_init_std: 0.1,
        }
    }
}

fn default_shallow_restarts() -> usize {
    64
}

impl LearnConfig {
    pub fn budget(&self, depth: Depth) -> usize {
        match depth {
            Depth::Shallow => self.shallow_restarts,
            Depth::TwoLayer => self.restarts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub learnt: bool,
    /// Index of the first successful restart.
    pub restart: Option<usize>,
    /// Some hidden unit of the successful net sits exactly on its threshold
    /// for some input; the deterministic tie rule decided its output.
    pub hidden_tie: bool,
}

fn restart_seed(seed: u64, f: &BooleanFunction, restart: usize) -> u64 {
    derive_seed(derive_seed(seed, (f.n_inputs as u64) << 32 | f.truth_table), restart as u64)
}

/// One training run from a fresh random initialisation.
pub fn train_once(
    f: &BooleanFunction,
    rule: &LearningRule,
    depth: Depth,
    cfg: &LearnConfig,
    seed: u64,
) -> Result<(bool, LayeredNet)> {
    train_once_on(f, &f.training_set(), rule, depth, cfg, seed)
}

fn train_once_on(
    f: &BooleanFunction,
    set: &TrainingSet,
    rule: &LearningRule,
    depth: Depth,
    cfg: &LearnConfig,
    seed: u64,
) -> Result<(bool, LayeredNet)> {
    let n = f.n_inputs;
    let sizes = match depth {
        Depth::Shallow => vec![n, 1],
        Depth::TwoLayer => vec![n, cfg.hidden_width.unwrap_or(1 << n), 1],
    };
    let mut net = LayeredNet::uniform_transfer(sizes, TransferFunction::threshold11())?;
    let mut r = rng::seeded(seed);
    let depth_n = net.depth();
    for l in 1..=depth_n {
        let std = if l == depth_n { cfg.top_init_std } else { cfg.hidden_init_std };
        let d = rand_distr::Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for w in net.weights[l - 1].iter_mut() {
            *w = rand_distr::Distribution::sample(&d, &mut r);
        }
    }
    let dl = DeepLocalConfig {
        hidden_epochs: cfg.hidden_epochs,
        top_epochs: cfg.top_epochs,
        eta: EtaSchedule::LinearDecay { eta0: cfg.eta0 },
        seed: derive_seed(seed, 1),
        stop_when_fit: true,
    };
    let top = supervised_variant(rule);
    let hidden = match depth {
        Depth::Shallow => crate::rules::simple_hebb(),
        Depth::TwoLayer => rule.clone(),
    };
    let out = train_deep_local(net, &hidden, &top, set, &dl)?;
    Ok((out.fit_epoch.is_some(), out.net))
}

fn hidden_tie(net: &LayeredNet, f: &BooleanFunction) -> bool {
    if net.depth() < 2 {
        return false;
    }
    f.training_set().inputs.iter().any(|x| {
        let pass = net.forward_pass(x, &mut Default::default()).expect("shape checked");
        pass.sums[..pass.sums.len() - 1].iter().flatten().any(|&s| s == 0.0)
    })
}

/// True when some restart reproduces the full truth table. Each restart's
/// seed depends only on `(seed, f, restart)`, so a larger budget can only
/// add successes.
pub fn learnable(f: &BooleanFunction, rule: &LearningRule, depth: Depth, cfg: &LearnConfig, seed: u64) -> Result<LearnOutcome> {
    if cfg.budget(depth) == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let set = f.training_set();
    for k in 0..cfg.budget(depth) {
        let (ok, net) = train_once_on(f, &set, rule, depth, cfg, restart_seed(seed, f, k))?;
        if ok {
            return Ok(LearnOutcome {
                learnt: true,
                restart: Some(k),
                hidden_tie: hidden_tie(&net, f),
            });
        }
    }
    Ok(LearnOutcome {
        learnt: false,
        restart: None,
        hidden_tie: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub fan_in: usize,
    pub rule_name: String,
    pub shallow_count: usize,
    pub deep_count: usize,
    pub total: usize,
    pub restarts: usize,
    pub shallow_restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusDetail {
    pub function: BooleanFunction,
    pub rule_name: String,
    pub separable: bool,
    pub shallow: LearnOutcome,
    pub deep: LearnOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub rows: Vec<CensusRow>,
    pub details: Vec<CensusDetail>,
}

impl CensusResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fan_in,rule_name,shallow_count,deep_count,total,restarts,shallow_restarts,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.fan_in, r.rule_name, r.shallow_count, r.deep_count, r.total, r.restarts, r.shallow_restarts, r.seed
            ));
        }
        out
    }
}

/// Shallow and two-layer counts for every rule; functions are processed in
/// parallel and merged in enumeration order.
pub fn census(n: usize, monotone_only: bool, rules: &[LearningRule], cfg: &LearnConfig, seed: u64) -> Result<CensusResult> {
    let functions = enumerate_functions(n, monotone_only)?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for rule in rules {
        let per_fn: Vec<Result<CensusDetail>> = functions
            .par_iter()
            .map(|f| {
                let separable = linearly_separable(f);
                // A single threshold unit only ever realises separable functions,
                // so training it on the others cannot change the count.
                let shallow = if separable {
                    learnable(f, rule, Depth::Shallow, cfg, seed)?
                } else {
                    LearnOutcome { learnt: false, restart: None, hidden_tie: false }
                };
                Ok(CensusDetail {
                    function: *f,
                    rule_name: rule.name.clone(),
                    separable,
                    shallow,
                    deep: learnable(f, rule, Depth::TwoLayer, cfg, seed)?,
                })
            })
            .collect();
        let per_fn = per_fn.into_iter().collect::<Result<Vec<_>>>()?;
        rows.push(CensusRow {
            fan_in: n,
            rule_name: rule.name.clone(),
            shallow_count: per_fn.iter().filter(|d| d.shallow.learnt).count(),
            deep_count: per_fn.iter().filter(|d| d.deep.learnt).count(),
            total: functions.len(),
            restarts: cfg.restarts,
            shallow_restarts: cfg.shallow_restarts,
            seed,
        });
        details.extend(per_fn);
    }
    Ok(CensusResult { rows, details })
}

/// Simple Hebb, Oja and the bounded rule, the three census rules.
pub fn census_rules() -> Vec<LearningRule> {
    vec![crate::rules::simple_hebb(), crate::rules::oja(), crate::rules::bounded_hebb(1.0)]
}
