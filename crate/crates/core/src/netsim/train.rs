use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::data::TrainingSet;
use crate::netsim::net::LayeredNet;
use crate::netsim::transfer::TransferFunction;
use crate::rng::{self, Rng};
use crate::rules::{LearningRule, RuleTerm};

pub const DEFAULT_ETA0: f64 = 0.1;

/// Learning rate per on-line step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaSchedule {
    /// The same rate on every step.
    Constant { eta: f64 },
    /// `eta / M` per step, so one epoch moves the weights by `eta` times the
    /// average update.
    EpochAveraged { eta: f64 },
    /// `eta0 (1 - k / K)` at step `k` of `K`.
    LinearDecay { eta0: f64 },
}

impl Default for EtaSchedule {
    fn default() -> Self {
        EtaSchedule::LinearDecay { eta0: DEFAULT_ETA0 }
    }
}

impl EtaSchedule {
    pub fn at(&self, step: usize, total_steps: usize, m: usize) -> f64 {
        match *self {
            EtaSchedule::Constant { eta } => eta,
            EtaSchedule::EpochAveraged { eta } => eta / m.max(1) as f64,
            EtaSchedule::LinearDecay { eta0 } => eta0 * (1.0 - step as f64 / total_steps.max(1) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightInit {
    Zeros,
    Normal { std: f64 },
    Given { weights: Vec<f64> },
}

impl WeightInit {
    pub fn draw(&self, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        match self {
            WeightInit::Zeros => Ok(vec![0.0; n]),
            WeightInit::Normal { std } => {
                let d = Normal::new(0.0, *std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok((0..n).map(|_| d.sample(rng)).collect())
            }
            WeightInit::Given { weights } => {
                if weights.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: weights.len(),
                    });
                }
                Ok(weights.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTrainConfig {
    pub transfer: TransferFunction,
    pub eta: EtaSchedule,
    pub epochs: usize,
    pub seed: u64,
    pub init: WeightInit,
    /// Present examples in a fresh random order each epoch.
    #[serde(default = "yes")]
    pub shuffle: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub norm: f64,
    /// Angle in radians between the weights and the mean input.
    pub angle_to_centroid: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<EpochRecord>,
}

impl Trajectory {
    pub fn final_weights(&self) -> &[f64] {
        &self.records.last().expect("trajectory records epoch 0").weights
    }

    /// CSV with columns `epoch,norm,angle_to_centroid,w_0..w_N`.
    pub fn to_csv(&self) -> String {
        let n = self.records.first().map_or(0, |r| r.weights.len());
        let mut out = String::from("epoch,norm,angle_to_centroid");
        for i in 0..n {
            out.push_str(&format!(",w_{i}"));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.epoch, r.norm, r.angle_to_centroid));
            for w in &r.weights {
                out.push_str(&format!(",{w}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        return f64::NAN;
    }
    (dot(a, b) / d).clamp(-1.0, 1.0).acos()
}

pub fn centroid(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.first().map_or(0, Vec::len);
    let mut c = vec![0.0; n];
    for r in rows {
        for (a, b) in c.iter_mut().zip(r) {
            *a += b;
        }
    }
    let m = rows.len().max(1) as f64;
    c.iter_mut().for_each(|v| *v /= m);
    c
}

/// Rule evaluation with terms pre-normalised; `delta[i]` receives the update
/// for weight `i` driven by presynaptic activity `pre[i]`.
#[derive(Debug, Clone)]
pub struct CompiledRule {
    terms: Vec<RuleTerm>,
    supervised: bool,
}

impl CompiledRule {
    pub fn new(rule: &LearningRule) -> Self {
        CompiledRule {
            terms: rule.normalized_terms(),
            supervised: rule.is_supervised(),
        }
    }

    pub fn is_supervised(&self) -> bool {
        self.supervised
    }

    pub fn update(&self, o_post: f64, pre: &[f64], w: &[f64], target: Option<f64>, eta: f64, delta: &mut [f64]) -> Result<()> {
        // The target/postsynaptic part of each term is shared by all weights of the unit.
        const MAX_FAST: usize = 16;
        if self.terms.len() > MAX_FAST {
            for ((d, &x), &wi) in delta.iter_mut().zip(pre).zip(w) {
                let mut s = 0.0;
                for t in &self.terms {
                    s += eta * t.evaluate(o_post, x, wi, target)?;
                }
                *d = s;
            }
            return Ok(());
        }
        let mut buf = [0.0; MAX_FAST];
        let post = &mut buf[..self.terms.len()];
        for (p, t) in post.iter_mut().zip(&self.terms) {
            *p = eta * t.evaluate(o_post, 1.0, 1.0, target)?;
        }
        for ((d, &x), &wi) in delta.iter_mut().zip(pre).zip(w) {
            let mut s = 0.0;
            for (p, t) in post.iter().zip(&self.terms) {
                if *p != 0.0 {
                    s += p * x.powi(t.exp_pre as i32) * wi.powi(t.exp_weight as i32);
                }
            }
            *d = s;
        }
        Ok(())
    }
}

/// On-line training of a single unit. Inputs are used as given; append a
/// constant column for a bias.
pub fn train_unit(rule: &LearningRule, data: &TrainingSet, cfg: &UnitTrainConfig) -> Result<Trajectory> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let compiled = CompiledRule::new(rule);
    if compiled.is_supervised() && data.targets.is_none() {
        return Err(Error::MissingTarget);
    }
    let n = data.input_dim();
    let m = data.len();
    let mut r = rng::seeded(cfg.seed);
    let mut w = cfg.init.draw(n, &mut r)?;
    let c = centroid(&data.inputs);
    let record = |epoch: usize, w: &[f64]| EpochRecord {
        epoch,
        norm: norm(w),
        angle_to_centroid: angle(w, &c),
        weights: w.to_vec(),
    };
    let mut records = vec![record(0, &w)];
    let mut order: Vec<usize> = (0..m).collect();
    let mut delta = vec![0.0; n];
    let total = cfg.epochs * m;
    let mut step = 0;
    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut r);
        }
        for &t in &order {
            let x = &data.inputs[t];
            let o = cfg.transfer.apply(dot(&w, x));
            let eta = cfg.eta.at(step, total, m);
            step += 1;
            let target = if compiled.is_supervised() { data.scalar_target(t) } else { None };
            compiled.update(o, x, &w, target, eta, &mut delta)?;
            for (a, d) in w.iter_mut().zip(&delta) {
                *a += d;
            }
        }
        records.push(record(epoch, &w));
    }
    Ok(Trajectory { records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeepLocalConfig {
    pub hidden_epochs: usize,
    pub top_epochs: usize,
    #[serde(default)]
    pub eta: EtaSchedule,
    pub seed: u64,
    /// Stop top-layer training at the first epoch after which every training
    /// example is reproduced exactly.
    #[serde(default)]
    pub stop_when_fit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepLocalOutcome {
    pub net: LayeredNet,
    /// Epoch of top-layer training at which the set was first fit, if it was.
    pub fit_epoch: Option<usize>,
}

/// Train every unit of layer `l` with `rule` on the given presynaptic
/// activities; the bias weight sees a constant `+1`.
#[allow(clippy::too_many_arguments)]
fn train_layer_local(
    net: &mut LayeredNet,
    l: usize,
    rule: &CompiledRule,
    pre: &[Vec<f64>],
    targets: Option<&[Vec<f64>]>,
    epochs: usize,
    eta: EtaSchedule,
    r: &mut Rng,
    mut on_epoch: impl FnMut(&LayeredNet, usize) -> bool,
) -> Result<Option<usize>> {
    let m = pre.len();
    let f = net.transfers[l - 1];
    let rows = net.layer_sizes[l];
    let augmented: Vec<Vec<f64>> = pre
        .iter()
        .map(|x| {
            let mut v = x.clone();
            v.push(1.0);
            v
        })
        .collect();
    let mut delta = vec![0.0; net.cols(l)];
    let mut order: Vec<usize> = (0..m).collect();
    let total = epochs * m;
    let mut step = 0;
    for epoch in 1..=epochs {
        order.shuffle(r);
        for &t in &order {
            let x = &augmented[t];
            let e = eta.at(step, total, m);
            step += 1;
            for i in 0..rows {
                let w = net.unit_weights(l, i);
                let o = f.apply(dot(w, x));
                let target = targets.map(|tt| tt[t][i]);
                rule.update(o, x, w, target, e, &mut delta)?;
                for (a, d) in net.unit_weights_mut(l, i).iter_mut().zip(&delta) {
                    *a += d;
                }
            }
        }
        if on_epoch(net, epoch) {
            return Ok(Some(epoch));
        }
    }
    Ok(None)
}

/// Whether every example's output reproduces its target exactly, with no
/// unit sitting on a threshold tie.
pub fn fits_exactly(net: &LayeredNet, data: &TrainingSet) -> Result<bool> {
    let targets = data.targets.as_ref().ok_or(Error::MissingTarget)?;
    for (x, t) in data.inputs.iter().zip(targets) {
        let pass = net.forward_pass(x, &mut Default::default())?;
        if pass.sums.last().unwrap().contains(&0.0) {
            return Ok(false);
        }
        if pass.output() != t.as_slice() {
            return Ok(false);
        }
    }
    Ok(true)
}

// Lower layers are frozen once the top layer trains, so checking the top
// layer against cached activities matches a full forward pass.
fn top_layer_fits(net: &LayeredNet, activity: &[Vec<f64>], targets: &[Vec<f64>]) -> bool {
    let l = net.depth();
    let f = net.transfers[l - 1];
    let cols = net.cols(l);
    activity.iter().zip(targets).all(|(x, t)| {
        (0..net.layer_sizes[l]).all(|i| {
            let w = net.unit_weights(l, i);
            let s = dot(&w[..cols - 1], x) + w[cols - 1];
            s != 0.0 && f.apply(s) == t[i]
        })
    })
}

/// Layer-wise local learning: unsupervised `hidden_rule` on each hidden layer
/// from the bottom up, then supervised `top_rule` on the output layer.
pub fn train_deep_local(
    mut net: LayeredNet,
    hidden_rule: &LearningRule,
    top_rule: &LearningRule,
    data: &TrainingSet,
    cfg: &DeepLocalConfig,
) -> Result<DeepLocalOutcome> {
    if hidden_rule.is_supervised() {
        return Err(Error::InvalidArgument(format!(
            "hidden rule {} uses the target; deep local learning needs an unsupervised hidden rule",
            hidden_rule.name
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let top = CompiledRule::new(top_rule);
    if top.is_supervised() && data.targets.is_none() {
        return Err(Error::MissingTarget);
    }
    if data.input_dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.input_dim(),
        });
    }
    let hidden = CompiledRule::new(hidden_rule);
    let mut r = rng::seeded(cfg.seed);
    let mut activity: Vec<Vec<f64>> = data.inputs.clone();
    let depth = net.depth();
    for l in 1..depth {
        train_layer_local(&mut net, l, &hidden, &activity, None, cfg.hidden_epochs, cfg.eta, &mut r, |_, _| false)?;
        activity = activity.iter().map(|x| net.layer_output(l, x)).collect();
    }
    let targets = data.targets.as_deref();
    let fit_epoch = if cfg.stop_when_fit {
        let t = targets.ok_or(Error::MissingTarget)?;
        train_layer_local(&mut net, depth, &top, &activity, targets, cfg.top_epochs, cfg.eta, &mut r, |n, _| {
            top_layer_fits(n, &activity, t)
        })?
    } else {
        train_layer_local(&mut net, depth, &top, &activity, targets, cfg.top_epochs, cfg.eta, &mut r, |_, _| false)?;
        fits_exactly(&net, data).ok().filter(|&ok| ok).map(|_| cfg.top_epochs)
    };
    Ok(DeepLocalOutcome { net, fit_epoch })
}
