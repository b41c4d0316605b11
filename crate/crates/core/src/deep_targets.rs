//! Sampling deep targets: layer-by-layer training of a layered net, including
//! non-differentiable ones, by choosing a target for each hidden layer from a
//! sample of candidate activities and fitting that layer to it.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::data::{clustered_binary_split, TrainingSet};
use crate::netsim::net::LayeredNet;
use crate::netsim::transfer::{TransferFunction, TransferKind};
use crate::rng::{self, derive_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    /// The layer's current activities over the training set.
    TrainingActivities,
    /// `count` vectors near each example's current activity: up to `radius`
    /// flipped components on binary layers, Gaussian noise of width `sigma`
    /// on continuous ones.
    SmallPerturbation { radius: usize, sigma: f64, count: usize },
    /// `count` random binary vectors, each component high with probability `p`.
    LargeRandom { p: f64, count: usize },
    /// Every binary vector, on layers no wider than the exhaustive cap.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    ClosestToCurrent,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub strategies: Vec<Strategy>,
    /// Upper bound on the shared sample set after deduplication.
    pub sample_cap: usize,
    pub tie_break: TieBreak,
    #[serde(default = "default_exhaustive_cap")]
    pub exhaustive_cap: usize,
}

fn default_exhaustive_cap() -> usize {
    12
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            strategies: vec![
                Strategy::TrainingActivities,
                Strategy::LargeRandom { p: 0.5, count: 1000 },
                Strategy::Exhaustive,
            ],
            sample_cap: 4096,
            tie_break: TieBreak::ClosestToCurrent,
            exhaustive_cap: default_exhaustive_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Order {
    BottomUp,
    TopDown,
    /// Up then back down, without repeating the top layer.
    Alternating,
    Interleaved { layers: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub order: Order,
    pub epochs: usize,
}

impl ScheduleSpec {
    /// Layers visited in one epoch of a net with `depth` adjustable layers.
    pub fn sequence(&self, depth: usize) -> Result<Vec<usize>> {
        let seq: Vec<usize> = match &self.order {
            Order::BottomUp => (1..=depth).collect(),
            Order::TopDown => (1..=depth).rev().collect(),
            Order::Alternating => (1..=depth).chain((1..depth).rev()).collect(),
            Order::Interleaved { layers } => layers.clone(),
        };
        if let Some(bad) = seq.iter().find(|&&l| l == 0 || l > depth) {
            return Err(Error::InvalidArgument(format!("schedule names layer {bad}, net has layers 1..={depth}")));
        }
        if let Some(missing) = (1..=depth).find(|l| !seq.contains(l)) {
            return Err(Error::InvalidArgument(format!("schedule never visits layer {missing}")));
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distortion {
    Hamming,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaKind {
    /// Batch perceptron: `dw = rate * sum_t (T - O) x`.
    Perceptron { iterations: usize, rate: f64 },
    /// Batch LMS on the weighted sum: `dw = rate / M * sum_t (T - S) x`.
    DeltaRule { iterations: usize, rate: f64 },
    /// Best integer weights in `[-max_abs, max_abs]` per unit. Only for tiny layers.
    ExhaustiveInteger { max_abs: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerOptimizer {
    pub kind: ThetaKind,
    pub distortion: Distortion,
}

impl Default for LayerOptimizer {
    fn default() -> Self {
        LayerOptimizer {
            kind: ThetaKind::Perceptron { iterations: 10, rate: 1.0 },
            distortion: Distortion::Hamming,
        }
    }
}

/// Definition-2 target equivalent to a Definition-1 update `F`:
/// `T = F / (eta o_pre) + o_post`.
pub fn rule_to_target(f_value: f64, o_post: f64, o_pre: f64, eta: f64) -> Result<f64> {
    if o_pre == 0.0 {
        return Err(Error::ZeroPresynaptic);
    }
    if eta == 0.0 {
        return Err(Error::InvalidArgument("eta must be non-zero".into()));
    }
    Ok(f_value / (eta * o_pre) + o_post)
}

fn binary_levels(f: &TransferFunction) -> Option<(f64, f64)> {
    match f.kind {
        TransferKind::Threshold11 => Some((-1.0, 1.0)),
        TransferKind::Threshold01 => Some((0.0, 1.0)),
        _ => None,
    }
}

/// Rows packed for fast distortion: one bit per component on binary layers
/// under Hamming distortion, raw values otherwise.
struct Codes {
    dim: usize,
    words: usize,
    bits: Vec<u64>,
    real: Vec<f64>,
    packed: bool,
    levels: (f64, f64),
    distortion: Distortion,
}

impl Codes {
    fn new(rows: &[Vec<f64>], dim: usize, levels: Option<(f64, f64)>, distortion: Distortion) -> Self {
        let words = dim.div_ceil(64);
        let packed = distortion == Distortion::Hamming
            && levels.is_some_and(|(lo, hi)| rows.iter().flatten().all(|&v| v == lo || v == hi));
        let mut c = Codes {
            dim,
            words,
            bits: Vec::new(),
            real: Vec::new(),
            packed,
            levels: levels.unwrap_or((0.0, 1.0)),
            distortion,
        };
        for r in rows {
            c.push(r);
        }
        c
    }

    fn push(&mut self, row: &[f64]) {
        if self.packed {
            let hi = self.levels.1;
            let start = self.bits.len();
            self.bits.resize(start + self.words, 0);
            for (k, &v) in row.iter().enumerate() {
                if v == hi {
                    self.bits[start + k / 64] |= 1 << (k % 64);
                }
            }
        } else {
            self.real.extend_from_slice(row);
        }
    }

    fn dist(&self, i: usize, other: &Codes, j: usize) -> f64 {
        if self.packed && other.packed {
            let a = &self.bits[i * self.words..(i + 1) * self.words];
            let b = &other.bits[j * other.words..(j + 1) * other.words];
            return a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum::<u32>() as f64;
        }
        let a = self.row(i);
        let b = other.row(j);
        distortion(self.distortion, &a, &b)
    }

    fn row(&self, i: usize) -> Vec<f64> {
        if self.packed {
            let (lo, hi) = self.levels;
            (0..self.dim)
                .map(|k| if (self.bits[i * self.words + k / 64] >> (k % 64)) & 1 == 1 { hi } else { lo })
                .collect()
        } else {
            self.real[i * self.dim..(i + 1) * self.dim].to_vec()
        }
    }
}

pub fn distortion(kind: Distortion, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        Distortion::Hamming => a.iter().zip(b).filter(|(x, y)| x != y).count() as f64,
        Distortion::SquaredError => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
    }
}

fn key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

struct SampleSet {
    rows: Vec<Vec<f64>>,
    seen: HashMap<Vec<u64>, ()>,
    cap: usize,
}

impl SampleSet {
    fn push(&mut self, v: Vec<f64>) {
        if self.rows.len() < self.cap && self.seen.insert(key(&v), ()).is_none() {
            self.rows.push(v);
        }
    }
}

fn perturb(current: &[f64], levels: Option<(f64, f64)>, range: (f64, f64), radius: usize, sigma: f64, r: &mut Rng) -> Result<Vec<f64>> {
    let mut v = current.to_vec();
    match levels {
        Some((lo, hi)) => {
            let k = r.random_range(1..=radius.max(1).min(v.len()));
            let idx = rand::seq::index::sample(r, v.len(), k);
            for i in idx {
                v[i] = if v[i] == hi { lo } else { hi };
            }
        }
        None => {
            let d = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for x in &mut v {
                *x = (*x + d.sample(r)).clamp(range.0, range.1);
            }
        }
    }
    Ok(v)
}

/// Candidate activities for layer `h` shared by all examples.
fn shared_samples(
    width: usize,
    levels: Option<(f64, f64)>,
    current: &[Vec<f64>],
    sampler: &SamplerSpec,
    r: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let mut set = SampleSet {
        rows: Vec::new(),
        seen: HashMap::new(),
        cap: sampler.sample_cap,
    };
    let exhaustive = sampler.strategies.contains(&Strategy::Exhaustive) && width <= sampler.exhaustive_cap;
    if exhaustive {
        let (lo, hi) = levels.ok_or_else(|| Error::InvalidArgument("exhaustive sampling needs a binary layer".into()))?;
        if (1usize << width) > sampler.sample_cap {
            return Err(Error::AboveCap {
                what: format!("2^{width} exhaustive samples"),
                cap: sampler.sample_cap,
            });
        }
        for code in 0..1usize << width {
            set.push((0..width).map(|k| if code >> k & 1 == 1 { hi } else { lo }).collect());
        }
        return Ok(set.rows);
    }
    for s in &sampler.strategies {
        match s {
            Strategy::TrainingActivities => current.iter().for_each(|c| set.push(c.clone())),
            Strategy::LargeRandom { p, count } => {
                let (lo, hi) = levels.unwrap_or((0.0, 1.0));
                for _ in 0..*count {
                    set.push((0..width).map(|_| if r.random_bool(*p) { hi } else { lo }).collect());
                }
            }
            Strategy::SmallPerturbation { .. } | Strategy::Exhaustive => {}
        }
    }
    Ok(set.rows)
}

/// The shared candidate set for layer `h` given the layer's current
/// activities over the training set.
pub fn candidates(net: &LayeredNet, h: usize, current: &[Vec<f64>], sampler: &SamplerSpec, seed: u64) -> Result<Vec<Vec<f64>>> {
    let levels = binary_levels(&net.transfers[h - 1]);
    shared_samples(net.layer_sizes[h], levels, current, sampler, &mut rng::seeded(seed))
}

/// Examples grouped by identical activity in layer `h - 1`, in order of
/// first appearance.
fn group_by_activity(below: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (t, v) in below.iter().enumerate() {
        let g = *index.entry(key(v)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(t);
    }
    groups
}

/// Targets for layer `h` of every example. `acts[l][t]` is the activity of
/// layer `l` on example `t`. Examples sharing a layer `h - 1` activity get a
/// common target minimising the summed output distortion over their final
/// targets.
fn layer_targets(
    net: &LayeredNet,
    h: usize,
    acts: &[Vec<Vec<f64>>],
    finals: &[Vec<f64>],
    sampler: &SamplerSpec,
    dist: Distortion,
    r: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let depth = net.depth();
    if h == depth {
        return Ok(finals.to_vec());
    }
    let f_h = net.transfers[h - 1];
    let levels_h = binary_levels(&f_h);
    let levels_out = binary_levels(&net.transfers[depth - 1]);
    let width = net.layer_sizes[h];
    let out_dim = net.output_dim();
    let current = &acts[h];
    let shared = shared_samples(width, levels_h, current, sampler, r)?;
    let shared_out: Vec<Vec<f64>> = shared.iter().map(|s| net.propagate_from(h, s)).collect();
    let shared_codes = Codes::new(&shared_out, out_dim, levels_out, dist);
    let final_codes = Codes::new(finals, out_dim, levels_out, dist);
    let perturbation: Vec<(usize, f64, usize)> = sampler
        .strategies
        .iter()
        .filter_map(|s| match s {
            Strategy::SmallPerturbation { radius, sigma, count } => Some((*radius, *sigma, *count)),
            _ => None,
        })
        .collect();
    if shared.is_empty() && perturbation.iter().all(|p| p.2 == 0) {
        return Err(Error::EmptySampleSet);
    }
    let mut targets = vec![Vec::new(); finals.len()];
    for group in group_by_activity(&acts[h - 1]) {
        let cur = &current[group[0]];
        let mut local = Vec::new();
        for &(radius, sigma, count) in &perturbation {
            for _ in 0..count {
                local.push(perturb(cur, levels_h, f_h.range(), radius, sigma, r)?);
            }
        }
        let local_out: Vec<Vec<f64>> = local.iter().map(|s| net.propagate_from(h, s)).collect();
        let local_codes = Codes::new(&local_out, out_dim, levels_out, dist);
        let cost = |codes: &Codes, i: usize| group.iter().map(|&t| codes.dist(i, &final_codes, t)).sum::<f64>();
        let mut best = f64::INFINITY;
        let mut argmin: Vec<&Vec<f64>> = Vec::new();
        let candidates = (0..shared.len())
            .map(|i| (cost(&shared_codes, i), &shared[i]))
            .chain((0..local.len()).map(|i| (cost(&local_codes, i), &local[i])));
        for (c, s) in candidates {
            if c < best {
                best = c;
                argmin.clear();
            }
            if c == best {
                argmin.push(s);
            }
        }
        let chosen = match sampler.tie_break {
            TieBreak::Random => (*argmin.choose(r).expect("non-empty candidates")).clone(),
            TieBreak::ClosestToCurrent => {
                let mut pick = argmin[0];
                let mut d_best = distortion(dist, pick, cur);
                for s in &argmin[1..] {
                    let d = distortion(dist, s, cur);
                    if d < d_best {
                        d_best = d;
                        pick = s;
                    }
                }
                pick.clone()
            }
        };
        for &t in &group {
            targets[t] = chosen.clone();
        }
    }
    Ok(targets)
}

/// Target for layer `h` on a single example. The training-activity strategy
/// contributes the example's own current activity.
pub fn sample_target(
    net: &LayeredNet,
    h: usize,
    input: &[f64],
    final_target: &[f64],
    sampler: &SamplerSpec,
    dist: Distortion,
    seed: u64,
) -> Result<Vec<f64>> {
    if h == 0 || h > net.depth() {
        return Err(Error::InvalidArgument(format!("layer {h} outside 1..={}", net.depth())));
    }
    let acts: Vec<Vec<Vec<f64>>> = net.forward(input)?.into_iter().map(|a| vec![a]).collect();
    let mut r = rng::seeded(seed);
    Ok(layer_targets(net, h, &acts, &[final_target.to_vec()], sampler, dist, &mut r)?.remove(0))
}

fn augmented(x: &[f64]) -> impl Iterator<Item = f64> + '_ {
    x.iter().copied().chain(std::iter::once(1.0))
}

fn unit_sum(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(augmented(x)).map(|(a, b)| a * b).sum()
}

/// Fit layer `h` to `targets` from `inputs` (layer `h - 1` activities) with
/// all other layers fixed. Returns the summed distortion between the layer's
/// new outputs and the targets.
pub fn optimize_layer(
    net: &mut LayeredNet,
    h: usize,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    theta: &LayerOptimizer,
) -> Result<f64> {
    let rows = net.layer_sizes[h];
    let cols = net.cols(h);
    if let Some(t) = targets.iter().find(|t| t.len() != rows) {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: t.len(),
        });
    }
    let f = net.transfers[h - 1];
    let m = inputs.len().max(1) as f64;
    match theta.kind {
        ThetaKind::Perceptron { iterations, rate } | ThetaKind::DeltaRule { iterations, rate } => {
            if iterations == 0 {
                return Err(Error::InvalidArgument("optimizer needs at least one iteration".into()));
            }
            let lms = matches!(theta.kind, ThetaKind::DeltaRule { .. });
            for i in 0..rows {
                for _ in 0..iterations {
                    let w = net.unit_weights(h, i);
                    let mut dw = vec![0.0; cols];
                    let mut moved = false;
                    for (x, t) in inputs.iter().zip(targets) {
                        let s = unit_sum(w, x);
                        let err = if lms { (t[i] - s) / m } else { t[i] - f.apply(s) };
                        if err != 0.0 {
                            moved = true;
                            for (d, xv) in dw.iter_mut().zip(augmented(x)) {
                                *d += rate * err * xv;
                            }
                        }
                    }
                    if !moved {
                        break;
                    }
                    for (a, d) in net.unit_weights_mut(h, i).iter_mut().zip(&dw) {
                        *a += d;
                    }
                }
            }
        }
        ThetaKind::ExhaustiveInteger { max_abs } => {
            let side = (2 * max_abs + 1) as u64;
            let count = side.checked_pow(cols as u32).filter(|&c| c <= 10_000_000).ok_or(Error::AboveCap {
                what: format!("{side}^{cols} integer weight vectors"),
                cap: 10_000_000,
            })?;
            for i in 0..rows {
                let mut best = (f64::INFINITY, Vec::new());
                let mut w = vec![0.0; cols];
                for code in 0..count {
                    let mut c = code;
                    for v in w.iter_mut() {
                        *v = (c % side) as f64 - max_abs as f64;
                        c /= side;
                    }
                    let e: f64 = inputs
                        .iter()
                        .zip(targets)
                        .map(|(x, t)| distortion(theta.distortion, &[f.apply(unit_sum(&w, x))], &[t[i]]))
                        .sum();
                    if e < best.0 {
                        best = (e, w.clone());
                    }
                }
                net.unit_weights_mut(h, i).copy_from_slice(&best.1);
            }
        }
    }
    Ok(inputs
        .iter()
        .zip(targets)
        .map(|(x, t)| distortion(theta.distortion, &net.layer_output(h, x), t))
        .sum())
}

/// Activities of every layer (input included) on every example.
pub fn activities(net: &LayeredNet, inputs: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut acts = vec![Vec::with_capacity(inputs.len()); net.depth() + 1];
    for x in inputs {
        for (l, a) in net.forward(x)?.into_iter().enumerate() {
            acts[l].push(a);
        }
    }
    Ok(acts)
}

/// Mean distortion per output component and per example.
pub fn mean_error(net: &LayeredNet, data: &TrainingSet, dist: Distortion) -> Result<f64> {
    let targets = data.targets.as_ref().ok_or(Error::MissingTarget)?;
    let mut total = 0.0;
    for (x, t) in data.inputs.iter().zip(targets) {
        total += distortion(dist, &net.output(x)?, t);
    }
    Ok(total / (data.len().max(1) * net.output_dim()) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeepTargetsConfig {
    pub schedule: ScheduleSpec,
    pub sampler: SamplerSpec,
    pub theta: LayerOptimizer,
    pub seed: u64,
    /// Re-sample targets before each layer visit using the freshest upper
    /// layers; otherwise all targets of an epoch come from its starting net.
    #[serde(default = "yes")]
    pub resample_each_visit: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochError {
    pub epoch: usize,
    pub train_error: f64,
    pub test_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub epoch: usize,
    pub layer: usize,
    pub error_before: f64,
    pub error_after: f64,
    /// Distortion left between the layer's outputs and its targets after Θ.
    pub target_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepTargetsRun {
    pub net: LayeredNet,
    /// Epoch 0 holds the initial errors.
    pub epochs: Vec<EpochError>,
    pub visits: Vec<VisitRecord>,
}

impl DeepTargetsRun {
    /// `epoch,train_error,test_error` rows; the test column is empty without a test set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_error,test_error\n");
        for e in &self.epochs {
            let test = e.test_error.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_error, test));
        }
        out
    }
}

pub fn train(mut net: LayeredNet, data: &TrainingSet, test: Option<&TrainingSet>, cfg: &DeepTargetsConfig) -> Result<DeepTargetsRun> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let finals = data.targets.as_ref().ok_or(Error::MissingTarget)?;
    if data.input_dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.input_dim(),
        });
    }
    let seq = cfg.schedule.sequence(net.depth())?;
    let dist = cfg.theta.distortion;
    let record = |net: &LayeredNet, epoch: usize| -> Result<EpochError> {
        Ok(EpochError {
            epoch,
            train_error: mean_error(net, data, dist)?,
            test_error: test.map(|t| mean_error(net, t, dist)).transpose()?,
        })
    };
    let mut epochs = vec![record(&net, 0)?];
    let mut visits = Vec::new();
    for epoch in 1..=cfg.schedule.epochs {
        let mut precomputed: Option<HashMap<usize, Vec<Vec<f64>>>> = None;
        if !cfg.resample_each_visit {
            let acts = activities(&net, &data.inputs)?;
            let mut map = HashMap::new();
            for (v, &h) in seq.iter().enumerate() {
                if let std::collections::hash_map::Entry::Vacant(e) = map.entry(h) {
                    let mut r = rng::seeded(derive_seed(cfg.seed, (epoch as u64) << 16 | v as u64));
                    e.insert(layer_targets(&net, h, &acts, finals, &cfg.sampler, dist, &mut r)?);
                }
            }
            precomputed = Some(map);
        }
        for (v, &h) in seq.iter().enumerate() {
            let acts = activities(&net, &data.inputs)?;
            let error_before = mean_error(&net, data, dist)?;
            let targets = match &precomputed {
                Some(map) => map[&h].clone(),
                None => {
                    let mut r = rng::seeded(derive_seed(cfg.seed, (epoch as u64) << 16 | v as u64));
                    layer_targets(&net, h, &acts, finals, &cfg.sampler, dist, &mut r)?
                }
            };
            let target_mismatch = optimize_layer(&mut net, h, &acts[h - 1], &targets, &cfg.theta)?;
            visits.push(VisitRecord {
                epoch,
                layer: h,
                error_before,
                error_after: mean_error(&net, data, dist)?,
                target_mismatch,
            });
        }
        epochs.push(record(&net, epoch)?);
    }
    Ok(DeepTargetsRun { net, epochs, visits })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoencoderConfig {
    pub layer_sizes: Vec<usize>,
    pub n_clusters: usize,
    pub per_cluster: usize,
    pub flip_prob: f64,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: Option<SamplerSpec>,
    #[serde(default)]
    pub theta: Option<LayerOptimizer>,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            layer_sizes: vec![100, 30, 10, 30, 100],
            n_clusters: 10,
            per_cluster: 100,
            flip_prob: 0.05,
            epochs: 100,
            seed: 0,
            sampler: None,
            theta: None,
        }
    }
}

/// Threshold-gate autoencoder on noisy copies of random binary centroids,
/// trained bottom-up one layer per visit.
pub fn autoencoder_experiment(cfg: &AutoencoderConfig) -> Result<DeepTargetsRun> {
    let n_bits = *cfg.layer_sizes.first().ok_or(Error::InvalidArgument("empty layer sizes".into()))?;
    if cfg.layer_sizes.last() != Some(&n_bits) {
        return Err(Error::InvalidArgument("an autoencoder needs equal input and output widths".into()));
    }
    let (train_set, test_set) = clustered_binary_split(cfg.n_clusters, cfg.per_cluster, n_bits, cfg.flip_prob, derive_seed(cfg.seed, 1))?;
    let mut net = LayeredNet::uniform_transfer(cfg.layer_sizes.clone(), TransferFunction::threshold11())?;
    net.init_uniform_fan_in(&mut rng::seeded(derive_seed(cfg.seed, 2)));
    let dt = DeepTargetsConfig {
        schedule: ScheduleSpec {
            order: Order::BottomUp,
            epochs: cfg.epochs,
        },
        sampler: cfg.sampler.clone().unwrap_or_default(),
        theta: cfg.theta.clone().unwrap_or_default(),
        seed: derive_seed(cfg.seed, 3),
        resample_each_visit: true,
    };
    train(net, &train_set, Some(&test_set), &dt)
}
