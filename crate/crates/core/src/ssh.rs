//! Learnability of a single threshold unit under the supervised simple Hebb
//! rule `dw = eta * I * T`.
//!
//! Every pair `(I, T)` is replaced by `(T I, +1)`, optionally after prepending
//! a constant `+1` input for the bias. After `k` epochs at a constant rate the
//! weights are `w(0) + eta k mu_c`, where `mu_c` is the mean canonical
//! vector, so learnability reduces to the signs of `sum_t I_c(t) . I_c(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::data::TrainingSet;
use crate::netsim::train::{dot, norm, train_unit, EtaSchedule, UnitTrainConfig, WeightInit};
use crate::netsim::transfer::TransferFunction;

/// Row sums inside `(-DEGENERATE_TOL, DEGENERATE_TOL)` count as zero.
pub const DEGENERATE_TOL: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSet {
    pub vectors: Vec<Vec<f64>>,
    pub with_bias: bool,
}

impl CanonicalSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Mean canonical vector.
    pub fn mean(&self) -> Vec<f64> {
        crate::netsim::train::centroid(&self.vectors)
    }

    /// `sum_t I_c(t) . I_c(u)` for each `u`; unit `u` is eventually learnt
    /// from any start iff this is positive.
    pub fn margins(&self) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|u| self.vectors.iter().map(|t| dot(t, u)).sum())
            .collect()
    }
}

fn scalar_targets(data: &TrainingSet) -> Result<Vec<f64>> {
    data.validate()?;
    let targets = data.targets.as_ref().ok_or(Error::MissingTarget)?;
    targets
        .iter()
        .map(|t| match t.as_slice() {
            [v] if *v == 1.0 || *v == -1.0 => Ok(*v),
            _ => Err(Error::InvalidArgument(format!("targets must be scalar +1 or -1, got {t:?}"))),
        })
        .collect()
}

fn opposite(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == -*y)
}

/// Fold the targets into the inputs. Two canonical vectors that are exact
/// negatives of each other mean the set contradicts itself: opposite inputs
/// with equal targets, or (with the bias column) an input listed with both
/// targets.
pub fn canonicalize(data: &TrainingSet, with_bias: bool) -> Result<CanonicalSet> {
    let targets = scalar_targets(data)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut vectors = Vec::with_capacity(data.len());
    for (i, (x, t)) in data.inputs.iter().zip(&targets).enumerate() {
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroVector(i));
        }
        let mut v = Vec::with_capacity(x.len() + 1);
        if with_bias {
            v.push(*t);
        }
        v.extend(x.iter().map(|a| a * t));
        vectors.push(v);
    }
    for u in 0..vectors.len() {
        for v in u + 1..vectors.len() {
            if opposite(&vectors[u], &vectors[v]) {
                return Err(Error::NotConsistent(format!("examples {u} and {v} contradict each other")));
            }
        }
    }
    Ok(CanonicalSet { vectors, with_bias })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaFlags {
    pub consistent: bool,
    /// All pairwise cosines lie in `[0, 1]`.
    pub common_orthant: bool,
    pub mutually_orthogonal: bool,
    pub equal_lengths: bool,
    pub all_row_sums_positive: bool,
    /// Some row sum is within tolerance of zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineReport {
    pub cos_matrix: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
    pub flags: CriteriaFlags,
}

pub fn criteria(cset: &CanonicalSet) -> CosineReport {
    let m = cset.len();
    let norms: Vec<f64> = cset.vectors.iter().map(|v| norm(v)).collect();
    let mut cos = vec![vec![0.0; m]; m];
    for u in 0..m {
        cos[u][u] = 1.0;
        for v in u + 1..m {
            let c = (dot(&cset.vectors[u], &cset.vectors[v]) / (norms[u] * norms[v])).clamp(-1.0, 1.0);
            cos[u][v] = c;
            cos[v][u] = c;
        }
    }
    let row_sums: Vec<f64> = cos.iter().map(|r| r.iter().sum()).collect();
    let off_diag = |p: &dyn Fn(f64) -> bool| (0..m).all(|u| (0..m).all(|v| u == v || p(cos[u][v])));
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let equal_lengths = norms.iter().all(|n| (n - max_norm).abs() <= 1e-12 * max_norm);
    let consistent = (0..m).all(|u| (u + 1..m).all(|v| !opposite(&cset.vectors[u], &cset.vectors[v])));
    let flags = CriteriaFlags {
        consistent,
        common_orthant: off_diag(&|c| c >= 0.0),
        mutually_orthogonal: off_diag(&|c| c.abs() <= ORTHO_TOL),
        equal_lengths,
        all_row_sums_positive: row_sums.iter().all(|s| *s >= DEGENERATE_TOL),
        degenerate: row_sums.iter().any(|s| s.abs() < DEGENERATE_TOL),
    };
    CosineReport {
        cos_matrix: cos,
        row_sums,
        flags,
    }
}

/// Theoretical verdict: `Some(true)` when a sufficient condition holds,
/// `Some(false)` when lengths are equal and some row sum is not positive,
/// `None` otherwise.
pub fn predict(report: &CosineReport) -> Option<bool> {
    let f = &report.flags;
    if !f.consistent {
        return Some(false);
    }
    if f.common_orthant || f.mutually_orthogonal {
        return Some(true);
    }
    if f.equal_lengths {
        return Some(f.all_row_sums_positive);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// `None` picks enough epochs to outlast the initial-condition transient.
    #[serde(default)]
    pub epochs: Option<usize>,
    pub eta: f64,
    pub init: WeightInit,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            epochs: None,
            eta: 0.1,
            init: WeightInit::Zeros,
            seed: 0,
        }
    }
}

/// Smallest epoch count after which every example with a positive margin is
/// classified correctly from `w0`, at least 1.
pub fn transient_epochs(cset: &CanonicalSet, w0: &[f64], eta: f64) -> usize {
    let m = cset.len() as f64;
    let margins = cset.margins();
    let mut k = 1usize;
    for (v, d) in cset.vectors.iter().zip(margins) {
        if d <= 0.0 {
            continue;
        }
        // Need w0 . v + eta k d / m > 0.
        let need = -dot(w0, v) * m / (eta * d);
        if need >= 0.0 {
            k = k.max(need.floor() as usize + 1);
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub predicted: Option<bool>,
    pub empirical: bool,
    pub epochs: usize,
    pub report: CosineReport,
    /// Fraction of examples classified correctly after each epoch, from 0.
    pub accuracy: Vec<f64>,
}

// Margins below round-off, relative to |w||x|, sit on the threshold and do
// not count as separated.
fn accuracy(w: &[f64], inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let wn = norm(w);
    let ok = inputs
        .iter()
        .zip(targets)
        .filter(|(x, t)| dot(w, x) * **t > DEGENERATE_TOL * wn * norm(x))
        .count();
    ok as f64 / inputs.len() as f64
}

/// Theoretical prediction and clamped-Hebb training on the original set.
pub fn predict_and_verify(data: &TrainingSet, with_bias: bool, cfg: &VerifyConfig) -> Result<Verification> {
    let cset = canonicalize(data, with_bias)?;
    let report = criteria(&cset);
    let targets = scalar_targets(data)?;
    let train_set = if with_bias { data.with_bias_column() } else { data.clone() };
    let dim = train_set.input_dim();
    let w0 = cfg.init.draw(dim, &mut crate::rng::seeded(cfg.seed))?;
    let epochs = cfg.epochs.unwrap_or_else(|| transient_epochs(&cset, &w0, cfg.eta));
    let unit_cfg = UnitTrainConfig {
        transfer: TransferFunction::threshold11(),
        eta: EtaSchedule::Constant { eta: cfg.eta },
        epochs,
        seed: cfg.seed,
        init: WeightInit::Given { weights: w0 },
        shuffle: true,
    };
    let traj = train_unit(&crate::rules::clamped_hebb(), &train_set, &unit_cfg)?;
    let acc: Vec<f64> = traj
        .records
        .iter()
        .map(|r| accuracy(&r.weights, &train_set.inputs, &targets))
        .collect();
    Ok(Verification {
        predicted: predict(&report),
        empirical: *acc.last().unwrap() == 1.0,
        epochs,
        report,
        accuracy: acc,
    })
}

/// `epoch,training_accuracy` rows.
pub fn accuracy_csv(v: &Verification) -> String {
    let mut out = String::from("epoch,training_accuracy\n");
    for (e, a) in v.accuracy.iter().enumerate() {
        out.push_str(&format!("{e},{a}\n"));
    }
    out
}

/// Scaled identity `sqrt(n) I_n` with random ±1 targets.
pub fn orthogonal_family(n: usize, rng: &mut crate::rng::Rng) -> TrainingSet {
    use rand::Rng as _;
    let s = (n as f64).sqrt();
    let inputs = (0..n)
        .map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect())
        .collect();
    let targets = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    TrainingSet::with_scalar_targets(inputs, targets).expect("rectangular by construction")
}

/// Each column drawn from `[-1, 0)` or `(0, 1]`, chosen per column; all
/// targets `+1`.
pub fn common_orthant_family(m: usize, n: usize, rng: &mut crate::rng::Rng) -> TrainingSet {
    use rand::Rng as _;
    let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let inputs = (0..m)
        .map(|_| signs.iter().map(|s| s * (1.0 - rng.random::<f64>())).collect())
        .collect();
    TrainingSet::with_scalar_targets(inputs, vec![1.0; m]).expect("rectangular by construction")
}

/// Random ±1 inputs labelled by a random hyperplane through the origin.
pub fn separable_binary_family(m: usize, n: usize, rng: &mut crate::rng::Rng) -> TrainingSet {
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};
    let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let inputs: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect())
        .collect();
    let targets = inputs.iter().map(|x| if dot(&h, x) >= 0.0 { 1.0 } else { -1.0 }).collect();
    TrainingSet::with_scalar_targets(inputs, targets).expect("rectangular by construction")
}
