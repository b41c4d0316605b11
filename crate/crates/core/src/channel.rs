//! The learning channel: how much gradient information each training
//! algorithm sends back to the weights, at what cost, and how good the
//! resulting step is.
//!
//! Every algorithm produces a unit step `u`; its improvement is `u . g` with
//! `g = -G / |G|` the unit descent direction, so backpropagation scores 1.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::net::{ForwardPass, LayeredNet, OpCounter, WeightIndex};
use crate::netsim::transfer::TransferFunction;
use crate::rng::{self, derive_seed, Rng};

pub const DEFAULT_PRECISION_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `E = 1/2 sum (T - O)^2`.
    Squared,
    /// `E = -sum T ln O + (1 - T) ln (1 - O)`, outputs in (0, 1).
    CrossEntropy,
}

/// Targets for some layers of the net; the top layer alone in the usual
/// feedforward case, several time steps for an unfolded recurrent net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supervision {
    pub targets: Vec<(usize, Vec<f64>)>,
}

impl Supervision {
    pub fn top(net: &LayeredNet, target: Vec<f64>) -> Self {
        Supervision {
            targets: vec![(net.depth(), target)],
        }
    }

    fn check(&self, net: &LayeredNet) -> Result<()> {
        for (l, t) in &self.targets {
            if *l == 0 || *l > net.depth() {
                return Err(Error::InvalidArgument(format!("target for layer {l} outside 1..={}", net.depth())));
            }
            if t.len() != net.layer_sizes[*l] {
                return Err(Error::DimensionMismatch {
                    expected: net.layer_sizes[*l],
                    got: t.len(),
                });
            }
        }
        Ok(())
    }
}

fn loss_value(loss: Loss, o: f64, t: f64) -> Result<f64> {
    match loss {
        Loss::Squared => Ok(0.5 * (t - o) * (t - o)),
        Loss::CrossEntropy => {
            if !(o > 0.0 && o < 1.0) {
                return Err(Error::InvalidArgument(format!("cross-entropy needs outputs in (0,1), got {o}")));
            }
            Ok(-(t * o.ln() + (1.0 - t) * (1.0 - o).ln()))
        }
    }
}

fn loss_derivative(loss: Loss, o: f64, t: f64) -> f64 {
    match loss {
        Loss::Squared => o - t,
        Loss::CrossEntropy => (o - t) / (o * (1.0 - o)),
    }
}

fn pass_error(pass: &ForwardPass, sup: &Supervision, loss: Loss, ops: &mut OpCounter) -> Result<f64> {
    let mut e = 0.0;
    for (l, t) in &sup.targets {
        for (o, t) in pass.outputs[*l].iter().zip(t) {
            e += loss_value(loss, *o, *t)?;
        }
        ops.multiply_adds += t.len() as u64;
    }
    Ok(e)
}

/// Error on one example: a forward pass plus the loss.
pub fn evaluate_error(net: &LayeredNet, input: &[f64], sup: &Supervision, loss: Loss, ops: &mut OpCounter) -> Result<f64> {
    sup.check(net)?;
    let pass = net.forward_pass(input, ops)?;
    pass_error(&pass, sup, loss, ops)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backprop {
    pub error: f64,
    /// `dE/dw` per layer in the net's weight layout, shared groups summed.
    pub gradient: Vec<Vec<f64>>,
    /// `dE/dS` for every unit, per layer 1..=L.
    pub deltas: Vec<Vec<f64>>,
    pub ops: OpCounter,
}

/// Exact gradient by backpropagation, counting elementary operations.
pub fn backprop(net: &LayeredNet, input: &[f64], sup: &Supervision, loss: Loss) -> Result<Backprop> {
    sup.check(net)?;
    let mut ops = OpCounter::default();
    let pass = net.forward_pass(input, &mut ops)?;
    let error = pass_error(&pass, sup, loss, &mut ops)?;
    let depth = net.depth();
    let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); depth];
    let mut upstream: Vec<f64> = vec![0.0; net.layer_sizes[depth]];
    for l in (1..=depth).rev() {
        let n = net.layer_sizes[l];
        let mut de_do = std::mem::take(&mut upstream);
        for (tl, t) in &sup.targets {
            if *tl == l {
                for i in 0..n {
                    de_do[i] += loss_derivative(loss, pass.outputs[l][i], t[i]);
                }
                ops.multiply_adds += n as u64;
            }
        }
        let f = net.transfers[l - 1];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let fp = f.derivative_from_output(pass.outputs[l][i]).ok_or(Error::NonDifferentiable(l))?;
            d[i] = de_do[i] * fp;
        }
        ops.derivatives += n as u64;
        ops.multiply_adds += n as u64;
        if l > 1 {
            let c = net.cols(l);
            let prev = net.layer_sizes[l - 1];
            let mut up = vec![0.0; prev];
            for (i, di) in d.iter().enumerate() {
                let row = &net.weights[l - 1][i * c..(i + 1) * c];
                for j in 0..prev {
                    up[j] += row[j] * di;
                }
            }
            ops.multiply_adds += (n * prev) as u64;
            upstream = up;
        }
        deltas[l - 1] = d;
    }
    let mut gradient = Vec::with_capacity(depth);
    for l in 1..=depth {
        let c = net.cols(l);
        let prev = &pass.outputs[l - 1];
        let mut g = vec![0.0; net.weights[l - 1].len()];
        for (i, di) in deltas[l - 1].iter().enumerate() {
            for j in 0..c - 1 {
                g[i * c + j] = di * prev[j];
            }
            g[i * c + c - 1] = *di;
        }
        ops.multiply_adds += g.len() as u64;
        gradient.push(g);
    }
    Ok(Backprop {
        error,
        gradient: net.tie_gradient(&gradient),
        deltas,
        ops,
    })
}

/// Backprop with a target for the top layer only.
pub fn backprop_gradient(net: &LayeredNet, input: &[f64], target: &[f64], loss: Loss) -> Result<Backprop> {
    backprop(net, input, &Supervision::top(net, target.to_vec()), loss)
}

/// Free parameters: one value per shared group, then the loose entries.
pub fn params(net: &LayeredNet) -> Vec<f64> {
    net.free_parameter_indices().iter().map(|g| net.weight(g[0])).collect()
}

pub fn set_params(net: &mut LayeredNet, p: &[f64]) {
    for (g, v) in net.free_parameter_indices().iter().zip(p) {
        for &i in g {
            *net.weight_mut(i) = *v;
        }
    }
}

/// Gradient with respect to the free parameters.
pub fn param_gradient(net: &LayeredNet, per_weight: &[Vec<f64>]) -> Vec<f64> {
    let at = |i: WeightIndex| per_weight[i.layer - 1][i.row * net.cols(i.layer) + i.col];
    net.free_parameter_indices().iter().map(|g| at(g[0])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdScheme {
    Forward,
    Central,
}

/// Gradient over the free parameters by perturbing each one in turn.
pub fn finite_difference_gradient(
    net: &LayeredNet,
    input: &[f64],
    sup: &Supervision,
    loss: Loss,
    eps: f64,
    scheme: FdScheme,
    ops: &mut OpCounter,
) -> Result<Vec<f64>> {
    let p0 = params(net);
    let mut work = net.clone();
    let base = match scheme {
        FdScheme::Forward => Some(evaluate_error(net, input, sup, loss, ops)?),
        FdScheme::Central => None,
    };
    let mut g = Vec::with_capacity(p0.len());
    let mut p = p0.clone();
    for i in 0..p0.len() {
        p[i] = p0[i] + eps;
        set_params(&mut work, &p);
        let plus = evaluate_error(&work, input, sup, loss, ops)?;
        let d = match base {
            Some(e0) => (plus - e0) / eps,
            None => {
                p[i] = p0[i] - eps;
                set_params(&mut work, &p);
                let minus = evaluate_error(&work, input, sup, loss, ops)?;
                (plus - minus) / (2.0 * eps)
            }
        };
        g.push(d);
        p[i] = p0[i];
    }
    Ok(g)
}

/// Components smaller than this are compared absolutely: below it the
/// difference quotient's rounding floor dominates.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(RELATIVE_ERROR_FLOOR))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmKind {
    Bp,
    Pwgb,
    Pwlr { epsilon: f64 },
    Pwlb { epsilon: f64 },
    Palr { epsilon: f64 },
    Pwgbk { k: usize },
    Pwgrk { k: usize },
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Bp => "BP",
            AlgorithmKind::Pwgb => "PWGB",
            AlgorithmKind::Pwlr { .. } => "PWLR",
            AlgorithmKind::Pwlb { .. } => "PWLB",
            AlgorithmKind::Palr { .. } => "PALR",
            AlgorithmKind::Pwgbk { .. } => "PWGBK",
            AlgorithmKind::Pwgrk { .. } => "PWGRK",
        }
    }

    pub fn k(&self) -> usize {
        match self {
            AlgorithmKind::Pwgbk { k } | AlgorithmKind::Pwgrk { k } => *k,
            _ => 1,
        }
    }

    fn with_k(self, k: usize) -> Self {
        match self {
            AlgorithmKind::Pwgbk { .. } => AlgorithmKind::Pwgbk { k },
            AlgorithmKind::Pwgrk { .. } => AlgorithmKind::Pwgrk { k },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AlgorithmKind::Pwlr { epsilon } | AlgorithmKind::Pwlb { epsilon } | AlgorithmKind::Palr { epsilon } if !(epsilon > 0.0) => {
                Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")))
            }
            AlgorithmKind::Pwgbk { k: 0 } | AlgorithmKind::Pwgrk { k: 0 } => Err(Error::InvalidArgument("K must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelAlgorithm {
    pub kind: AlgorithmKind,
    /// Size of global weight perturbations.
    pub perturbation_scale: f64,
    /// Global binary feedback: take the opposite perturbation when the error
    /// goes up instead of staying put.
    #[serde(default = "yes")]
    pub reverse_on_failure: bool,
    #[serde(default = "default_d")]
    pub precision_bits: u32,
}

fn yes() -> bool {
    true
}

fn default_d() -> u32 {
    DEFAULT_PRECISION_BITS
}

impl ChannelAlgorithm {
    pub fn new(kind: AlgorithmKind) -> Self {
        ChannelAlgorithm {
            kind,
            perturbation_scale: 1e-4,
            reverse_on_failure: true,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub algorithm: String,
    pub w: usize,
    pub n: usize,
    pub k: usize,
    /// Bits sent back per weight.
    pub i_w: f64,
    /// Measured elementary operations per weight.
    pub c_w: f64,
    pub r: f64,
    /// `u . g`; absent when the net has no gradient.
    pub o_emp: Option<f64>,
    pub o_theory: Option<f64>,
    pub step_unit_vector: Vec<f64>,
    pub grad_norm: Option<f64>,
    pub ops: u64,
    /// Error before and after a step of size `perturbation_scale` along the
    /// applied direction (zero if a perturbation was rejected).
    pub error_before: f64,
    pub error_after: f64,
}

fn unit(v: &mut [f64]) -> Result<()> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidArgument("step direction has zero or non-finite length".into()));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(())
}

fn random_direction(w: usize, r: &mut Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..w).map(|_| StandardNormal.sample(r)).collect();
        if unit(&mut v).is_ok() {
            return v;
        }
    }
}

fn error_at(net: &LayeredNet, p: &[f64], input: &[f64], sup: &Supervision, loss: Loss, ops: &mut OpCounter) -> Result<f64> {
    let mut work = net.clone();
    set_params(&mut work, p);
    evaluate_error(&work, input, sup, loss, ops)
}

fn shifted(p0: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    p0.iter().zip(dir).map(|(a, b)| a + s * b).collect()
}

/// Number of hidden and output units.
pub fn unit_count(net: &LayeredNet) -> usize {
    net.layer_sizes[1..].iter().sum()
}

/// One step of `alg` on one example.
pub fn run(alg: &ChannelAlgorithm, net: &LayeredNet, input: &[f64], sup: &Supervision, loss: Loss, seed: u64) -> Result<ChannelReport> {
    alg.kind.validate()?;
    sup.check(net)?;
    let mut r = rng::seeded(seed);
    let p0 = params(net);
    let w = p0.len();
    let n = unit_count(net);
    let d = alg.precision_bits as f64;
    // Reference gradient for scoring; not charged to the algorithm.
    let reference = backprop(net, input, sup, loss).ok().map(|b| param_gradient(net, &b.gradient));
    let mut ops = OpCounter::default();
    let sigma = alg.perturbation_scale;
    let mut applied = 1.0;
    let (step, i_w) = match alg.kind {
        AlgorithmKind::Bp => {
            let b = backprop(net, input, sup, loss)?;
            ops = b.ops;
            let mut u: Vec<f64> = param_gradient(net, &b.gradient).iter().map(|g| -g).collect();
            unit(&mut u)?;
            (u, d)
        }
        AlgorithmKind::Pwgb => {
            let e0 = evaluate_error(net, input, sup, loss, &mut ops)?;
            let mut u = random_direction(w, &mut r);
            let e1 = error_at(net, &shifted(&p0, &u, sigma), input, sup, loss, &mut ops)?;
            ops.comparisons += 1;
            if e1 >= e0 {
                if alg.reverse_on_failure {
                    u.iter_mut().for_each(|x| *x = -*x);
                } else {
                    applied = 0.0;
                }
            }
            (u, 1.0 / w as f64)
        }
        AlgorithmKind::Pwlr { epsilon } => {
            let g = finite_difference_gradient(net, input, sup, loss, epsilon, FdScheme::Forward, &mut ops)?;
            let mut u: Vec<f64> = g.iter().map(|x| -x).collect();
            unit(&mut u)?;
            (u, d)
        }
        AlgorithmKind::Pwlb { epsilon } => {
            let e0 = evaluate_error(net, input, sup, loss, &mut ops)?;
            let a = (3.0 / w as f64).sqrt();
            let mut u = vec![0.0; w];
            let mut p = p0.clone();
            for i in 0..w {
                p[i] = p0[i] + epsilon;
                let e = error_at(net, &p, input, sup, loss, &mut ops)?;
                p[i] = p0[i];
                ops.comparisons += 1;
                let magnitude = r.random_range(0.0..=a);
                u[i] = if e > e0 {
                    -magnitude
                } else if e < e0 {
                    magnitude
                } else {
                    0.0
                };
            }
            unit(&mut u)?;
            (u, 1.0)
        }
        AlgorithmKind::Palr { epsilon } => {
            let g = activity_perturbation_gradient(net, input, sup, loss, epsilon, &mut ops)?;
            let mut u: Vec<f64> = g.iter().map(|x| -x).collect();
            unit(&mut u)?;
            (u, d)
        }
        AlgorithmKind::Pwgbk { k } => {
            let e0 = evaluate_error(net, input, sup, loss, &mut ops)?;
            let mut best: Option<(f64, Vec<f64>, f64)> = None;
            for _ in 0..k {
                let u = random_direction(w, &mut r);
                let e = error_at(net, &shifted(&p0, &u, sigma), input, sup, loss, &mut ops)?;
                ops.comparisons += 1;
                let gain = (e - e0).abs();
                if best.as_ref().is_none_or(|b| gain > b.0) {
                    best = Some((gain, u, e));
                }
            }
            let (_, mut u, e) = best.expect("k >= 1");
            if e >= e0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            (u, (k as f64).log2() / w as f64)
        }
        AlgorithmKind::Pwgrk { k } => {
            let e0 = evaluate_error(net, input, sup, loss, &mut ops)?;
            let mut u = vec![0.0; w];
            for _ in 0..k {
                let v = random_direction(w, &mut r);
                let e = error_at(net, &shifted(&p0, &v, sigma), input, sup, loss, &mut ops)?;
                let slope = (e - e0) / sigma;
                for (a, b) in u.iter_mut().zip(&v) {
                    *a -= slope * b;
                }
                ops.multiply_adds += w as u64;
            }
            unit(&mut u)?;
            (u, k as f64 * d / w as f64)
        }
    };
    let total = ops.total();
    let c_w = total as f64 / w as f64;
    let (o_emp, grad_norm) = match &reference {
        Some(g) => {
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let o = if norm > 0.0 {
                Some(-step.iter().zip(g).map(|(u, g)| u * g).sum::<f64>() / norm * applied)
            } else {
                None
            };
            (o, Some(norm))
        }
        None => (None, None),
    };
    let o_theory = theoretical_improvement(alg.kind, w, reference.as_deref());
    let mut scratch = OpCounter::default();
    let error_before = evaluate_error(net, input, sup, loss, &mut scratch)?;
    let error_after = error_at(net, &shifted(&p0, &step, sigma * applied), input, sup, loss, &mut scratch)?;
    Ok(ChannelReport {
        algorithm: alg.kind.name().to_string(),
        w,
        n,
        k: alg.kind.k(),
        i_w,
        c_w,
        r: i_w / c_w,
        o_emp,
        o_theory,
        step_unit_vector: step,
        grad_norm,
        ops: total,
        error_before,
        error_after,
    })
}

fn theoretical_improvement(kind: AlgorithmKind, w: usize, g: Option<&[f64]>) -> Option<f64> {
    let wf = w as f64;
    Some(match kind {
        AlgorithmKind::Bp | AlgorithmKind::Pwlr { .. } | AlgorithmKind::Palr { .. } => 1.0,
        AlgorithmKind::Pwgb => 1.0 / wf.sqrt(),
        AlgorithmKind::Pwlb { .. } => {
            let g = g?;
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            (3.0 / wf).sqrt() / 2.0 * g.iter().map(|x| x.abs()).sum::<f64>() / norm
        }
        AlgorithmKind::Pwgbk { k } => ((k as f64).log2() / wf).sqrt().min(1.0),
        AlgorithmKind::Pwgrk { k } => (k as f64 / wf).sqrt().min(1.0),
    })
}

/// `dE/dS` for each unit by perturbing its weighted sum, then the weight
/// gradient by the chain rule `dE/dw_ij = dE/dS_i O_j`.
pub fn activity_perturbation_gradient(
    net: &LayeredNet,
    input: &[f64],
    sup: &Supervision,
    loss: Loss,
    eps: f64,
    ops: &mut OpCounter,
) -> Result<Vec<f64>> {
    let pass = net.forward_pass(input, ops)?;
    let e0 = pass_error(&pass, sup, loss, ops)?;
    let depth = net.depth();
    let mut grads = Vec::with_capacity(depth);
    for l in 1..=depth {
        let c = net.cols(l);
        let f = net.transfers[l - 1];
        let mut g = vec![0.0; net.weights[l - 1].len()];
        for i in 0..net.layer_sizes[l] {
            let mut outputs = pass.outputs.clone();
            outputs[l][i] = f.apply(pass.sums[l - 1][i] + eps);
            ops.transfers += 1;
            for up in l + 1..=depth {
                outputs[up] = net.layer_output(up, &outputs[up - 1]);
                ops.multiply_adds += (net.layer_sizes[up] * net.cols(up)) as u64;
                ops.transfers += net.layer_sizes[up] as u64;
            }
            let perturbed = ForwardPass {
                sums: Vec::new(),
                outputs,
            };
            let delta = (pass_error(&perturbed, sup, loss, ops)? - e0) / eps;
            for j in 0..c - 1 {
                g[i * c + j] = delta * pass.outputs[l - 1][j];
            }
            g[i * c + c - 1] = delta;
            ops.multiply_adds += c as u64;
        }
        grads.push(g);
    }
    Ok(param_gradient(net, &net.tie_gradient(&grads)))
}

/// Unfold a recurrent net over `steps` time steps. Weight `(i, j)` of every
/// step is one shared parameter; self-connections and biases are frozen at 0.
pub fn unfold(recurrent: &[Vec<f64>], steps: usize, transfer: TransferFunction) -> Result<LayeredNet> {
    let n = recurrent.len();
    if steps == 0 {
        return Err(Error::InvalidArgument("unfold needs at least one step".into()));
    }
    if let Some(row) = recurrent.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: row.len(),
        });
    }
    if let Some(i) = (0..n).find(|&i| recurrent[i][i] != 0.0) {
        return Err(Error::InvalidArgument(format!("recurrent weight ({i},{i}) must be zero")));
    }
    let mut net = LayeredNet::uniform_transfer(vec![n; steps + 1], transfer)?;
    for l in 1..=steps {
        for i in 0..n {
            for j in 0..n {
                *net.weight_mut(WeightIndex::new(l, i, j)) = recurrent[i][j];
            }
            net.frozen.push(WeightIndex::new(l, i, i));
            net.frozen.push(WeightIndex::new(l, i, n));
        }
    }
    if steps > 1 {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                net.shared_groups.push((1..=steps).map(|l| WeightIndex::new(l, i, j)).collect());
            }
        }
    }
    Ok(net)
}

/// Formula and value of one algorithm under the rate/improvement analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table8Row {
    pub algorithm: String,
    pub information: String,
    pub computation: String,
    pub rate: String,
    pub improvement: String,
    pub i_w: f64,
    pub c_w: f64,
    pub r: f64,
    pub o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table8Params {
    pub w: f64,
    pub n: f64,
    pub k: f64,
    pub d: f64,
    /// The unspecified constant in the perturbation improvements.
    #[serde(default = "one")]
    pub c: f64,
    /// `sum_i |g_i|` for the sign-aligned binary local rule; `None` uses the
    /// expectation `sqrt(2W/pi)` for a random gradient direction.
    #[serde(default)]
    pub abs_gradient_sum: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Table8Params {
    pub fn new(w: f64, n: f64, k: f64, d: f64) -> Self {
        Table8Params {
            w,
            n,
            k,
            d,
            c: 1.0,
            abs_gradient_sum: None,
        }
    }
}

/// Rows in the order PWGB, PWLR, PWLB, PALR, PWGBK, PWGRK, BP. `log` is base
/// 2; improvements are capped at 1 since `u . g <= 1` for unit vectors.
pub fn table8(p: &Table8Params) -> Result<Vec<Table8Row>> {
    if [p.w, p.n, p.k, p.d].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("W, N, K and D must be positive".into()));
    }
    let Table8Params { w, n, k, d, c, .. } = *p;
    let lk = k.log2();
    let abs_sum = p.abs_gradient_sum.unwrap_or((2.0 * w / std::f64::consts::PI).sqrt());
    let row = |alg: &str, fi: &str, fc: &str, fr: &str, fo: &str, i_w: f64, c_w: f64, o: f64| Table8Row {
        algorithm: alg.into(),
        information: fi.into(),
        computation: fc.into(),
        rate: fr.into(),
        improvement: fo.into(),
        i_w,
        c_w,
        r: i_w / c_w,
        o: o.min(1.0),
    };
    Ok(vec![
        row("PWGB", "1/W", "1", "1/W", "C/sqrt(W)", 1.0 / w, 1.0, c / w.sqrt()),
        row("PWLR", "D", "W", "D/W", "1", d, w, 1.0),
        row("PWLB", "1", "W", "1/W", "(sqrt(3/W)/2) sum_i g_i", 1.0, w, (3.0 / w).sqrt() / 2.0 * abs_sum),
        row("PALR", "D", "N", "D/N", "1", d, n, 1.0),
        row("PWGBK", "log K/W", "K", "(log K/W)/K", "C sqrt(log K)/sqrt(W)", lk / w, k, c * lk.sqrt() / w.sqrt()),
        row("PWGRK", "KD/W", "K", "D/W", "C sqrt(K)/sqrt(W)", k * d / w, k, c * k.sqrt() / w.sqrt()),
        row("BP", "D", "1", "D", "1", d, 1.0, 1.0),
    ])
}

pub fn table8_markdown(rows: &[Table8Row]) -> String {
    let mut out = String::from("| Algorithm | Information I_W | Computation C_W | Rate R | Improvement O |\n|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r.algorithm, r.information, r.computation, r.rate, r.improvement
        ));
    }
    out
}

pub fn table8_csv(rows: &[Table8Row]) -> String {
    let mut out = String::from("algorithm,information,computation,rate,improvement,i_w,c_w,r,o\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},\"{}\",{},{},{},{}\n",
            r.algorithm, r.information, r.computation, r.rate, r.improvement, r.i_w, r.c_w, r.r, r.o
        ));
    }
    out
}

/// Every grid point where some algorithm beats backpropagation on rate or
/// improvement.
pub fn optimality_violations(ws: &[f64], ns: &[f64], ks: &[f64], ds: &[f64]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for &w in ws {
        for &n in ns {
            for &k in ks {
                for &d in ds {
                    let rows = table8(&Table8Params::new(w, n, k, d))?;
                    let bp = rows.iter().find(|r| r.algorithm == "BP").expect("BP row");
                    assert!(bp.r == d && bp.o == 1.0);
                    for r in rows.iter().filter(|r| r.algorithm != "BP") {
                        if r.r > bp.r || r.o > bp.o {
                            out.push(format!("{} at W={w} N={n} K={k} D={d}: R={} O={}", r.algorithm, r.r, r.o));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A random `[h, h, 1]` net with tanh hidden units and a linear output,
/// `(h + 1)^2` weights, plus one random example.
pub fn probe_net(hidden: usize, seed: u64) -> Result<(LayeredNet, Vec<f64>, Supervision)> {
    let mut net = LayeredNet::new(vec![hidden, hidden, 1], vec![TransferFunction::tanh(), TransferFunction::linear()])?;
    let mut r = rng::seeded(seed);
    for l in 1..=2 {
        let std = 1.0 / (net.layer_sizes[l - 1] as f64).sqrt();
        for w in net.weights[l - 1].iter_mut() {
            *w = std * Distribution::<f64>::sample(&StandardNormal, &mut r);
        }
    }
    let x: Vec<f64> = (0..hidden).map(|_| StandardNormal.sample(&mut r)).collect();
    let t: f64 = StandardNormal.sample(&mut r);
    let sup = Supervision::top(&net, vec![t]);
    Ok((net, x, sup))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Probe nets with these hidden widths, so `W = (h + 1)^2`.
    Width { hidden: Vec<usize> },
    /// Repeat counts at one probe width.
    Repeats { k: Vec<usize>, hidden: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fit {
    /// `ln mean O` against `ln x`.
    LogLog,
    /// `mean O` against `sqrt(ln K)`.
    SqrtLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub alg: String,
    pub w: usize,
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub o_emp: f64,
    pub ops: u64,
    pub bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub x: f64,
    pub w: usize,
    pub k: usize,
    pub mean_o: f64,
    pub mean_abs_o: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% interval on the slope.
    pub slope_ci95: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::InvalidArgument("regression needs at least 3 paired points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("regressor has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        slope_ci95: 1.96 * se,
        r2: if syy == 0.0 { 1.0 } else { 1.0 - sse / syy },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub algorithm: String,
    pub fit_kind: Fit,
    pub points: Vec<ScalingPoint>,
    pub fit: LinearFit,
    pub trials: Vec<TrialRow>,
}

impl ScalingResult {
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("alg,W,N,K,trial,O_emp,ops,bits\n");
        for t in &self.trials {
            out.push_str(&format!("{},{},{},{},{},{},{},{}\n", t.alg, t.w, t.n, t.k, t.trial, t.o_emp, t.ops, t.bits));
        }
        out
    }

    pub fn points_csv(&self) -> String {
        let mut out = String::from("x,W,K,mean_O,mean_abs_O,std_err\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{},{}\n", p.x, p.w, p.k, p.mean_o, p.mean_abs_o, p.std_err));
        }
        out
    }
}

/// Mean improvement of `alg` over independent trials at each sweep point,
/// then a regression across points.
pub fn scaling_study(alg: &ChannelAlgorithm, sweep: &Sweep, fit: Fit, trials: usize, seed: u64) -> Result<ScalingResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let settings: Vec<(usize, usize)> = match sweep {
        Sweep::Width { hidden } => hidden.iter().map(|&h| (h, alg.kind.k())).collect(),
        Sweep::Repeats { k, hidden } => k.iter().map(|&k| (*hidden, k)).collect(),
    };
    if settings.len() < 3 {
        return Err(Error::InvalidArgument("a scaling study needs at least 3 sizes".into()));
    }
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (si, &(h, k)) in settings.iter().enumerate() {
        let (net, x, sup) = probe_net(h, derive_seed(seed, si as u64))?;
        let a = ChannelAlgorithm {
            kind: alg.kind.with_k(k),
            ..*alg
        };
        let reports: Vec<Result<ChannelReport>> = (0..trials)
            .into_par_iter()
            .map(|t| run(&a, &net, &x, &sup, Loss::Squared, derive_seed(seed, ((si as u64) << 32) | t as u64 | 1 << 63)))
            .collect();
        let mut os = Vec::with_capacity(trials);
        for (t, rep) in reports.into_iter().enumerate() {
            let rep = rep?;
            let o = rep.o_emp.ok_or(Error::NonDifferentiable(0))?;
            rows.push(TrialRow {
                alg: rep.algorithm.clone(),
                w: rep.w,
                n: rep.n,
                k,
                trial: t,
                o_emp: o,
                ops: rep.ops,
                bits: rep.i_w * rep.w as f64,
            });
            os.push(o);
        }
        let m = os.len() as f64;
        let mean = os.iter().sum::<f64>() / m;
        let var = os.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>() / (m - 1.0).max(1.0);
        let w = (h + 1) * (h + 1);
        points.push(ScalingPoint {
            x: match sweep {
                Sweep::Width { .. } => w as f64,
                Sweep::Repeats { .. } => k as f64,
            },
            w,
            k,
            mean_o: mean,
            mean_abs_o: os.iter().map(|o| o.abs()).sum::<f64>() / m,
            std_err: (var / m).sqrt(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match fit {
        Fit::LogLog => points.iter().map(|p| (p.x.ln(), p.mean_abs_o.ln())).unzip(),
        Fit::SqrtLog => points.iter().map(|p| (p.x.ln().sqrt(), p.mean_o)).unzip(),
    };
    Ok(ScalingResult {
        algorithm: alg.kind.name().to_string(),
        fit_kind: fit,
        points,
        fit: ols(&xs, &ys)?,
        trials: rows,
    })
}
