use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::transfer::TransferFunction;
use crate::rng::Rng;

/// Elementary-operation tallies under a unit-cost model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub multiply_adds: u64,
    pub transfers: u64,
    pub derivatives: u64,
    pub comparisons: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.multiply_adds + self.transfers + self.derivatives + self.comparisons
    }

    pub fn add(&mut self, other: &OpCounter) {
        self.multiply_adds += other.multiply_adds;
        self.transfers += other.transfers;
        self.derivatives += other.derivatives;
        self.comparisons += other.comparisons;
    }
}

/// Address of one weight: layer `l` (1-based, as in `weights[l - 1]`), unit
/// `row`, and presynaptic index `col`, where `col == N_{l-1}` is the bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightIndex {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

impl WeightIndex {
    pub fn new(layer: usize, row: usize, col: usize) -> Self {
        WeightIndex { layer, row, col }
    }
}

/// Feedforward network. Layer `h` holds a row-major `N_h x (N_{h-1} + 1)`
/// matrix whose last column is the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredNet {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub transfers: Vec<TransferFunction>,
    #[serde(default)]
    pub shared_groups: Vec<Vec<WeightIndex>>,
    #[serde(default)]
    pub frozen: Vec<WeightIndex>,
}

/// Per-layer pre-activations and outputs; index 0 of `outputs` is the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub sums: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

impl LayeredNet {
    /// Zero-weight network; `transfers` has one entry per non-input layer.
    pub fn new(layer_sizes: Vec<usize>, transfers: Vec<TransferFunction>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument("a network needs at least two layers".into()));
        }
        if transfers.len() != layer_sizes.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: layer_sizes.len() - 1,
                got: transfers.len(),
            });
        }
        let weights = layer_sizes.windows(2).map(|p| vec![0.0; p[1] * (p[0] + 1)]).collect();
        Ok(LayeredNet {
            layer_sizes,
            weights,
            transfers,
            shared_groups: Vec::new(),
            frozen: Vec::new(),
        })
    }

    pub fn uniform_transfer(layer_sizes: Vec<usize>, transfer: TransferFunction) -> Result<Self> {
        let n = layer_sizes.len().saturating_sub(1);
        Self::new(layer_sizes, vec![transfer; n])
    }

    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Columns of layer `l`'s matrix, bias included.
    pub fn cols(&self, layer: usize) -> usize {
        self.layer_sizes[layer - 1] + 1
    }

    pub fn weight(&self, at: WeightIndex) -> f64 {
        self.weights[at.layer - 1][at.row * self.cols(at.layer) + at.col]
    }

    pub fn weight_mut(&mut self, at: WeightIndex) -> &mut f64 {
        let c = self.cols(at.layer);
        &mut self.weights[at.layer - 1][at.row * c + at.col]
    }

    /// Row of unit `row` in layer `layer`, bias last.
    pub fn unit_weights(&self, layer: usize, row: usize) -> &[f64] {
        let c = self.cols(layer);
        &self.weights[layer - 1][row * c..(row + 1) * c]
    }

    pub fn unit_weights_mut(&mut self, layer: usize, row: usize) -> &mut [f64] {
        let c = self.cols(layer);
        &mut self.weights[layer - 1][row * c..(row + 1) * c]
    }

    pub fn total_weights(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    /// Number of free parameters: frozen entries excluded, each shared group counted once.
    pub fn free_parameters(&self) -> usize {
        let mut shared = std::collections::HashSet::new();
        for g in &self.shared_groups {
            shared.extend(g.iter().copied());
        }
        let frozen: std::collections::HashSet<_> = self.frozen.iter().copied().collect();
        let loose = self
            .all_indices()
            .filter(|i| !shared.contains(i) && !frozen.contains(i))
            .count();
        let groups = self
            .shared_groups
            .iter()
            .filter(|g| g.iter().any(|i| !frozen.contains(i)))
            .count();
        loose + groups
    }

    pub fn all_indices(&self) -> impl Iterator<Item = WeightIndex> + '_ {
        (1..=self.depth()).flat_map(move |l| {
            let c = self.cols(l);
            (0..self.layer_sizes[l]).flat_map(move |r| (0..c).map(move |col| WeightIndex::new(l, r, col)))
        })
    }

    /// Independent `N(0, std^2)` weights, biases included.
    pub fn init_normal(&mut self, std: f64, rng: &mut Rng) {
        let dist = Normal::new(0.0, std).expect("finite standard deviation");
        for layer in &mut self.weights {
            for w in layer.iter_mut() {
                *w = dist.sample(rng);
            }
        }
        self.enforce_constraints();
    }

    /// Uniform in `±1/sqrt(fan_in)` with zero biases.
    pub fn init_uniform_fan_in(&mut self, rng: &mut Rng) {
        for l in 1..=self.depth() {
            let n_in = self.layer_sizes[l - 1];
            let bound = 1.0 / (n_in as f64).sqrt();
            let c = n_in + 1;
            for (k, w) in self.weights[l - 1].iter_mut().enumerate() {
                *w = if k % c == n_in { 0.0 } else { rng.random_range(-bound..=bound) };
            }
        }
        self.enforce_constraints();
    }

    /// Make shared groups agree with their first member and zero frozen entries.
    pub fn enforce_constraints(&mut self) {
        for g in self.shared_groups.clone() {
            if let Some(&first) = g.first() {
                let v = self.weight(first);
                for &i in &g[1..] {
                    *self.weight_mut(i) = v;
                }
            }
        }
        for f in self.frozen.clone() {
            *self.weight_mut(f) = 0.0;
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward_pass(&self, input: &[f64], ops: &mut OpCounter) -> Result<ForwardPass> {
        self.check_input(input)?;
        let mut outputs = Vec::with_capacity(self.depth() + 1);
        let mut sums = Vec::with_capacity(self.depth());
        outputs.push(input.to_vec());
        for l in 1..=self.depth() {
            let prev = &outputs[l - 1];
            let f = self.transfers[l - 1];
            let c = self.cols(l);
            let w = &self.weights[l - 1];
            let s: Vec<f64> = (0..self.layer_sizes[l])
                .map(|i| {
                    let row = &w[i * c..(i + 1) * c];
                    row[..c - 1].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() + row[c - 1]
                })
                .collect();
            ops.multiply_adds += (self.layer_sizes[l] * c) as u64;
            ops.transfers += self.layer_sizes[l] as u64;
            outputs.push(s.iter().map(|&v| f.apply(v)).collect());
            sums.push(s);
        }
        Ok(ForwardPass { sums, outputs })
    }

    /// All layer activations, input first.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_pass(input, &mut OpCounter::default())?.outputs)
    }

    pub fn forward_counted(&self, input: &[f64], ops: &mut OpCounter) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_pass(input, ops)?.outputs)
    }

    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.pop().unwrap_or_default())
    }

    /// Propagate an activity vector of layer `from` to the top.
    pub fn propagate_from(&self, from: usize, activity: &[f64]) -> Vec<f64> {
        let mut cur = activity.to_vec();
        for l in from + 1..=self.depth() {
            cur = self.layer_output(l, &cur);
        }
        cur
    }

    /// Output of layer `l` given the activity of layer `l - 1`.
    pub fn layer_output(&self, l: usize, prev: &[f64]) -> Vec<f64> {
        let c = self.cols(l);
        let f = self.transfers[l - 1];
        self.weights[l - 1]
            .chunks_exact(c)
            .map(|row| f.apply(row[..c - 1].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() + row[c - 1]))
            .collect()
    }

    /// Apply `w += scale * g` with shared groups summed and applied once and
    /// frozen entries left untouched.
    pub fn apply_update(&mut self, grads: &[Vec<f64>], scale: f64) -> Result<()> {
        if grads.len() != self.weights.len() || grads.iter().zip(&self.weights).any(|(g, w)| g.len() != w.len()) {
            return Err(Error::InvalidArgument("update shape does not match the network".into()));
        }
        let tied = self.tie_gradient(grads);
        for (w, g) in self.weights.iter_mut().zip(&tied) {
            for (a, b) in w.iter_mut().zip(g) {
                *a += scale * b;
            }
        }
        self.enforce_constraints();
        Ok(())
    }

    /// Per-entry gradient folded onto the free parameters: every member of a
    /// shared group receives the group sum, frozen entries receive zero.
    pub fn tie_gradient(&self, grads: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = grads.to_vec();
        for g in &self.shared_groups {
            let total: f64 = g
                .iter()
                .map(|i| grads[i.layer - 1][i.row * self.cols(i.layer) + i.col])
                .sum();
            for i in g {
                out[i.layer - 1][i.row * self.cols(i.layer) + i.col] = total;
            }
        }
        for i in &self.frozen {
            out[i.layer - 1][i.row * self.cols(i.layer) + i.col] = 0.0;
        }
        out
    }

    /// Flattened free parameters: one value per shared group, then every
    /// loose non-frozen entry in index order.
    pub fn free_parameter_indices(&self) -> Vec<Vec<WeightIndex>> {
        let mut seen = std::collections::HashSet::new();
        let frozen: std::collections::HashSet<_> = self.frozen.iter().copied().collect();
        let mut out = Vec::new();
        for g in &self.shared_groups {
            let members: Vec<_> = g.iter().copied().filter(|i| !frozen.contains(i)).collect();
            seen.extend(g.iter().copied());
            if !members.is_empty() {
                out.push(members);
            }
        }
        for i in self.all_indices() {
            if !seen.contains(&i) && !frozen.contains(&i) {
                out.push(vec![i]);
            }
        }
        out
    }
}
