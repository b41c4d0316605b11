//! Experiment documents. Every struct rejects unknown keys.

use std::path::{Path, PathBuf};

use locallearn::boolean::LearnConfig;
use locallearn::channel::{ChannelAlgorithm, Fit, Loss, Sweep};
use locallearn::deep_targets::AutoencoderConfig;
use locallearn::hopfield::{RuleCoeffs, SearchConfig};
use locallearn::netsim::data::GeneratorSpec;
use locallearn::netsim::train::{EtaSchedule, WeightInit};
use locallearn::netsim::transfer::TransferFunction;
use locallearn::rules::{self, LearningRule};
use locallearn::ssh::VerifyConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Typed parameters for `experiment`, checking the document names the
    /// same experiment when it names one.
    pub fn params<T: DeserializeOwned>(&self, experiment: &str) -> Result<T, Failure> {
        if let Some(e) = &self.experiment {
            if e.replace('_', "-") != experiment {
                return Err(Failure::Config(format!("config is for experiment {e}, not {experiment}")));
            }
        }
        serde_json::from_value(self.params.clone()).map_err(|e| Failure::Config(format!("params: {e}")))
    }
}

/// A catalog name such as `"oja"` or `"fixed_decay(0.5)"`, or a full term list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Named(String),
    Terms(LearningRule),
}

impl RuleSpec {
    pub fn resolve(&self) -> Result<LearningRule, Failure> {
        match self {
            RuleSpec::Named(name) => rules::lookup(name).map_err(|e| Failure::Config(e.to_string())),
            RuleSpec::Terms(rule) => {
                rule.validate(5).map_err(|e| Failure::Config(e.to_string()))?;
                Ok(rule.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsParams {
    pub data: GeneratorSpec,
    #[serde(default)]
    pub rule: Option<RuleSpec>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_epochs")]
    pub epochs: u64,
    #[serde(default)]
    pub w0: Option<Vec<f64>>,
}

fn default_eta() -> f64 {
    0.01
}

fn default_epochs() -> u64 {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub data: GeneratorSpec,
    pub rule: RuleSpec,
    #[serde(default = "linear")]
    pub transfer: TransferFunction,
    #[serde(default)]
    pub eta: EtaSchedule,
    #[serde(default = "default_epochs_usize")]
    pub epochs: usize,
    #[serde(default = "default_init")]
    pub init: WeightInit,
    #[serde(default = "yes")]
    pub shuffle: bool,
    /// Append a constant `+1` input.
    #[serde(default)]
    pub bias: bool,
}

fn linear() -> TransferFunction {
    TransferFunction::linear()
}

fn default_epochs_usize() -> usize {
    50
}

fn default_init() -> WeightInit {
    WeightInit::Normal { std: 0.1 }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BooleanParams {
    pub n: usize,
    #[serde(default)]
    pub monotone: bool,
    #[serde(default)]
    pub rules: Option<Vec<RuleSpec>>,
    #[serde(default)]
    pub learn: LearnConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SshParams {
    pub data: GeneratorSpec,
    #[serde(default)]
    pub with_bias: bool,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub algorithm: ChannelAlgorithm,
    pub sweep: Sweep,
    pub fit: Fit,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// `(W, N, K, D)` at which to evaluate the theoretical table.
    #[serde(default = "default_table_point")]
    pub table: [f64; 4],
    #[serde(default = "squared")]
    pub loss: Loss,
}

fn default_trials() -> usize {
    1000
}

fn default_table_point() -> [f64; 4] {
    [1024.0, 63.0, 16.0, 64.0]
}

fn squared() -> Loss {
    Loss::Squared
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfieldParams {
    pub n: usize,
    #[serde(default = "hebb")]
    pub rule: RuleCoeffs,
    #[serde(default)]
    pub search: Option<SearchConfig>,
    /// Stored patterns of `+1`/`-1`; their orientation is written as an edge list.
    #[serde(default)]
    pub memories: Option<Vec<Vec<i8>>>,
}

fn hebb() -> RuleCoeffs {
    RuleCoeffs::HEBB
}

pub type DeepTargetsParams = AutoencoderConfig;
