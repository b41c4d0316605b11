//! Stochastic simulation: transfer functions, layered networks, dataset
//! generators and on-line training with local rules.

pub mod data;
pub mod idx;
pub mod net;
pub mod train;
pub mod transfer;

pub use data::{generate, GeneratorSpec, TrainingSet};
pub use net::{ForwardPass, LayeredNet, OpCounter, WeightIndex};
pub use train::{
    train_deep_local, train_unit, DeepLocalConfig, EpochRecord, EtaSchedule, Trajectory, UnitTrainConfig, WeightInit,
};
pub use transfer::{TransferFunction, TransferKind};
