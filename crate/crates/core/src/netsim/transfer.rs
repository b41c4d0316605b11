use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Linear,
    Logistic01,
    Tanh11,
    Threshold01,
    Threshold11,
}

/// Unit transfer `O = f(slope * S)`. Threshold gates map a tie `S = 0` to
/// the upper value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferFunction {
    pub kind: TransferKind,
    #[serde(default = "one")]
    pub slope: f64,
}

fn one() -> f64 {
    1.0
}

impl TransferFunction {
    pub const fn new(kind: TransferKind) -> Self {
        TransferFunction { kind, slope: 1.0 }
    }

    pub const fn linear() -> Self {
        Self::new(TransferKind::Linear)
    }

    pub const fn logistic() -> Self {
        Self::new(TransferKind::Logistic01)
    }

    pub const fn tanh() -> Self {
        Self::new(TransferKind::Tanh11)
    }

    pub const fn threshold01() -> Self {
        Self::new(TransferKind::Threshold01)
    }

    pub const fn threshold11() -> Self {
        Self::new(TransferKind::Threshold11)
    }

    pub fn with_slope(mut self, slope: f64) -> Self {
        self.slope = slope;
        self
    }

    pub fn apply(&self, s: f64) -> f64 {
        let x = self.slope * s;
        match self.kind {
            TransferKind::Linear => x,
            TransferKind::Logistic01 => logistic(x),
            TransferKind::Tanh11 => x.tanh(),
            TransferKind::Threshold01 => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TransferKind::Threshold11 => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `df/dS` expressed through the output `o = f(S)`; `None` for threshold gates.
    pub fn derivative_from_output(&self, o: f64) -> Option<f64> {
        let l = self.slope;
        match self.kind {
            TransferKind::Linear => Some(l),
            TransferKind::Logistic01 => Some(l * o * (1.0 - o)),
            TransferKind::Tanh11 => Some(l * (1.0 - o * o)),
            TransferKind::Threshold01 | TransferKind::Threshold11 => None,
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self.kind, TransferKind::Threshold01 | TransferKind::Threshold11)
    }

    /// Output range `(low, high)`.
    pub fn range(&self) -> (f64, f64) {
        match self.kind {
            TransferKind::Linear => (f64::NEG_INFINITY, f64::INFINITY),
            TransferKind::Logistic01 | TransferKind::Threshold01 => (0.0, 1.0),
            TransferKind::Tanh11 | TransferKind::Threshold11 => (-1.0, 1.0),
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
