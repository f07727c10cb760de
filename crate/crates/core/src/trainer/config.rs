use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the contrastive word model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Hinge margin `m`; cosine gaps lie in `[-2, 2]`, so `0 < m < 2`.
    pub margin: f64,
    /// Context half-width `Δ`.
    pub window: usize,
    pub dim: usize,
    /// Uniform negatives drawn per (center, window) event.
    pub negatives: usize,
    /// Initial learning rate; decays linearly to `learning_rate / 100`.
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// `1` selects the deterministic single-threaded path.
    pub threads: usize,
    /// Emit a progress record every this many events (0 disables).
    pub progress_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 0.2,
            window: 5,
            dim: 300,
            negatives: 5,
            learning_rate: 0.05,
            epochs: 1,
            seed: 1,
            threads: 1,
            progress_every: 0,
        }
    }
}

/// Final learning rate as a fraction of the initial one.
pub const LR_FLOOR: f64 = 0.01;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.margin > 0.0 && self.margin < 2.0) {
            return bad(format!("margin must lie in (0, 2), got {}", self.margin));
        }
        if self.window == 0 {
            return Err(Error::InvalidWindow(0));
        }
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Linearly decayed rate at training progress `p ∈ [0, 1]`.
    pub fn learning_rate_at(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.learning_rate * (1.0 - (1.0 - LR_FLOOR) * p)
    }
}
