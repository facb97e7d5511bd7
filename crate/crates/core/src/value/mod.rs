//! The bounded value head, its losses, and training.

mod checkpoint;
mod features;
mod gae;
mod head;
mod loss;
mod train;

pub use checkpoint::{
    format_hex_f64, load_checkpoint, parse_hex_f64, read_checkpoint, save_checkpoint, write_checkpoint,
};
pub use features::FeatureMap;
pub use gae::gae_targets;
pub use head::{sigmoid, silu, value_from_logit, ValueHead, DEFAULT_HIDDEN};
pub use loss::{gradients, loss_token_avg, loss_trajectory_avg, weighted_loss, Averaging, Gradients, TokenExample};
pub use train::{train, EpochLoss, TrainConfig, TrainOutcome, TrainingSet, TrainingTrajectory};

use crate::error::Result;
use crate::world::ValueOracle;

/// Anything that can score a (non-terminal) generator state.
pub trait StateValue {
    /// Predicted length value of `state` reached after `step` emissions.
    fn state_value(&self, state: usize, step: usize) -> Result<f64>;
}

/// A trained head paired with the feature map it was trained with.
#[derive(Debug, Clone, Copy)]
pub struct HeadScorer<'a> {
    pub head: &'a ValueHead,
    pub features: &'a FeatureMap,
}

impl<'a> HeadScorer<'a> {
    pub fn new(head: &'a ValueHead, features: &'a FeatureMap) -> Self {
        Self { head, features }
    }
}

impl StateValue for HeadScorer<'_> {
    fn state_value(&self, state: usize, step: usize) -> Result<f64> {
        self.head.predict(&self.features.encode(state, step))
    }
}

impl StateValue for ValueOracle {
    fn state_value(&self, state: usize, _step: usize) -> Result<f64> {
        Ok(self.value[state])
    }
}
