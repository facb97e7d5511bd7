//! Synthetic autoregressive generators with exact value oracles.

mod config;
mod dataset;
mod generator;
mod oracle;
mod rollout;

pub use config::{load_generator, parse_generator};
pub use dataset::{build_dataset, sample_rollouts, Dataset};
pub use generator::{GeneratorSpec, MarkovGenerator, ROW_SUM_TOLERANCE};
pub use oracle::{exact_value, ValueOracle, DENSE_LIMIT};
pub use rollout::{rng_for, sample_index, sample_rollout};
