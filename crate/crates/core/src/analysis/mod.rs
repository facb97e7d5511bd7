//! TD-residual token statistics, reward shaping, finite-precision
//! resolution and loss-weighting bias.

mod precision;
mod shaping;
mod td;
mod weighting;

pub use precision::{
    logit_for_horizon, precision_curve, precision_proxy, softplus, PrecisionCurve, PrecisionPoint, DEFAULT_K_VALUES,
};
pub use shaping::{combined_advantage, shaping_rewards, telescoping_check, ShapingTrace, Telescoping};
pub use td::{
    length_token_stats, td_records, td_residual, LengthTokenStats, TdRecord, ValuedTrace, DEFAULT_TD_THRESHOLD,
};
pub use weighting::weighting_bias_demo;
