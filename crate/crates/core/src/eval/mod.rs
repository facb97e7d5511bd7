//! Length metrics, boundary prediction and the pass-rate/length frontier.

mod frontier;
mod metrics;
mod prediction;

pub use frontier::{frontier_sweep, FrontierConfig, FrontierMethod, FrontierPoint};
pub use metrics::{
    ground_truth_horizon, jensen_gap, length_deviation, length_score, mre, ConstraintKind, MetricReport, K1, K2,
};
pub use prediction::{
    evaluate_boundary_predictions, predict_boundary_length, BoundaryPrediction, GROUND_TRUTH_SAMPLES,
};
