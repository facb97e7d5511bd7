//! Value-guided decoding: hard length constraints and exponential tilting.

mod candidates;
mod controller;
mod select;
mod tilt;

pub use candidates::{build_candidates, Candidate, CandidateSet, Truncation};
pub use controller::{decode_many, run_controlled_decode, ControlRule, ControlledDecode, DecodeReport};
pub use select::{select_at_least, select_at_most, select_equal_to, target_value_schedule};
pub use tilt::{kl_objective, kl_objective_scores, tilt, tilt_distribution};
