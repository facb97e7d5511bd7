//! Length value models: discounted per-token returns that predict how much
//! of a generation remains, plus the tooling to learn, check and steer with
//! them on small synthetic generators.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod analysis;
pub mod decode;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod fixtures;
pub mod horizon;
pub mod value;
pub mod world;

pub use error::{Error, Result};
pub use horizon::{DiscountSpec, ReturnSchedule, Trajectory};
