//! Config-driven experiment stages behind the `lenvm` binary. Stages
//! communicate only through files in the output directory.

mod commands;
mod config;
mod output;

pub use commands::{
    cmd_analyze, cmd_control, cmd_frontier, cmd_rollout, cmd_train, load_scorer, outputs_of, read_trajectories,
    with_overrides, JsonlHeader, Scorer, CHECKPOINT_FILE, TRAJECTORIES_FILE,
};
pub use config::{
    AnalyzeSection, ControlSection, ExperimentConfig, FrontierSection, HardRuleKind, RolloutSection, ScorerSource,
    TrainSection, OUTPUT_DIR_ENV,
};
pub use output::{digest, fmt_g9, Csv};
