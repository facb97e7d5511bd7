use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::output::digest;
use crate::decode::Truncation;
use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;
use crate::value::{Averaging, TrainConfig, DEFAULT_HIDDEN};
use crate::world::{load_generator, MarkovGenerator};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "LENVM_OUTPUT_DIR";

/// Where decoding and analysis read state values from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScorerSource {
    /// The head written by `train`.
    #[default]
    Checkpoint,
    /// Exact values solved from the world file.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutSection {
    pub rollouts_per_prompt: usize,
    pub max_len: usize,
    /// Empty means every prompt in the world.
    pub prompts: Vec<String>,
}

impl Default for RolloutSection {
    fn default() -> Self {
        Self {
            rollouts_per_prompt: 64,
            max_len: 4096,
            prompts: Vec::new(),
        }
    }
}

/// `[train]`: every [`TrainConfig`] field plus the head shape.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub averaging: Averaging,
    pub gae_lambda: f64,
    pub shuffle: bool,
    pub validation_fraction: f64,
    pub hidden_width: usize,
    /// Adds a `step / position_scale` input when set.
    pub position_scale: Option<f64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
            epochs: d.epochs,
            averaging: d.averaging,
            gae_lambda: d.gae_lambda,
            shuffle: d.shuffle,
            validation_fraction: d.validation_fraction,
            hidden_width: DEFAULT_HIDDEN,
            position_scale: None,
        }
    }
}

impl TrainSection {
    /// SGD settings; the training seed is the experiment seed.
    pub fn sgd(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            averaging: self.averaging,
            gae_lambda: self.gae_lambda,
            seed,
            shuffle: self.shuffle,
            validation_fraction: self.validation_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardRuleKind {
    EqualTo,
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub rules: Vec<HardRuleKind>,
    pub targets: Vec<usize>,
    pub rollouts_per_prompt: usize,
    pub max_len: usize,
    pub top_k: usize,
    pub top_p: f64,
    pub min_p: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        let t = Truncation::length_control();
        Self {
            rules: vec![HardRuleKind::EqualTo, HardRuleKind::AtMost, HardRuleKind::AtLeast],
            targets: vec![8, 32],
            rollouts_per_prompt: 16,
            max_len: 4096,
            top_k: t.top_k,
            top_p: t.top_p,
            min_p: t.min_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierSection {
    pub betas: Vec<f64>,
    pub budgets: Vec<usize>,
    pub rollouts_per_prompt: usize,
    pub max_len: usize,
    pub top_k: usize,
    pub top_p: f64,
    pub min_p: f64,
}

impl Default for FrontierSection {
    fn default() -> Self {
        let t = Truncation::tilting();
        Self {
            betas: vec![0.0, -1.0, -2.0, -4.0, -8.0],
            budgets: vec![8, 16, 32, 64, 128],
            rollouts_per_prompt: 256,
            max_len: 4096,
            top_k: t.top_k,
            top_p: t.top_p,
            min_p: t.min_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub threshold: f64,
    pub k_values: Vec<f64>,
    pub horizons: Vec<f64>,
    /// Trajectories exported to the shaping table.
    pub shaping_traces: usize,
    /// Completions per prompt behind each ground-truth horizon.
    pub ground_truth_samples: usize,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            threshold: crate::analysis::DEFAULT_TD_THRESHOLD,
            k_values: crate::analysis::DEFAULT_K_VALUES.to_vec(),
            horizons: (0..=15).map(|i| f64::from(1u32 << i)).collect(),
            shaping_traces: 8,
            ground_truth_samples: crate::eval::GROUND_TRUTH_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    world: PathBuf,
    gamma: Option<f64>,
    l99: Option<u64>,
    output_dir: PathBuf,
    #[serde(default)]
    scorer: ScorerSource,
    #[serde(default)]
    rollout: RolloutSection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    control: ControlSection,
    #[serde(default)]
    frontier: FrontierSection,
    #[serde(default)]
    analyze: AnalyzeSection,
}

/// A loaded experiment: the parsed config, its world, and provenance.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub world_path: PathBuf,
    pub world: MarkovGenerator,
    pub spec: DiscountSpec,
    /// Set when gamma was derived from a 99th-percentile length.
    pub l99: Option<u64>,
    pub output_dir: PathBuf,
    pub scorer: ScorerSource,
    pub rollout: RolloutSection,
    pub train: TrainSection,
    pub control: ControlSection,
    pub frontier: FrontierSection,
    pub analyze: AnalyzeSection,
    /// SHA-256 over the config and world file contents.
    pub digest: String,
}

impl ExperimentConfig {
    /// Reads a TOML experiment file. Relative `world` and `output_dir` paths
    /// resolve against the config file's directory; `LENVM_OUTPUT_DIR`, when
    /// set, replaces `output_dir`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let env_out = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        Self::parse(&text, path, env_out)
    }

    pub fn parse(text: &str, path: &Path, output_override: Option<PathBuf>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                path: path.display().to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let world_path = base.join(&raw.world);
        let world_text = std::fs::read(&world_path).map_err(|e| Error::io(&world_path, e))?;
        let world = load_generator(&world_path)?;
        let spec = match (raw.gamma, raw.l99) {
            (Some(g), None) => DiscountSpec::new(g)?,
            (None, Some(l)) => DiscountSpec::from_l99(l)?,
            _ => return Err(Error::Config("give exactly one of `gamma` or `l99`".into())),
        };
        let output_dir = output_override.unwrap_or_else(|| base.join(&raw.output_dir));

        let rollout = raw.rollout;
        if rollout.rollouts_per_prompt < 1 {
            return Err(Error::Config("rollout.rollouts_per_prompt must be at least 1".into()));
        }
        for p in &rollout.prompts {
            world.start_state(p)?;
        }
        raw.train.sgd(raw.seed).validate().map_err(|e| Error::Config(format!("train: {e}")))?;
        if raw.train.hidden_width < 1 {
            return Err(Error::Config("train.hidden_width must be at least 1".into()));
        }
        if raw.train.position_scale.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::Config("train.position_scale must be positive".into()));
        }
        if raw.control.targets.contains(&0) || raw.control.rollouts_per_prompt < 1 {
            return Err(Error::Config("control targets and rollouts must be at least 1".into()));
        }
        if raw.frontier.betas.iter().any(|b| !(*b <= 0.0)) || raw.frontier.rollouts_per_prompt < 1 {
            return Err(Error::Config("frontier betas must be <= 0 and rollouts >= 1".into()));
        }

        Ok(Self {
            seed: raw.seed,
            world_path,
            world,
            spec,
            l99: raw.l99,
            output_dir,
            scorer: raw.scorer,
            rollout,
            train: raw.train,
            control: raw.control,
            frontier: raw.frontier,
            analyze: raw.analyze,
            digest: digest(&[text.as_bytes(), &world_text]),
        })
    }

    /// Prompts to roll out, defaulting to all of the world's prompts.
    pub fn prompts(&self) -> Vec<String> {
        if self.rollout.prompts.is_empty() {
            self.world.prompts().keys().cloned().collect()
        } else {
            self.rollout.prompts.clone()
        }
    }

    pub fn control_truncation(&self) -> Truncation {
        Truncation {
            top_k: self.control.top_k,
            top_p: self.control.top_p,
            min_p: self.control.min_p,
        }
    }

    pub fn frontier_truncation(&self) -> Truncation {
        Truncation {
            top_k: self.frontier.top_k,
            top_p: self.frontier.top_p,
            min_p: self.frontier.min_p,
        }
    }
}
