use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::FeatureMap;
use super::gae::gae_targets;
use super::head::ValueHead;
use super::loss::{gradients, weighted_loss, Averaging, TokenExample};
use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;
use crate::world::{rng_for, Dataset};

/// Minibatch SGD settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Tokens per minibatch.
    pub batch_size: usize,
    pub epochs: usize,
    pub averaging: Averaging,
    pub gae_lambda: f64,
    pub seed: u64,
    /// Fully shuffled token batches when true; prompt-grouped batches
    /// otherwise.
    pub shuffle: bool,
    /// Fraction of trajectories held out for validation. When the split
    /// would leave either side empty the training set doubles as validation.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            batch_size: 64,
            epochs: 50,
            averaging: Averaging::TokenAvg,
            gae_lambda: 1.0,
            seed: 0,
            shuffle: true,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::InvalidArgument("gae_lambda must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidArgument("validation_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Features and Monte Carlo targets for the non-terminal steps of one
/// trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrajectory {
    pub prompt_id: String,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl TrainingTrajectory {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Regression data for the value head.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub trajectories: Vec<TrainingTrajectory>,
}

impl TrainingSet {
    /// Encodes every completed trajectory of `dataset`.
    pub fn from_dataset(dataset: &Dataset, features: &FeatureMap) -> Self {
        let trajectories = dataset
            .pairs
            .iter()
            .map(|(traj, sched)| TrainingTrajectory {
                prompt_id: traj.prompt_id.clone(),
                features: (0..traj.length)
                    .map(|t| features.encode(traj.states[t], t))
                    .collect(),
                targets: sched.targets().to_vec(),
            })
            .collect();
        Self { trajectories }
    }

    pub fn token_count(&self) -> usize {
        self.trajectories.iter().map(TrainingTrajectory::len).sum()
    }

    /// Loss of `head` on this set under `averaging`.
    pub fn loss(&self, head: &ValueHead, averaging: Averaging) -> Result<f64> {
        let preds = self.predictions(head)?;
        let targets: Vec<Vec<f64>> = self.trajectories.iter().map(|t| t.targets.clone()).collect();
        weighted_loss(&preds, &targets, averaging)
    }

    pub fn predictions(&self, head: &ValueHead) -> Result<Vec<Vec<f64>>> {
        self.trajectories
            .iter()
            .map(|t| t.features.iter().map(|f| head.predict(f)).collect())
            .collect()
    }
}

/// Training and validation loss after one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub valid: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub head: ValueHead,
    pub history: Vec<EpochLoss>,
}

/// Fits `head` to `data` with plain minibatch SGD.
///
/// With `gae_lambda < 1` the regression targets are rebuilt at the start of
/// every epoch from the current head's predictions; at `gae_lambda = 1` they
/// are the Monte Carlo returns stored in `data`. Reported losses are always
/// against the Monte Carlo returns.
pub fn train(head: ValueHead, data: &TrainingSet, spec: &DiscountSpec, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let usable: Vec<&TrainingTrajectory> = data.trajectories.iter().filter(|t| !t.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::EmptyDataset("no trajectories to train on".into()));
    }
    let mut rng = rng_for(config.seed);

    let mut order: Vec<usize> = (0..usable.len()).collect();
    order.shuffle(&mut rng);
    let n_valid = (config.validation_fraction * usable.len() as f64).round() as usize;
    let (train_idx, valid_idx) = if n_valid == 0 || n_valid >= usable.len() {
        (order.clone(), order)
    } else {
        let (v, t) = order.split_at(n_valid);
        let mut t = t.to_vec();
        let mut v = v.to_vec();
        t.sort_unstable();
        v.sort_unstable();
        (t, v)
    };
    let subset = |idx: &[usize]| TrainingSet {
        trajectories: idx.iter().map(|&i| usable[i].clone()).collect(),
    };
    let train_set = subset(&train_idx);
    let valid_set = subset(&valid_idx);

    // (trajectory, step) pairs of the training split, grouped by prompt.
    let mut by_prompt: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, t) in train_set.trajectories.iter().enumerate() {
        let slot = by_prompt.entry(t.prompt_id.as_str()).or_default();
        slot.extend((0..t.len()).map(|s| (i, s)));
    }
    let mut groups: Vec<Vec<(usize, usize)>> = by_prompt.into_values().collect();
    let mut flat: Vec<(usize, usize)> = groups.iter().flatten().copied().collect();

    let mut head = head;
    let mut history = Vec::with_capacity(config.epochs);
    let mut targets: Vec<Vec<f64>> = train_set.trajectories.iter().map(|t| t.targets.clone()).collect();
    for epoch in 0..config.epochs {
        if config.gae_lambda < 1.0 {
            for (slot, traj) in targets.iter_mut().zip(&train_set.trajectories) {
                let mut values = traj
                    .features
                    .iter()
                    .map(|f| head.predict(f))
                    .collect::<Result<Vec<f64>>>()?;
                values.push(0.0);
                *slot = gae_targets(&values, spec, config.gae_lambda)?;
            }
        }

        if config.shuffle {
            flat.shuffle(&mut rng);
        } else {
            groups.shuffle(&mut rng);
            flat.clear();
            flat.extend(groups.iter().flatten().copied());
        }

        for chunk in flat.chunks(config.batch_size) {
            let batch: Vec<TokenExample> = chunk
                .iter()
                .map(|&(i, s)| {
                    let traj = &train_set.trajectories[i];
                    TokenExample {
                        features: &traj.features[s],
                        target: targets[i][s],
                        trajectory_len: traj.len(),
                    }
                })
                .collect();
            let g = gradients(&head, &batch, config.averaging)?;
            if !g.loss.is_finite() {
                return Err(Error::Diverged { epoch, loss: g.loss });
            }
            for (p, d) in head.params_mut().iter_mut().zip(&g.grad) {
                *p -= config.learning_rate * d;
            }
        }

        let train = train_set.loss(&head, config.averaging)?;
        let valid = valid_set.loss(&head, config.averaging)?;
        if !train.is_finite() || !valid.is_finite() || head.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                loss: if train.is_finite() { valid } else { train },
            });
        }
        history.push(EpochLoss { epoch, train, valid });
    }
    Ok(TrainOutcome { head, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::world::build_dataset;

    fn chain_set(spec: &DiscountSpec) -> (TrainingSet, FeatureMap) {
        let g = fixtures::deterministic_chain(6);
        let d = build_dataset(&g, spec, &["p".to_string()], 8, 0, 100).unwrap();
        let fm = FeatureMap::one_hot(g.num_states());
        (TrainingSet::from_dataset(&d, &fm), fm)
    }

    #[test]
    fn fits_deterministic_chain() {
        let spec = DiscountSpec::new(0.8).unwrap();
        let (set, fm) = chain_set(&spec);
        let head = ValueHead::init(fm.dimension(), 16, 1);
        let cfg = TrainConfig {
            epochs: 300,
            batch_size: 8,
            ..Default::default()
        };
        let out = train(head, &set, &spec, &cfg).unwrap();
        assert_eq!(out.history.len(), 300);
        assert!(out.history.last().unwrap().valid <= 1e-3);
    }

    #[test]
    fn bitwise_repeatable() {
        let spec = DiscountSpec::new(0.8).unwrap();
        let (set, fm) = chain_set(&spec);
        let cfg = TrainConfig {
            epochs: 5,
            ..Default::default()
        };
        let a = train(ValueHead::init(fm.dimension(), 8, 3), &set, &spec, &cfg).unwrap();
        let b = train(ValueHead::init(fm.dimension(), 8, 3), &set, &spec, &cfg).unwrap();
        assert_eq!(a.head, b.head);
        assert_eq!(a.history, b.history);
        let grouped = TrainConfig { shuffle: false, ..cfg };
        let c = train(ValueHead::init(fm.dimension(), 8, 3), &set, &spec, &grouped).unwrap();
        let d = train(ValueHead::init(fm.dimension(), 8, 3), &set, &spec, &grouped).unwrap();
        assert_eq!(c.head, d.head);
    }

    #[test]
    fn divergence_is_reported() {
        let spec = DiscountSpec::new(0.8).unwrap();
        let (set, fm) = chain_set(&spec);
        let cfg = TrainConfig {
            learning_rate: 1e308,
            epochs: 3,
            ..Default::default()
        };
        match train(ValueHead::init(fm.dimension(), 8, 3), &set, &spec, &cfg) {
            Err(Error::Diverged { epoch, .. }) => assert_eq!(epoch, 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn empty_set_is_rejected() {
        let spec = DiscountSpec::new(0.8).unwrap();
        let cfg = TrainConfig::default();
        assert!(train(ValueHead::init(2, 2, 0), &TrainingSet::default(), &spec, &cfg).is_err());
    }
}
