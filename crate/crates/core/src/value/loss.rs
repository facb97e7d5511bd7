use serde::{Deserialize, Serialize};

use super::head::ValueHead;
use crate::error::{Error, Result};

/// How per-token squared errors are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Every non-terminal token has weight one.
    #[default]
    TokenAvg,
    /// Token mean within each trajectory, then mean over trajectories
    /// (weight `1 / L` per token).
    TrajectoryAvg,
}

impl Averaging {
    /// Weight of one token from a trajectory of `length` tokens.
    #[inline]
    pub fn weight(self, length: usize) -> f64 {
        match self {
            Averaging::TokenAvg => 1.0,
            Averaging::TrajectoryAvg => 1.0 / length as f64,
        }
    }
}

fn check_aligned(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} prediction groups but {} target groups",
            predictions.len(),
            targets.len()
        )));
    }
    for (i, (p, t)) in predictions.iter().zip(targets).enumerate() {
        if p.len() != t.len() {
            return Err(Error::InvalidArgument(format!(
                "trajectory {i}: {} predictions but {} targets",
                p.len(),
                t.len()
            )));
        }
    }
    if predictions.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDataset("no tokens to average over".into()));
    }
    Ok(())
}

/// Weighted mean squared error over grouped predictions; groups are
/// trajectories and each inner vector covers steps `0 .. L-1`.
pub fn weighted_loss(predictions: &[Vec<f64>], targets: &[Vec<f64>], averaging: Averaging) -> Result<f64> {
    check_aligned(predictions, targets)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, t) in predictions.iter().zip(targets) {
        if p.is_empty() {
            continue;
        }
        let w = averaging.weight(p.len());
        for (a, b) in p.iter().zip(t) {
            num += w * (a - b) * (a - b);
            den += w;
        }
    }
    Ok(num / den)
}

/// Sum of squared errors over all tokens divided by the total token count.
pub fn loss_token_avg(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    weighted_loss(predictions, targets, Averaging::TokenAvg)
}

/// Mean over trajectories of each trajectory's mean squared error.
pub fn loss_trajectory_avg(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    weighted_loss(predictions, targets, Averaging::TrajectoryAvg)
}

/// One regression example inside a minibatch.
#[derive(Debug, Clone, Copy)]
pub struct TokenExample<'a> {
    pub features: &'a [f64],
    pub target: f64,
    /// Length of the trajectory the token came from.
    pub trajectory_len: usize,
}

/// Loss and its gradient with respect to every head parameter (same layout
/// as [`ValueHead::params`]).
#[derive(Debug, Clone)]
pub struct Gradients {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Analytic gradient of the weighted batch loss
/// `sum_i w_i (V(f_i) - g_i)^2 / sum_i w_i`.
///
/// Tokens are accumulated in batch order, so results are bitwise
/// reproducible.
pub fn gradients(head: &ValueHead, batch: &[TokenExample<'_>], averaging: Averaging) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset("empty batch".into()));
    }
    let total_w: f64 = batch.iter().map(|t| averaging.weight(t.trajectory_len)).sum();
    let mut grad = vec![0.0; head.params().len()];
    let mut loss = 0.0;
    for tok in batch {
        if tok.features.len() != head.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: head.input_dim(),
                got: tok.features.len(),
            });
        }
        let w = averaging.weight(tok.trajectory_len) / total_w;
        let fwd = head.forward(tok.features);
        let v = super::head::value_from_logit(fwd.z);
        let err = v - tok.target;
        loss += w * err * err;
        head.accumulate(tok.features, &fwd, 2.0 * w * err, &mut grad);
    }
    Ok(Gradients { loss, grad })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_average_examples() {
        let p = vec![vec![-0.5]];
        let t = vec![vec![-0.7]];
        assert!((loss_token_avg(&p, &t).unwrap() - 0.04).abs() < 1e-15);
        assert_eq!(loss_token_avg(&t, &t).unwrap(), 0.0);

        let p = vec![vec![0.1], vec![0.1, 0.1, 0.1]];
        let t = vec![vec![0.0], vec![0.0, 0.0, 0.0]];
        assert!((loss_token_avg(&p, &t).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn trajectory_average_examples() {
        let p = vec![vec![0.2], vec![0.0, 0.0, 0.0]];
        let t = vec![vec![0.0], vec![0.0, 0.0, 0.0]];
        assert!((loss_trajectory_avg(&p, &t).unwrap() - 0.02).abs() < 1e-15);
        assert!((loss_token_avg(&p, &t).unwrap() - 0.01).abs() < 1e-15);

        let p = vec![vec![0.1, 0.3], vec![0.2, 0.0]];
        let t = vec![vec![0.0, 0.0], vec![0.0, 0.1]];
        assert!((loss_trajectory_avg(&p, &t).unwrap() - loss_token_avg(&p, &t).unwrap()).abs() < 1e-15);
        assert_eq!(loss_trajectory_avg(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn empty_and_misaligned_inputs() {
        assert!(loss_token_avg(&[], &[]).is_err());
        assert!(loss_token_avg(&[vec![0.1]], &[vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn zero_error_gives_zero_gradient() {
        let head = ValueHead::init(3, 5, 3);
        let feats = [vec![1.0, 0.0, 0.0], vec![0.0, 0.5, -1.0]];
        let batch: Vec<TokenExample> = feats
            .iter()
            .map(|f| TokenExample {
                features: f,
                target: head.predict(f).unwrap(),
                trajectory_len: 2,
            })
            .collect();
        let g = gradients(&head, &batch, Averaging::TokenAvg).unwrap();
        assert_eq!(g.loss, 0.0);
        assert!(g.grad.iter().all(|&x| x == 0.0));
    }
}
