use serde::{Deserialize, Serialize};

/// Maps a generator state (and optionally the decoding step) to the input
/// vector of the value head.
///
/// The base encoding is one-hot over states. With `position_scale = Some(c)`
/// one more coordinate carries `step / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    num_states: usize,
    position_scale: Option<f64>,
}

impl FeatureMap {
    pub fn one_hot(num_states: usize) -> Self {
        Self {
            num_states,
            position_scale: None,
        }
    }

    /// One-hot plus a normalised step coordinate. `scale` must be positive.
    pub fn with_position(num_states: usize, scale: f64) -> Self {
        assert!(scale > 0.0, "position scale must be positive");
        Self {
            num_states,
            position_scale: Some(scale),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn position_scale(&self) -> Option<f64> {
        self.position_scale
    }

    pub fn dimension(&self) -> usize {
        self.num_states + usize::from(self.position_scale.is_some())
    }

    pub fn encode(&self, state: usize, step: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.dimension()];
        self.encode_into(state, step, &mut f);
        f
    }

    pub fn encode_into(&self, state: usize, step: usize, out: &mut [f64]) {
        assert!(state < self.num_states, "state {state} out of range");
        assert_eq!(out.len(), self.dimension());
        out.fill(0.0);
        out[state] = 1.0;
        if let Some(scale) = self.position_scale {
            out[self.num_states] = step as f64 / scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_rows() {
        let fm = FeatureMap::one_hot(4);
        for s in 0..4 {
            let f = fm.encode(s, 9);
            assert_eq!(f.len(), 4);
            assert_eq!(f.iter().sum::<f64>(), 1.0);
            assert_eq!(f[s], 1.0);
        }
        let fm = FeatureMap::with_position(3, 10.0);
        assert_eq!(fm.encode(1, 5), vec![0.0, 1.0, 0.0, 0.5]);
    }
}
