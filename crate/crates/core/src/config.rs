use crate::error::{Error, Result};

/// Hyperparameters of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    /// Weight of the local context against the bilingual context.
    pub alpha: f64,
    /// Half-size of the local context window.
    pub window: usize,
    /// Number of ids sampled from the parallel sentence.
    pub bilingual_sample: usize,
    /// Exploration rate of sense induction during training.
    pub epsilon: f64,
    /// Weight of the entropy regularizer in the policy loss.
    pub lambda: f64,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Fixed SGD learning rate.
    pub lr: f64,
    /// Tuples processed per language-role turn.
    pub batch: usize,
    pub dim: usize,
    /// Senses per word.
    pub senses: usize,
    pub epochs: u32,
    pub seed: u64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            alpha: 0.5,
            window: 5,
            bilingual_sample: 20,
            epsilon: 0.05,
            lambda: 1.0,
            negatives: 25,
            lr: 0.025,
            batch: 512,
            dim: 300,
            senses: 3,
            epochs: 5,
            seed: 1,
            subsample: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail(format!("epsilon must be in [0, 1], got {}", self.epsilon));
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if self.window < 1 {
            return fail("window must be at least 1".into());
        }
        if self.bilingual_sample < 1 {
            return fail("bilingual_sample must be at least 1".into());
        }
        if self.batch < 1 {
            return fail("batch must be at least 1".into());
        }
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        if self.senses == 0 {
            return fail("senses must be positive".into());
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail(format!("subsample must be non-negative, got {}", self.subsample));
        }
        Ok(())
    }
}
