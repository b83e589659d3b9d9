//! Reward-driven training of the induction parameters (P and Q).
//!
//! The chosen sense's Bernoulli score `p` is fit to the collocation reward
//! `r` by binary cross-entropy, and the normalized selection distribution
//! `q` is pushed towards confidence by an entropy penalty:
//!
//! ```text
//! L = −[r·log p + (1 − r)·log(1 − p)] + λ·H(q)
//! ```
//!
//! The reward is a constant here; U and V are never touched.

use crate::corpus::{ContextWindow, PAD};
use crate::induction::{self, uses_bilingual};
use crate::math::{self, Real};
use crate::params::Matrix;

/// One reward observation for the induction policy.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicySample {
    pub word: u32,
    pub local: ContextWindow,
    pub bilingual: Option<ContextWindow>,
    pub chosen_k: usize,
    pub reward: f64,
    pub alpha: f64,
}

struct Forward<F> {
    loss: f64,
    cbar: Vec<F>,
    /// dL/d(logit_k)
    logit_grads: Vec<f64>,
}

fn forward<F: Real>(
    sample: &PolicySample,
    p_major: &Matrix<F>,
    q_major: &Matrix<F>,
    p_other: Option<&Matrix<F>>,
    senses: usize,
    lambda: f64,
) -> Forward<F> {
    let bilingual = sample.bilingual.as_ref().zip(p_other);
    let cbar = induction::context_vector(&sample.local, bilingual, p_major, sample.alpha);
    let logits: Vec<f64> = induction::sense_logits(sample.word, &cbar, q_major, senses)
        .into_iter()
        .map(math::clamp_logit)
        .collect();
    let scores: Vec<f64> = logits.iter().map(|&x| math::logistic(x)).collect();
    let total: f64 = scores.iter().sum();
    let log_total = total.ln();
    // log q_k = log σ(x_k) − log Σ σ
    let log_q: Vec<f64> = logits
        .iter()
        .map(|&x| -math::softplus(-x) - log_total)
        .collect();
    let entropy: f64 = -log_q.iter().map(|&l| l.exp() * l).sum::<f64>();

    let c = sample.chosen_k;
    let r = sample.reward;
    let x = logits[c];
    let bce = r * math::softplus(-x) + (1.0 - r) * math::softplus(x);
    let loss = bce + lambda * entropy;

    // dH/ds_k = (−log q_k − H) / S, ds_k/dx_k = s_k (1 − s_k)
    let logit_grads = (0..senses)
        .map(|k| {
            let s = scores[k];
            let mut g = lambda * (-log_q[k] - entropy) * s * (1.0 - s) / total;
            if k == c {
                g += scores[c] - r;
            }
            g
        })
        .collect();

    Forward {
        loss,
        cbar,
        logit_grads,
    }
}

/// Policy loss at the current parameters.
pub fn policy_loss<F: Real>(
    sample: &PolicySample,
    p_major: &Matrix<F>,
    q_major: &Matrix<F>,
    p_other: Option<&Matrix<F>>,
    senses: usize,
    lambda: f64,
) -> f64 {
    forward(sample, p_major, q_major, p_other, senses, lambda).loss
}

/// One SGD step on the Q rows of the target word and the P rows that
/// formed its context vector. Returns the loss before the step.
#[allow(clippy::too_many_arguments)]
pub fn policy_step<F: Real>(
    sample: &PolicySample,
    p_major: &mut Matrix<F>,
    q_major: &mut Matrix<F>,
    p_other: Option<&mut Matrix<F>>,
    senses: usize,
    lambda: f64,
    lr: f64,
) -> f64 {
    let fw = forward(
        sample,
        p_major,
        q_major,
        p_other.as_deref(),
        senses,
        lambda,
    );
    let dim = p_major.cols();
    let base = sample.word as usize * senses;

    // dL/dc̄ = Σ_k g_k Q[w][k], taken before Q moves.
    let mut cbar_grad = vec![F::zero(); dim];
    for (k, &g) in fw.logit_grads.iter().enumerate() {
        math::axpy(F::from_f64(g), q_major.row(base + k), &mut cbar_grad);
    }
    for (k, &g) in fw.logit_grads.iter().enumerate() {
        math::axpy(F::from_f64(-lr * g), &fw.cbar, q_major.row_mut(base + k));
    }

    let bilingual = uses_bilingual(sample.alpha, sample.bilingual.is_some() && p_other.is_some());
    let alpha = if bilingual { sample.alpha } else { 1.0 };

    if !sample.local.is_empty() && alpha > 0.0 {
        let step = F::from_f64(-lr * alpha / sample.local.len() as f64);
        for &id in &sample.local.ids {
            if id != PAD {
                math::axpy(step, &cbar_grad, p_major.row_mut(id as usize));
            }
        }
    }
    if bilingual {
        if let (Some(window), Some(p_other)) = (&sample.bilingual, p_other) {
            let step = F::from_f64(-lr * (1.0 - alpha) / window.len() as f64);
            for &id in window.ids.iter().filter(|&&id| id != PAD) {
                math::axpy(step, &cbar_grad, p_other.row_mut(id as usize));
            }
        }
    }

    fw.loss
}
