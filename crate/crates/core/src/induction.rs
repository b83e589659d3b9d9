//! Sense induction: pick a sense for a target word from its context.
//!
//! The context summary mixes the mean of local context-word embeddings with
//! a fixed-denominator mean over the sampled parallel-sentence window:
//!
//! ```text
//! c̄ = α · mean(P_major[local]) + (1 − α) · (1/M) · Σ P_other[bilingual]
//! ```
//!
//! Each sense `k` of word `w` is then scored independently as
//! `σ(Q[w][k] · c̄)`, and the greedy choice is the argmax. With `α = 1` (or
//! no bilingual window) this is the monolingual module.

use rand::Rng;

use crate::corpus::{ContextWindow, PAD};
use crate::math::{self, Real};
use crate::params::{LanguageParams, Matrix, SenseId, Side};

/// A bilingual window together with the embedding table of its language.
pub type BilingualInput<'a, F> = Option<(&'a ContextWindow, &'a Matrix<F>)>;

#[derive(Clone, Debug, PartialEq)]
pub struct SenseDecision<F = f32> {
    pub sense: SenseId,
    /// Bernoulli score of the chosen sense.
    pub bernoulli: f64,
    /// Bernoulli scores of all senses.
    pub scores: Vec<f64>,
    /// Scores normalized to sum to one.
    pub distribution: Vec<f64>,
    /// The sense was drawn uniformly by ε-greedy exploration.
    pub explored: bool,
    pub context_vector: Vec<F>,
}

impl<F> SenseDecision<F> {
    pub fn entropy(&self) -> f64 {
        math::entropy(&self.distribution)
    }
}

/// `true` when the bilingual term takes part in the mix.
#[inline]
pub(crate) fn uses_bilingual(alpha: f64, bilingual: bool) -> bool {
    bilingual && alpha < 1.0
}

pub fn context_vector<F: Real>(
    local: &ContextWindow,
    bilingual: BilingualInput<'_, F>,
    p_major: &Matrix<F>,
    alpha: f64,
) -> Vec<F> {
    let dim = p_major.cols();
    let mut out = vec![F::zero(); dim];

    let (alpha, bilingual) = match bilingual {
        Some(b) if uses_bilingual(alpha, true) => (alpha, Some(b)),
        _ => (1.0, None),
    };

    if !local.is_empty() && alpha > 0.0 {
        for &id in &local.ids {
            for (o, &x) in out.iter_mut().zip(p_major.row(id as usize)) {
                *o += x;
            }
        }
        let scale = F::from_f64(alpha / local.len() as f64);
        out.iter_mut().for_each(|o| *o *= scale);
    }

    if let Some((window, p_other)) = bilingual {
        let mut acc = vec![F::zero(); dim];
        for &id in window.ids.iter().filter(|&&id| id != PAD) {
            for (a, &x) in acc.iter_mut().zip(p_other.row(id as usize)) {
                *a += x;
            }
        }
        let scale = F::from_f64((1.0 - alpha) / window.len() as f64);
        for (o, a) in out.iter_mut().zip(acc) {
            *o += a * scale;
        }
    }

    out
}

/// Raw logits `Q[word][k] · c̄` for every sense.
pub fn sense_logits<F: Real>(word: u32, cbar: &[F], q: &Matrix<F>, senses: usize) -> Vec<f64> {
    let base = word as usize * senses;
    (0..senses).map(|k| math::dot(q.row(base + k), cbar)).collect()
}

/// Bernoulli likelihood `σ(Q[word][k] · c̄)` of every sense.
pub fn sense_scores<F: Real>(word: u32, cbar: &[F], q: &Matrix<F>, senses: usize) -> Vec<f64> {
    sense_logits(word, cbar, q, senses)
        .into_iter()
        .map(math::logistic)
        .collect()
}

/// First index of the maximum.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

pub fn normalize(scores: &[f64]) -> Vec<f64> {
    let total: f64 = scores.iter().sum();
    scores.iter().map(|s| s / total).collect()
}

/// Decode a sense with ε-greedy exploration.
///
/// No randomness is consumed when `epsilon == 0`.
#[allow(clippy::too_many_arguments)]
pub fn induce<F: Real, R: Rng + ?Sized>(
    word: u32,
    side: Side,
    local: &ContextWindow,
    bilingual: BilingualInput<'_, F>,
    major: &LanguageParams<F>,
    alpha: f64,
    epsilon: f64,
    rng: &mut R,
) -> SenseDecision<F> {
    let explore = epsilon > 0.0 && rng.random::<f64>() < epsilon;
    let forced = explore.then(|| rng.random_range(0..major.senses()));
    decide(word, side, local, bilingual, major, alpha, forced)
}

/// Greedy (ε = 0) decoding, as used by evaluation.
pub fn induce_greedy<F: Real>(
    word: u32,
    side: Side,
    local: &ContextWindow,
    bilingual: BilingualInput<'_, F>,
    major: &LanguageParams<F>,
    alpha: f64,
) -> SenseDecision<F> {
    decide(word, side, local, bilingual, major, alpha, None)
}

fn decide<F: Real>(
    word: u32,
    side: Side,
    local: &ContextWindow,
    bilingual: BilingualInput<'_, F>,
    major: &LanguageParams<F>,
    alpha: f64,
    forced: Option<usize>,
) -> SenseDecision<F> {
    debug_assert_ne!(word, PAD);
    let senses = major.senses();
    let cbar = context_vector(local, bilingual, &major.p, alpha);
    let scores = sense_scores(word, &cbar, &major.q, senses);
    let k = forced.unwrap_or_else(|| argmax(&scores));
    SenseDecision {
        sense: SenseId { word, k, side },
        bernoulli: scores[k],
        distribution: normalize(&scores),
        scores,
        explored: forced.is_some(),
        context_vector: cbar,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WindowOrigin;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn window(ids: &[u32], origin: WindowOrigin) -> ContextWindow {
        ContextWindow {
            ids: ids.to_vec(),
            origin,
        }
    }

    #[test]
    fn hand_computed_mix() {
        // id 0 is PAD, ids 1, 2 local rows, id 1 of the other table is (2, 2).
        let p_major = Matrix::from_vec(3, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let p_other = Matrix::from_vec(2, 2, vec![0.0, 0.0, 2.0, 2.0]);
        let local = window(&[1, 2], WindowOrigin::Local);
        let bil = window(&[1, PAD], WindowOrigin::Bilingual);
        let c = context_vector(&local, Some((&bil, &p_other)), &p_major, 0.5);
        assert_eq!(c, vec![0.75f64, 0.75]);
    }

    #[test]
    fn alpha_one_ignores_bilingual() {
        let p_major = Matrix::from_vec(3, 2, vec![0.0, 0.0, 1.0, 3.0, -2.0, 1.0]);
        let p_other = Matrix::from_vec(2, 2, vec![0.0, 0.0, 9.0, 9.0]);
        let local = window(&[1, 2], WindowOrigin::Local);
        let bil = window(&[1, 1], WindowOrigin::Bilingual);
        let with = context_vector(&local, Some((&bil, &p_other)), &p_major, 1.0);
        let without = context_vector(&local, None, &p_major, 0.3);
        assert_eq!(with, vec![-0.5f64, 2.0]);
        assert_eq!(with, without);
    }

    #[test]
    fn empty_local_contributes_zero() {
        let p_major = Matrix::from_vec(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
        let p_other = Matrix::from_vec(2, 2, vec![0.0, 0.0, 4.0, 8.0]);
        let local = window(&[], WindowOrigin::Local);
        assert_eq!(context_vector(&local, None, &p_major, 1.0), vec![0.0f64, 0.0]);
        let bil = window(&[1, PAD, PAD, PAD], WindowOrigin::Bilingual);
        let c = context_vector(&local, Some((&bil, &p_other)), &p_major, 0.5);
        assert_eq!(c, vec![0.5f64, 1.0]);
    }

    #[test]
    fn scores_closed_forms() {
        let q = Matrix::from_vec(3, 2, vec![0.3, -0.1, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sense_scores(0, &[0.0f64, 0.0], &q, 3), vec![0.5; 3]);

        let c = (3f64.ln()).sqrt();
        let q = Matrix::from_vec(2, 1, vec![-1.0, c]);
        let s = sense_scores(0, &[c], &q, 2);
        assert!((s[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        assert_eq!(argmax(&[0.9, 0.1, 0.1]), 0);
        assert_eq!(argmax(&[0.2, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.5, 0.5, 0.5]), 0);
        let d = normalize(&[0.9, 0.1, 0.1]);
        assert!((d[0] - 9.0 / 11.0).abs() < 1e-15);
        assert!((d[1] - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut params = LanguageParams::<f64>::init(3, 2, 3, &mut rng).unwrap();
        params.p = Matrix::from_vec(3, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        // word 1: sense 2 aligned with context (1, 0).
        let q = params.q.as_mut_slice();
        q[6..12].copy_from_slice(&[-1.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
        let local = window(&[1], WindowOrigin::Local);
        let d = induce(1, Side::A, &local, None, &params, 1.0, 0.0, &mut rng);
        assert_eq!(d.sense.k, 2);
        assert!(!d.explored);
        assert!((d.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d, induce_greedy(1, Side::A, &local, None, &params, 1.0));
    }
}
