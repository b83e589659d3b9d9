//! Sense representation learning: skip-gram with negative sampling over
//! sense identities.
//!
//! For an input sense `s` and a collocated sense `t`, the per-pair loss is
//!
//! ```text
//! −log σ(U[s]·V[t]) − Σₙ log σ(−U[s]·V[nₙ])
//! ```
//!
//! with negatives `nₙ` drawn from a unigram^0.75 distribution spread
//! evenly over each word's senses. The same routine serves the
//! monolingual objective (`V` of the input's language) and the bilingual
//! one (`V` of the other language).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::math::{self, Real};
use crate::params::{Matrix, SenseId, Side};

/// Resampling budget for a negative that collides with the positive or
/// with an earlier negative.
pub const MAX_NEGATIVE_TRIES: usize = 100;

#[derive(Clone, Debug)]
pub struct NegativeSampler {
    words: WeightedIndex<f64>,
    weights: Vec<f64>,
    total: f64,
    senses: usize,
    side: Side,
}

impl NegativeSampler {
    /// Word `w` (PAD excluded) is drawn with weight `count(w)^0.75`; its
    /// sense index is uniform.
    pub fn new(vocab: &Vocabulary, senses: usize, side: Side) -> Result<Self> {
        if vocab.is_empty() || senses == 0 {
            return Err(Error::Empty("negative sampling vocabulary"));
        }
        let weights: Vec<f64> = vocab.counts()[1..]
            .iter()
            .map(|&c| (c as f64).powf(0.75))
            .collect();
        let words = WeightedIndex::new(&weights)
            .map_err(|_| Error::Empty("negative sampling vocabulary (all counts zero)"))?;
        let total = weights.iter().sum();
        Ok(NegativeSampler {
            words,
            weights,
            total,
            senses,
            side,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn senses(&self) -> usize {
        self.senses
    }

    /// Draw a flat sense row.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let word = self.words.sample(rng) + 1;
        let k = if self.senses == 1 {
            0
        } else {
            rng.random_range(0..self.senses)
        };
        word * self.senses + k
    }

    /// Probability of drawing the given flat sense row.
    pub fn probability(&self, row: usize) -> f64 {
        let word = row / self.senses;
        if word == 0 || word > self.weights.len() {
            return 0.0;
        }
        self.weights[word - 1] / self.total / self.senses as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsResult {
    pub loss: f64,
    /// `σ(u·v_pos)` before the update.
    pub reward: f64,
    /// Updated row of the input matrix.
    pub input_row: usize,
    /// Updated rows of the output matrix: the positive first, then negatives.
    pub output_rows: Vec<usize>,
}

pub fn sgns_loss<F: Real>(u: &[F], v_pos: &[F], v_negs: &[&[F]]) -> f64 {
    let pos = math::softplus(-math::dot(u, v_pos));
    let neg: f64 = v_negs.iter().map(|v| math::softplus(math::dot(u, v))).sum();
    pos + neg
}

/// Draw up to `n` distinct negatives, none equal to `positive`.
pub fn draw_negatives<R: Rng + ?Sized>(
    sampler: &NegativeSampler,
    positive: usize,
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut negatives = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..MAX_NEGATIVE_TRIES {
            let row = sampler.sample(rng);
            if row != positive && !negatives.contains(&row) {
                negatives.push(row);
                break;
            }
        }
    }
    negatives
}

/// One SGD step on `U[s_in]` and `V[s_out]` plus sampled negatives.
#[allow(clippy::too_many_arguments)]
pub fn sgns_step<F: Real, R: Rng + ?Sized>(
    s_in: SenseId,
    s_out: SenseId,
    u: &mut Matrix<F>,
    v: &mut Matrix<F>,
    sampler: &NegativeSampler,
    negatives: usize,
    lr: f64,
    rng: &mut R,
) -> SgnsResult {
    debug_assert_eq!(sampler.side(), s_out.side);
    let senses = sampler.senses();
    let input_row = s_in.row(senses);
    let positive = s_out.row(senses);
    let negs = draw_negatives(sampler, positive, negatives, rng);
    sgns_update(input_row, positive, &negs, u, v, lr)
}

/// Exact-gradient SGD step with a fixed negative list.
///
/// All gradients are taken at the pre-update parameters.
pub fn sgns_update<F: Real>(
    input_row: usize,
    positive: usize,
    negatives: &[usize],
    u: &mut Matrix<F>,
    v: &mut Matrix<F>,
    lr: f64,
) -> SgnsResult {
    let dim = u.cols();
    let mut output_rows = Vec::with_capacity(negatives.len() + 1);
    output_rows.push(positive);
    output_rows.extend_from_slice(negatives);

    let u_old: Vec<F> = u.row(input_row).to_vec();
    let mut u_grad = vec![F::zero(); dim];
    let mut loss = 0.0;
    let mut reward = 0.0;

    for (idx, &row) in output_rows.iter().enumerate() {
        let score = math::dot(&u_old, v.row(row));
        // d/dx of softplus(-x) is σ(x) − 1; of softplus(x) is σ(x).
        let (g, l) = if idx == 0 {
            reward = math::logistic(score);
            (reward - 1.0, math::softplus(-score))
        } else {
            (math::logistic(score), math::softplus(score))
        };
        loss += l;
        let g = F::from_f64(g);
        math::axpy(g, v.row(row), &mut u_grad);
        math::axpy(F::from_f64(-lr) * g, &u_old, v.row_mut(row));
    }
    math::axpy(F::from_f64(-lr), &u_grad, u.row_mut(input_row));

    SgnsResult {
        loss,
        reward,
        input_row,
        output_rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_vectors_give_n_plus_one_ln2() {
        let z = [0.0f64; 4];
        let negs: Vec<&[f64]> = vec![&z; 25];
        let loss = sgns_loss(&z, &z, &negs);
        assert!((loss - 26.0 * 2f64.ln()).abs() < 1e-12);
        assert!((loss - 18.0218).abs() < 1e-4);
    }

    #[test]
    fn perfect_classification_limit() {
        let u = [10.0f64, 0.0];
        let pos = [10.0, 0.0];
        let neg = [-10.0, 0.0];
        let loss = sgns_loss(&u, &pos, &[&neg, &neg]);
        assert!((0.0..1e-12).contains(&loss));
    }

    #[test]
    fn closed_form_sampler_probability() {
        let vocab = Vocabulary::from_counts([("a", 16), ("b", 1)], false);
        let s = NegativeSampler::new(&vocab, 1, Side::A).unwrap();
        assert!((s.probability(1) - 8.0 / 9.0).abs() < 1e-12);
        assert!((s.probability(2) - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(s.probability(0), 0.0);
    }

    #[test]
    fn empty_vocab_rejected() {
        let vocab = Vocabulary::from_counts(Vec::<(String, u64)>::new(), false);
        assert!(NegativeSampler::new(&vocab, 3, Side::A).is_err());
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vocab = Vocabulary::from_counts((0..10).map(|i| (format!("w{i}"), 5)), false);
        let sampler = NegativeSampler::new(&vocab, 3, Side::B).unwrap();
        let mut u = Matrix::<f64>::uniform(33, 8, 0.5, &mut rng);
        let mut v = Matrix::<f64>::uniform(33, 8, 0.5, &mut rng);
        let (u0, v0) = (u.clone(), v.clone());
        let s_in = SenseId { word: 2, k: 1, side: Side::A };
        let s_out = SenseId { word: 5, k: 0, side: Side::B };
        let r = sgns_step(s_in, s_out, &mut u, &mut v, &sampler, 3, 0.0, &mut rng);
        assert_eq!((u, v), (u0.clone(), v0.clone()));
        let expected = math::logistic(math::dot(u0.row(7), v0.row(15)));
        assert_eq!(r.reward, expected);
        assert_eq!(r.output_rows.len(), 4);
    }
}
