//! Learnable parameter blocks.

use rand::Rng;

use crate::config::TrainingConfig;
use crate::corpus::{Vocabulary, PAD};
use crate::error::{Error, Result};
use crate::math::Real;

/// One of the two languages of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

/// A (word, sense index) pair in one language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SenseId {
    pub word: u32,
    pub k: usize,
    pub side: Side,
}

impl SenseId {
    /// Flat row in the sense-indexed blocks (U, V, Q).
    #[inline]
    pub fn row(&self, senses: usize) -> usize {
        self.word as usize * senses + self.k
    }

    #[inline]
    pub fn from_row(row: usize, senses: usize, side: Side) -> SenseId {
        SenseId {
            word: (row / senses) as u32,
            k: row % senses,
            side,
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F = f32> {
    data: Vec<F>,
    rows: usize,
    cols: usize,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: vec![F::zero(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { data, rows, cols }
    }

    /// Entries uniform in `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| F::from_f64(rng.random_range(-bound..=bound)))
            .collect();
        Matrix { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn cast<G: Real>(&self) -> Matrix<G> {
        Matrix {
            data: self.data.iter().map(|x| G::from_f64(x.as_f64())).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

/// Parameter blocks of one language.
///
/// * `p`: context word embeddings, `|W| × d`; the PAD row is pinned at zero.
/// * `q`: per-word per-sense selection vectors, `|W|·K × d` (row `w·K + k`).
/// * `u`: input sense embeddings, `|W|·K × d`.
/// * `v`: collocation estimators, `|W|·K × d`. Scored against this
///   language's own `u` and against the other language's `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageParams<F = f32> {
    pub p: Matrix<F>,
    pub q: Matrix<F>,
    pub u: Matrix<F>,
    pub v: Matrix<F>,
    senses: usize,
}

impl<F: Real> LanguageParams<F> {
    /// P, Q, U uniform in ±0.5/d; V zero; PAD row of P zero.
    pub fn init<R: Rng + ?Sized>(words: usize, dim: usize, senses: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 || senses == 0 {
            return Err(Error::Config(format!(
                "dimension and senses must be positive (dim={dim}, senses={senses})"
            )));
        }
        let bound = 0.5 / dim as f64;
        let mut p = Matrix::uniform(words, dim, bound, rng);
        let q = Matrix::uniform(words * senses, dim, bound, rng);
        let u = Matrix::uniform(words * senses, dim, bound, rng);
        let v = Matrix::zeros(words * senses, dim);
        if words > 0 {
            p.row_mut(PAD as usize).fill(F::zero());
        }
        Ok(LanguageParams { p, q, u, v, senses })
    }

    /// Assemble from existing blocks, checking shapes.
    pub fn from_blocks(
        p: Matrix<F>,
        q: Matrix<F>,
        u: Matrix<F>,
        v: Matrix<F>,
        senses: usize,
    ) -> Result<Self> {
        let words = p.rows();
        let dim = p.cols();
        for (name, m) in [("q", &q), ("u", &u), ("v", &v)] {
            if m.rows() != words * senses || m.cols() != dim {
                return Err(Error::Shape(format!(
                    "block {name} is {}x{}, expected {}x{dim}",
                    m.rows(),
                    m.cols(),
                    words * senses
                )));
            }
        }
        Ok(LanguageParams { p, q, u, v, senses })
    }

    pub fn senses(&self) -> usize {
        self.senses
    }

    pub fn dim(&self) -> usize {
        self.p.cols()
    }

    /// Vocabulary size including PAD.
    pub fn words(&self) -> usize {
        self.p.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite() && self.u.is_finite() && self.v.is_finite()
    }

    /// Q rows of all senses of `word`, contiguous.
    pub fn selection_vectors(&self, word: u32) -> &[F] {
        let d = self.dim();
        let start = word as usize * self.senses * d;
        &self.q.as_slice()[start..start + self.senses * d]
    }

    pub fn sense_embedding(&self, sense: SenseId) -> &[F] {
        self.u.row(sense.row(self.senses))
    }

    pub fn cast<G: Real>(&self) -> LanguageParams<G> {
        LanguageParams {
            p: self.p.cast(),
            q: self.q.cast(),
            u: self.u.cast(),
            v: self.v.cast(),
            senses: self.senses,
        }
    }
}

/// Mutable access to both languages at once, ordered (major, other).
pub fn split_roles<F>(
    params: &mut [LanguageParams<F>; 2],
    major: Side,
) -> (&mut LanguageParams<F>, &mut LanguageParams<F>) {
    let [a, b] = params;
    match major {
        Side::A => (a, b),
        Side::B => (b, a),
    }
}

/// Everything needed to train, evaluate or export: config, both
/// vocabularies and both parameter sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: TrainingConfig,
    pub languages: [String; 2],
    pub vocabs: [Vocabulary; 2],
    pub params: [LanguageParams<f32>; 2],
    /// Completed training epochs.
    pub epochs_done: u32,
}

impl Model {
    /// Initialize parameters for both vocabularies.
    pub fn init<R: Rng + ?Sized>(
        config: TrainingConfig,
        languages: [String; 2],
        vocabs: [Vocabulary; 2],
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let a = LanguageParams::init(vocabs[0].len(), config.dim, config.senses, rng)?;
        let b = LanguageParams::init(vocabs[1].len(), config.dim, config.senses, rng)?;
        Ok(Model {
            config,
            languages,
            vocabs,
            params: [a, b],
            epochs_done: 0,
        })
    }

    pub fn vocab(&self, side: Side) -> &Vocabulary {
        &self.vocabs[side.index()]
    }

    pub fn side_params(&self, side: Side) -> &LanguageParams<f32> {
        &self.params[side.index()]
    }

    pub fn language(&self, side: Side) -> &str {
        &self.languages[side.index()]
    }

    /// Side whose language tag equals `lang`.
    pub fn side_of(&self, lang: &str) -> Result<Side> {
        if self.languages[0] == lang {
            Ok(Side::A)
        } else if self.languages[1] == lang {
            Ok(Side::B)
        } else {
            Err(Error::LanguageMismatch {
                found: lang.to_string(),
                expected: self.languages.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_shapes_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = LanguageParams::<f32>::init(10, 8, 3, &mut rng).unwrap();
        assert_eq!((p.u.rows(), p.u.cols()), (30, 8));
        assert_eq!((p.q.rows(), p.q.cols()), (30, 8));
        assert_eq!(p.selection_vectors(4).len(), 3 * 8);
        assert_eq!((p.p.rows(), p.v.rows()), (10, 30));
        let bound = 0.5 / 8.0;
        for m in [&p.p, &p.q, &p.u] {
            assert!(m.as_slice().iter().all(|x| x.abs() <= bound));
        }
        assert!(p.v.as_slice().iter().all(|&x| x == 0.0));
        assert!(p.p.row(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn init_is_deterministic() {
        let a = LanguageParams::<f32>::init(7, 4, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = LanguageParams::<f32>::init(7, 4, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_degenerate_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(LanguageParams::<f32>::init(5, 0, 3, &mut rng).is_err());
        assert!(LanguageParams::<f32>::init(5, 4, 0, &mut rng).is_err());
    }

    #[test]
    fn flat_rows_round_trip() {
        for senses in 1..5 {
            for word in 0..20u32 {
                for k in 0..senses {
                    let s = SenseId { word, k, side: Side::B };
                    assert_eq!(SenseId::from_row(s.row(senses), senses, Side::B), s);
                }
            }
        }
    }
}
