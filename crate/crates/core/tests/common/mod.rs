//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Everything here is written from the formulas, in
//! plain scalar loops, without calling the library's math helpers.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xsense::{ContextWindow, Matrix, PolicySample, WindowOrigin, PAD};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn random_vec(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn window(ids: Vec<u32>, origin: WindowOrigin) -> ContextWindow {
    ContextWindow { ids, origin }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// −log σ(u·v⁺) − Σ log σ(−u·v⁻)
pub fn oracle_sgns_loss(u: &[f64], pos: &[f64], negs: &[&[f64]]) -> f64 {
    let mut loss = -sigmoid(dot(u, pos)).ln();
    for n in negs {
        loss -= sigmoid(-dot(u, n)).ln();
    }
    loss
}

pub fn oracle_context(
    sample: &PolicySample,
    p_major: &Matrix<f64>,
    p_other: Option<&Matrix<f64>>,
) -> Vec<f64> {
    let d = p_major.cols();
    let mut c = vec![0.0; d];
    let use_bi = sample.alpha < 1.0 && sample.bilingual.is_some() && p_other.is_some();
    let alpha = if use_bi { sample.alpha } else { 1.0 };
    let n = sample.local.ids.len();
    for &id in &sample.local.ids {
        for x in 0..d {
            c[x] += alpha * p_major.row(id as usize)[x] / n as f64;
        }
    }
    if use_bi {
        let window = sample.bilingual.as_ref().unwrap();
        let p = p_other.unwrap();
        let m = window.ids.len();
        for &id in &window.ids {
            if id == PAD {
                continue;
            }
            for x in 0..d {
                c[x] += (1.0 - alpha) * p.row(id as usize)[x] / m as f64;
            }
        }
    }
    c
}

/// BCE(r, σ(Q[w][c]·c̄)) + λ·H(σ/Σσ)
pub fn oracle_policy_loss(
    sample: &PolicySample,
    p_major: &Matrix<f64>,
    q: &Matrix<f64>,
    p_other: Option<&Matrix<f64>>,
    senses: usize,
    lambda: f64,
) -> f64 {
    let c = oracle_context(sample, p_major, p_other);
    let s: Vec<f64> = (0..senses)
        .map(|k| sigmoid(dot(q.row(sample.word as usize * senses + k), &c)))
        .collect();
    let p = s[sample.chosen_k];
    let r = sample.reward;
    let bce = -(r * p.ln() + (1.0 - r) * (1.0 - p).ln());
    let total: f64 = s.iter().sum();
    let mut h = 0.0;
    for &sk in &s {
        let qk = sk / total;
        h -= qk * qk.ln();
    }
    bce + lambda * h
}

pub fn oracle_avg_sim_c(pa: &[f64], ua: &[Vec<f64>], pb: &[f64], ub: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..pa.len() {
        for j in 0..pb.len() {
            s += pa[i] * pb[j] * oracle_cosine(&ua[i], &ub[j]);
        }
    }
    s
}

pub fn oracle_max_sim_c(pa: &[f64], ua: &[Vec<f64>], pb: &[f64], ub: &[Vec<f64>]) -> f64 {
    let best = |p: &[f64]| {
        let mut b = 0;
        for i in 1..p.len() {
            if p[i] > p[b] {
                b = i;
            }
        }
        b
    };
    oracle_cosine(&ua[best(pa)], &ub[best(pb)])
}

/// Quadratic-time average ranks: 1 + #smaller + (#equal − 1)/2.
pub fn oracle_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let smaller = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..xs.len() {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn oracle_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(xs), &oracle_ranks(ys))
}

/// Relative error of an analytic gradient row against central
/// differences, as ‖a − n‖ / max(‖a‖, ‖n‖).
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum::<f64>()
        .sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

pub const FD_STEP: f64 = 1e-4;

/// Central-difference gradient of `loss` with respect to row `row` of the
/// matrix selected by `pick`.
pub fn numeric_row_grad<S: Clone>(
    state: &S,
    pick: impl Fn(&mut S) -> &mut Matrix<f64>,
    row: usize,
    loss: impl Fn(&S) -> f64,
) -> Vec<f64> {
    let cols = pick(&mut state.clone()).cols();
    (0..cols)
        .map(|x| {
            let mut plus = state.clone();
            pick(&mut plus).row_mut(row)[x] += FD_STEP;
            let mut minus = state.clone();
            pick(&mut minus).row_mut(row)[x] -= FD_STEP;
            (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Rows whose contents differ between two matrices.
pub fn changed_rows(before: &Matrix<f64>, after: &Matrix<f64>) -> Vec<usize> {
    (0..before.rows())
        .filter(|&r| before.row(r) != after.row(r))
        .collect()
}

pub const FD_DIM: usize = 8;
pub const FD_SENSES: usize = 3;
pub const FD_NEGATIVES: usize = 3;

/// Skip-gram instance: U of the input language, V of the output language
/// (the same table for the monolingual objective, another language's for
/// the cross-lingual one), one positive and `FD_NEGATIVES` distinct
/// negatives.
#[derive(Clone, Debug)]
pub struct SgnsInstance {
    pub u: Matrix<f64>,
    pub v: Matrix<f64>,
    pub input: usize,
    pub positive: usize,
    pub negatives: Vec<usize>,
}

impl SgnsInstance {
    pub fn random(seed: u64, cross: bool) -> Self {
        let mut rng = rng(seed);
        let rows_in = 10 * FD_SENSES;
        let rows_out = if cross { 7 * FD_SENSES } else { rows_in };
        let u = random_matrix(rows_in, FD_DIM, 0.8, &mut rng);
        let v = random_matrix(rows_out, FD_DIM, 0.8, &mut rng);
        // Skip PAD senses (word 0) like the sampler does.
        let mut rows = rand::seq::index::sample(&mut rng, rows_out - FD_SENSES, 1 + FD_NEGATIVES).into_vec();
        rows.iter_mut().for_each(|r| *r += FD_SENSES);
        let input = rng.random_range(FD_SENSES..rows_in);
        SgnsInstance {
            u,
            v,
            input,
            positive: rows[0],
            negatives: rows[1..].to_vec(),
        }
    }

    pub fn loss(&self) -> f64 {
        let negs: Vec<&[f64]> = self.negatives.iter().map(|&r| self.v.row(r)).collect();
        xsense::srl::sgns_loss(self.u.row(self.input), self.v.row(self.positive), &negs)
    }

    pub fn oracle_loss(&self) -> f64 {
        let negs: Vec<&[f64]> = self.negatives.iter().map(|&r| self.v.row(r)).collect();
        oracle_sgns_loss(self.u.row(self.input), self.v.row(self.positive), &negs)
    }

    /// Largest per-row relative error between the update direction of one
    /// SGD step (lr = 1) and central differences, plus the rows changed
    /// in U and V by that step.
    pub fn gradient_check(&self) -> (f64, Vec<usize>, Vec<usize>) {
        let mut stepped = self.clone();
        xsense::srl::sgns_update(
            self.input,
            self.positive,
            &self.negatives,
            &mut stepped.u,
            &mut stepped.v,
            1.0,
        );
        let analytic = |before: &Matrix<f64>, after: &Matrix<f64>, row: usize| -> Vec<f64> {
            before.row(row).iter().zip(after.row(row)).map(|(b, a)| b - a).collect()
        };
        let mut worst: f64 = 0.0;
        let grad_u = numeric_row_grad(self, |s| &mut s.u, self.input, |s| s.loss());
        worst = worst.max(relative_error(&analytic(&self.u, &stepped.u, self.input), &grad_u));
        for &row in std::iter::once(&self.positive).chain(&self.negatives) {
            let grad_v = numeric_row_grad(self, |s| &mut s.v, row, |s| s.loss());
            worst = worst.max(relative_error(&analytic(&self.v, &stepped.v, row), &grad_v));
        }
        (
            worst,
            changed_rows(&self.u, &stepped.u),
            changed_rows(&self.v, &stepped.v),
        )
    }
}

/// Induction-policy instance. With `bilingual` the context mixes a PAD-padded
/// parallel window at α ∈ (0, 1); otherwise it is the monolingual α = 1 case.
#[derive(Clone, Debug)]
pub struct PolicyInstance {
    pub p: Matrix<f64>,
    pub q: Matrix<f64>,
    pub p_other: Matrix<f64>,
    pub sample: PolicySample,
    pub lambda: f64,
}

impl PolicyInstance {
    pub fn random(seed: u64, bilingual: bool) -> Self {
        let mut rng = rng(seed);
        let words = 12;
        let other_words = 9;
        let mut p = random_matrix(words, FD_DIM, 1.0, &mut rng);
        p.row_mut(0).fill(0.0);
        let q = random_matrix(words * FD_SENSES, FD_DIM, 1.0, &mut rng);
        let mut p_other = random_matrix(other_words, FD_DIM, 1.0, &mut rng);
        p_other.row_mut(0).fill(0.0);
        let n_local = rng.random_range(1..=6);
        let local = (0..n_local).map(|_| rng.random_range(1..words as u32)).collect();
        let bi = bilingual.then(|| {
            let filled = rng.random_range(1..=5);
            let mut ids: Vec<u32> = (0..filled).map(|_| rng.random_range(1..other_words as u32)).collect();
            ids.resize(5, PAD);
            window(ids, WindowOrigin::Bilingual)
        });
        let sample = PolicySample {
            word: rng.random_range(1..words as u32),
            local: window(local, WindowOrigin::Local),
            bilingual: bi,
            chosen_k: rng.random_range(0..FD_SENSES),
            reward: rng.random_range(0.01..0.99),
            alpha: if bilingual { rng.random_range(0.05..0.95) } else { 1.0 },
        };
        PolicyInstance {
            p,
            q,
            p_other,
            sample,
            lambda: rng.random_range(0.0..1.5),
        }
    }

    pub fn loss(&self) -> f64 {
        xsense::policy::policy_loss(
            &self.sample,
            &self.p,
            &self.q,
            Some(&self.p_other),
            FD_SENSES,
            self.lambda,
        )
    }

    pub fn oracle_loss(&self) -> f64 {
        oracle_policy_loss(
            &self.sample,
            &self.p,
            &self.q,
            Some(&self.p_other),
            FD_SENSES,
            self.lambda,
        )
    }

    pub fn step(&self, lr: f64) -> PolicyInstance {
        let mut s = self.clone();
        xsense::policy::policy_step(
            &self.sample,
            &mut s.p,
            &mut s.q,
            Some(&mut s.p_other),
            FD_SENSES,
            self.lambda,
            lr,
        );
        s
    }

    /// Largest per-row relative error over every P, bilingual P and Q row
    /// the step touches.
    pub fn gradient_check(&self) -> f64 {
        let stepped = self.step(1.0);
        let analytic = |before: &Matrix<f64>, after: &Matrix<f64>, row: usize| -> Vec<f64> {
            before.row(row).iter().zip(after.row(row)).map(|(b, a)| b - a).collect()
        };
        let mut worst: f64 = 0.0;
        let mut check = |pick: fn(&mut PolicyInstance) -> &mut Matrix<f64>, row: usize| {
            let before = pick(&mut self.clone()).clone();
            let after = pick(&mut stepped.clone()).clone();
            let numeric = numeric_row_grad(self, pick, row, |s| s.loss());
            worst = worst.max(relative_error(&analytic(&before, &after, row), &numeric));
        };
        let base = self.sample.word as usize * FD_SENSES;
        for k in 0..FD_SENSES {
            check(|s| &mut s.q, base + k);
        }
        let mut local = self.sample.local.ids.clone();
        local.sort_unstable();
        local.dedup();
        for id in local {
            check(|s| &mut s.p, id as usize);
        }
        if let Some(bi) = &self.sample.bilingual {
            let mut ids: Vec<u32> = bi.ids.iter().copied().filter(|&i| i != PAD).collect();
            ids.sort_unstable();
            ids.dedup();
            for id in ids {
                check(|s| &mut s.p_other, id as usize);
            }
        }
        worst
    }
}
