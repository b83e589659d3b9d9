//! Joint training loop.
//!
//! Each training tuple `(t, i, j, k, l)` drives one [`main_step`]: four
//! sense inductions, three skip-gram updates and three policy updates.
//! Language roles alternate every `batch` tuples.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::config::TrainingConfig;
use crate::corpus::{bilingual_context, local_context, ParallelCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::induction::induce;
use crate::math::Real;
use crate::params::{split_roles, LanguageParams, Model, Side};
use crate::policy::{policy_step, PolicySample};
use crate::srl::{sgns_step, NegativeSampler};

/// RNG for parameter initialization.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for one worker in one epoch. Worker 0 is the tuple generator and
/// the single-worker trainer.
pub fn epoch_rng(seed: u64, epoch: u32, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64 + 1) << 16) | worker as u64);
    rng
}

/// Positions for one [`main_step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainTuple {
    /// Sentence-pair index.
    pub t: usize,
    /// Target position on the major side.
    pub i: usize,
    /// Collocated position on the major side.
    pub j: usize,
    /// Target position on the bilingual side.
    pub k: usize,
    /// Collocated position on the bilingual side.
    pub l: usize,
}

/// Uniform position within `m` of `center`, excluding `center`.
/// `len` must be at least 2.
fn neighbor<R: Rng + ?Sized>(center: usize, len: usize, m: usize, rng: &mut R) -> usize {
    let lo = center.saturating_sub(m);
    let hi = (center + m).min(len - 1);
    let pos = lo + rng.random_range(0..hi - lo);
    if pos >= center {
        pos + 1
    } else {
        pos
    }
}

/// One epoch of tuples with `major` as the major side, in shuffled
/// sentence order.
pub fn get_train_data<R: Rng + ?Sized>(
    corpus: &ParallelCorpus,
    major: Side,
    m: usize,
    rng: &mut R,
) -> Vec<TrainTuple> {
    train_data(corpus, major, m, None, rng)
}

fn train_data<R: Rng + ?Sized>(
    corpus: &ParallelCorpus,
    major: Side,
    m: usize,
    keep: Option<&[f64]>,
    rng: &mut R,
) -> Vec<TrainTuple> {
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(rng);
    let mut tuples = Vec::new();
    for t in order {
        let maj = corpus.sentence(t, major);
        let bi = corpus.sentence(t, major.other());
        if maj.len() < 2 || bi.len() < 2 {
            continue;
        }
        for i in 0..maj.len() {
            if let Some(keep) = keep {
                if rng.random::<f64>() >= keep[maj[i] as usize] {
                    continue;
                }
            }
            let j = neighbor(i, maj.len(), m, rng);
            let k = rng.random_range(0..bi.len());
            let l = neighbor(k, bi.len(), m, rng);
            tuples.push(TrainTuple { t, i, j, k, l });
        }
    }
    tuples
}

/// Keep probabilities `min(1, sqrt(t/f) + t/f)` per word id.
fn subsample_keep(vocab: &Vocabulary, threshold: f64) -> Vec<f64> {
    let total: u64 = vocab.counts().iter().sum();
    vocab
        .counts()
        .iter()
        .map(|&c| {
            if c == 0 {
                return 1.0;
            }
            let ratio = threshold / (c as f64 / total as f64);
            (ratio.sqrt() + ratio).min(1.0)
        })
        .collect()
}

/// Outcome of one [`main_step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub major: Side,
    /// Rewards of the major–major, major–bilingual and bilingual–bilingual
    /// skip-gram pairs.
    pub rewards: [f64; 3],
    /// Policy losses of the three induction updates.
    pub policy_losses: [f64; 3],
    /// Selection-distribution entropies of the target decisions on the
    /// major and bilingual side.
    pub entropies: [f64; 2],
}

/// One pass of the joint update for a single tuple.
#[allow(clippy::too_many_arguments)]
pub fn main_step<F: Real, R: Rng + ?Sized>(
    tuple: &TrainTuple,
    corpus: &ParallelCorpus,
    major: Side,
    params: &mut [LanguageParams<F>; 2],
    samplers: &[NegativeSampler; 2],
    config: &TrainingConfig,
    rng: &mut R,
) -> StepReport {
    let other = major.other();
    let maj_sent = corpus.sentence(tuple.t, major);
    let bi_sent = corpus.sentence(tuple.t, other);
    let (maj, bi) = split_roles(params, major);
    let (m, alpha, eps) = (config.window, config.alpha, config.epsilon);
    let senses = config.senses;

    let local_i = local_context(maj_sent, tuple.i, m);
    let local_j = local_context(maj_sent, tuple.j, m);
    let bilingual = bilingual_context(bi_sent, config.bilingual_sample, rng);
    let local_k = local_context(bi_sent, tuple.k, m);
    let local_l = local_context(bi_sent, tuple.l, m);

    let (s_i, s_j, s_l, s_k) = {
        let bil = Some((&bilingual, &bi.p));
        let s_i = induce(maj_sent[tuple.i], major, &local_i, bil, maj, alpha, eps, rng);
        let s_j = induce(maj_sent[tuple.j], major, &local_j, bil, maj, alpha, eps, rng);
        // The bilingual side decodes monolingually; its position-k decision
        // is the partner of s_i.
        let s_l = induce(bi_sent[tuple.k], other, &local_k, None, bi, 1.0, eps, rng);
        let s_k = induce(bi_sent[tuple.l], other, &local_l, None, bi, 1.0, eps, rng);
        (s_i, s_j, s_l, s_k)
    };

    let (n, lr) = (config.negatives, config.lr);
    let sampler_maj = &samplers[major.index()];
    let sampler_bi = &samplers[other.index()];
    let r = sgns_step(s_i.sense, s_j.sense, &mut maj.u, &mut maj.v, sampler_maj, n, lr, rng);
    let r_cross = sgns_step(s_i.sense, s_l.sense, &mut maj.u, &mut bi.v, sampler_bi, n, lr, rng);
    let r_bi = sgns_step(s_l.sense, s_k.sense, &mut bi.u, &mut bi.v, sampler_bi, n, lr, rng);

    let lambda = config.lambda;
    let mut sample = PolicySample {
        word: maj_sent[tuple.i],
        local: local_i,
        bilingual: Some(bilingual),
        chosen_k: s_i.sense.k,
        reward: r.reward,
        alpha,
    };
    let loss_mono = policy_step(&sample, &mut maj.p, &mut maj.q, Some(&mut bi.p), senses, lambda, lr);
    sample.reward = r_cross.reward;
    let loss_cross = policy_step(&sample, &mut maj.p, &mut maj.q, Some(&mut bi.p), senses, lambda, lr);
    let sample_bi = PolicySample {
        word: bi_sent[tuple.k],
        local: local_k,
        bilingual: None,
        chosen_k: s_l.sense.k,
        reward: r_bi.reward,
        alpha: 1.0,
    };
    let loss_bi = policy_step(&sample_bi, &mut bi.p, &mut bi.q, None, senses, lambda, lr);

    StepReport {
        major,
        rewards: [r.reward, r_cross.reward, r_bi.reward],
        policy_losses: [loss_mono, loss_cross, loss_bi],
        entropies: [s_i.entropy(), s_l.entropy()],
    }
}

/// Mean rewards and policy loss over one reporting interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressRecord {
    pub step: u64,
    pub mean_rewards: [f64; 3],
    pub mean_policy_loss: f64,
}

impl fmt::Display for ProgressRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, rc, rb] = self.mean_rewards;
        write!(
            f,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            self.step, r, rc, rb, self.mean_policy_loss
        )
    }
}

#[derive(Default)]
struct Accumulator {
    steps: u64,
    rewards: [f64; 3],
    loss: f64,
}

impl Accumulator {
    fn add(&mut self, report: &StepReport) {
        self.steps += 1;
        for (acc, r) in self.rewards.iter_mut().zip(report.rewards) {
            *acc += r;
        }
        self.loss += report.policy_losses.iter().sum::<f64>() / 3.0;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.steps += other.steps;
        for (a, b) in self.rewards.iter_mut().zip(other.rewards) {
            *a += b;
        }
        self.loss += other.loss;
    }

    fn take_record(&mut self, step: u64) -> Option<ProgressRecord> {
        if self.steps == 0 {
            return None;
        }
        let n = self.steps as f64;
        let record = ProgressRecord {
            step,
            mean_rewards: self.rewards.map(|r| r / n),
            mean_policy_loss: self.loss / n,
        };
        *self = Accumulator::default();
        Some(record)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    /// Final checkpoint path; per-epoch checkpoints go to `<path>.epoch<N>`.
    pub checkpoint: Option<PathBuf>,
    /// Number of training threads. 1 is the deterministic mode.
    pub workers: usize,
    /// Steps per progress record (single-worker); parallel runs report
    /// once per epoch.
    pub report_interval: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            checkpoint: None,
            workers: 1,
            report_interval: 10_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainSummary {
    pub steps: u64,
    pub records: Vec<ProgressRecord>,
}

pub fn epoch_checkpoint_path(path: &Path, epoch: u32) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(format!(".epoch{epoch}"));
    PathBuf::from(name)
}

fn check_writable(path: &Path) -> Result<()> {
    let probe = path.with_extension("tmp");
    fs::write(&probe, b"").map_err(|e| Error::io(path, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Run the remaining epochs of `model.config` on `corpus`.
///
/// Training resumes at `model.epochs_done`, so a reloaded per-epoch
/// checkpoint continues exactly where it stopped. Progress records are
/// written to `progress` as they are produced; `on_step` sees every step
/// report in single-worker mode.
pub fn train(
    model: &mut Model,
    corpus: &ParallelCorpus,
    options: &TrainOptions,
    progress: &mut dyn Write,
    on_step: &mut dyn FnMut(&StepReport),
) -> Result<TrainSummary> {
    model.config.validate()?;
    for (side, lang) in corpus.languages().iter().enumerate() {
        if *lang != model.languages[side] {
            return Err(Error::LanguageMismatch {
                found: lang.clone(),
                expected: model.languages.clone(),
            });
        }
    }
    if let Some(path) = &options.checkpoint {
        check_writable(path)?;
    }
    if options.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }

    let config = model.config.clone();
    let samplers = [
        NegativeSampler::new(&model.vocabs[0], config.senses, Side::A)?,
        NegativeSampler::new(&model.vocabs[1], config.senses, Side::B)?,
    ];
    let keep = (config.subsample > 0.0).then(|| {
        [
            subsample_keep(&model.vocabs[0], config.subsample),
            subsample_keep(&model.vocabs[1], config.subsample),
        ]
    });

    let mut summary = TrainSummary::default();
    let mut acc = Accumulator::default();
    let interval = options.report_interval.max(1);

    while model.epochs_done < config.epochs {
        let epoch = model.epochs_done;
        let mut rng = epoch_rng(config.seed, epoch, 0);
        let keep_a = keep.as_ref().map(|k| k[0].as_slice());
        let keep_b = keep.as_ref().map(|k| k[1].as_slice());
        let tuples_a = train_data(corpus, Side::A, config.window, keep_a, &mut rng);
        let tuples_b = train_data(corpus, Side::B, config.window, keep_b, &mut rng);
        let schedule = interleave(&tuples_a, &tuples_b, config.batch);

        if options.workers == 1 {
            for (major, batch) in &schedule {
                for tuple in *batch {
                    let report = main_step(
                        tuple,
                        corpus,
                        *major,
                        &mut model.params,
                        &samplers,
                        &config,
                        &mut rng,
                    );
                    summary.steps += 1;
                    acc.add(&report);
                    on_step(&report);
                    if summary.steps % interval == 0 {
                        emit(&mut acc, summary.steps, progress, &mut summary.records)?;
                    }
                }
            }
        } else {
            let epoch_acc = train_parallel(
                &schedule,
                corpus,
                &mut model.params,
                &samplers,
                &config,
                epoch,
                options.workers,
            );
            summary.steps += epoch_acc.steps;
            acc.merge(&epoch_acc);
            emit(&mut acc, summary.steps, progress, &mut summary.records)?;
        }

        model.epochs_done += 1;
        log::info!("finished epoch {} ({} steps)", model.epochs_done, summary.steps);
        if let Some(path) = &options.checkpoint {
            checkpoint::save(model, epoch_checkpoint_path(path, model.epochs_done))?;
        }
    }

    emit(&mut acc, summary.steps, progress, &mut summary.records)?;
    if let Some(path) = &options.checkpoint {
        checkpoint::save(model, path)?;
    }
    Ok(summary)
}

fn emit(
    acc: &mut Accumulator,
    step: u64,
    out: &mut dyn Write,
    records: &mut Vec<ProgressRecord>,
) -> Result<()> {
    if let Some(record) = acc.take_record(step) {
        writeln!(out, "{record}")?;
        records.push(record);
    }
    Ok(())
}

/// Alternate batches of the two role streams, A first. When one stream
/// runs out the other continues alone.
fn interleave<'a>(
    a: &'a [TrainTuple],
    b: &'a [TrainTuple],
    batch: usize,
) -> Vec<(Side, &'a [TrainTuple])> {
    let mut ca = a.chunks(batch);
    let mut cb = b.chunks(batch);
    let mut out = Vec::with_capacity(a.len() / batch + b.len() / batch + 2);
    loop {
        let (x, y) = (ca.next(), cb.next());
        if x.is_none() && y.is_none() {
            break;
        }
        if let Some(x) = x {
            out.push((Side::A, x));
        }
        if let Some(y) = y {
            out.push((Side::B, y));
        }
    }
    out
}

/// Parameter storage shared by workers without locking. Concurrent writes
/// to the same row race; the last write wins.
struct Hogwild<T>(*mut T);

unsafe impl<T: Send> Send for Hogwild<T> {}
unsafe impl<T: Send> Sync for Hogwild<T> {}

impl<T> Hogwild<T> {
    #[allow(clippy::mut_from_ref)]
    unsafe fn get(&self) -> &mut T {
        &mut *self.0
    }
}

fn train_parallel<F: Real>(
    schedule: &[(Side, &[TrainTuple])],
    corpus: &ParallelCorpus,
    params: &mut [LanguageParams<F>; 2],
    samplers: &[NegativeSampler; 2],
    config: &TrainingConfig,
    epoch: u32,
    workers: usize,
) -> Accumulator {
    let shared = Hogwild(params as *mut [LanguageParams<F>; 2]);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let shared = &shared;
                scope.spawn(move || {
                    let mut rng = epoch_rng(config.seed, epoch, w + 1);
                    let mut acc = Accumulator::default();
                    for (major, batch) in schedule.iter().skip(w).step_by(workers) {
                        for tuple in *batch {
                            // SAFETY: rows are updated without synchronization by
                            // design; every access stays in bounds and the
                            // storage outlives the scope.
                            let params = unsafe { shared.get() };
                            let report =
                                main_step(tuple, corpus, *major, params, samplers, config, &mut rng);
                            acc.add(&report);
                        }
                    }
                    acc
                })
            })
            .collect();
        let mut total = Accumulator::default();
        for h in handles {
            total.merge(&h.join().expect("training worker panicked"));
        }
        total
    })
}
