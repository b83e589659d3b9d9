//! Shared setup for the step benchmarks.

use xsense::synthetic::ToyCorpusConfig;
use xsense::trainer::{get_train_data, init_rng};
use xsense::{Model, NegativeSampler, ParallelCorpus, Side, TrainTuple, TrainingConfig, Vocabulary};

/// A toy-corpus model at full 300-dimension size with its samplers and one
/// epoch of major-side tuples.
pub struct Fixture {
    pub model: Model,
    pub corpus: ParallelCorpus,
    pub samplers: [NegativeSampler; 2],
    pub tuples: Vec<TrainTuple>,
}

impl Fixture {
    pub fn new(dim: usize) -> Self {
        let toy = ToyCorpusConfig {
            pairs: 2_000,
            ..Default::default()
        }
        .generate();
        let vocab_a = Vocabulary::build(toy.lines_a.join("\n").as_bytes(), 1, false).unwrap();
        let vocab_b = Vocabulary::build(toy.lines_b.join("\n").as_bytes(), 1, false).unwrap();
        let languages = ["xa".to_string(), "xb".to_string()];
        let corpus =
            ParallelCorpus::from_lines(&toy.lines_a, &toy.lines_b, &vocab_a, &vocab_b, languages.clone()).unwrap();
        let config = TrainingConfig {
            dim,
            ..Default::default()
        };
        let mut rng = init_rng(config.seed);
        let model = Model::init(config.clone(), languages, [vocab_a, vocab_b], &mut rng).unwrap();
        let samplers = [
            NegativeSampler::new(&model.vocabs[0], config.senses, Side::A).unwrap(),
            NegativeSampler::new(&model.vocabs[1], config.senses, Side::B).unwrap(),
        ];
        let tuples = get_train_data(&corpus, Side::A, config.window, &mut rng);
        Fixture {
            model,
            corpus,
            samplers,
            tuples,
        }
    }
}
