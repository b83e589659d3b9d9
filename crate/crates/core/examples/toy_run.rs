//! Train on the generated toy corpus and print sense separation, nearest
//! cross-language neighbors and the reward/entropy trend.
//!
//! cargo run --release -p xsense --example toy_run -- [epochs] [seed]

use std::time::Instant;

use xsense::eval::{decode_target, knn};
use xsense::synthetic::ToyCorpusConfig;
use xsense::trainer::{init_rng, train};
use xsense::{Model, ParallelCorpus, Side, TrainOptions, TrainingConfig, Vocabulary};

fn main() -> xsense::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).map_or(5, |s| s.parse().unwrap());
    let seed = args.get(2).map_or(1, |s| s.parse().unwrap());

    let toy = ToyCorpusConfig::default().generate();
    let vocab_a = Vocabulary::build(toy.lines_a.join("\n").as_bytes(), 5, true)?;
    let vocab_b = Vocabulary::build(toy.lines_b.join("\n").as_bytes(), 5, true)?;
    let languages = ["xa".to_string(), "xb".to_string()];
    let corpus =
        ParallelCorpus::from_lines(&toy.lines_a, &toy.lines_b, &vocab_a, &vocab_b, languages.clone())?;

    let config = TrainingConfig {
        dim: 32,
        senses: 3,
        epsilon: 0.05,
        epochs,
        seed,
        ..Default::default()
    };
    let mut model = Model::init(config, languages, [vocab_a, vocab_b], &mut init_rng(seed))?;

    let mut rewards = Vec::new();
    let mut entropies = Vec::new();
    let start = Instant::now();
    train(
        &mut model,
        &corpus,
        &TrainOptions { report_interval: 100_000, ..Default::default() },
        &mut std::io::stdout(),
        &mut |r| {
            rewards.push(r.rewards.iter().sum::<f64>() / 3.0);
            entropies.push((r.entropies[0] + r.entropies[1]) / 2.0);
        },
    )?;
    println!("trained {} steps in {:.1?}", rewards.len(), start.elapsed());

    let tenth = rewards.len() / 10;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!(
        "reward first/last 10%: {:.4} / {:.4}",
        mean(&rewards[..tenth]),
        mean(&rewards[rewards.len() - tenth..])
    );
    println!(
        "entropy first/last 10%: {:.4} / {:.4}",
        mean(&entropies[..tenth]),
        mean(&entropies[entropies.len() - tenth..])
    );

    for (topic, set) in toy.held_out.iter().enumerate() {
        let mut counts = [0usize; 3];
        for occ in set {
            let d = decode_target(&model, Side::A, &occ.tokens, occ.target, 5).unwrap();
            counts[d.sense.k] += 1;
        }
        let dominant = (0..3).max_by_key(|&k| counts[k]).unwrap();
        let query = xsense::SenseId {
            word: model.vocab(Side::A).id(&toy.pseudoword).unwrap(),
            k: dominant,
            side: Side::A,
        };
        let nn = knn(&model, query, Side::B, 5);
        println!(
            "topic {topic}: sense counts {counts:?}, expected {}, neighbors {:?}",
            toy.translations[topic],
            nn.iter().map(|n| format!("{} {:.3}", n.label, n.cosine)).collect::<Vec<_>>()
        );
    }
    Ok(())
}
