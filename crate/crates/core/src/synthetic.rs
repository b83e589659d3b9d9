//! Generated parallel corpora with a planted ambiguous word, for smoke
//! tests, benchmarks and demos.
//!
//! Every topic owns a ring of words. A sentence is a contiguous arc of one
//! topic's ring, or, half the time, a run of a second strided ordering of
//! the same words. On a plain ring, adjacent words see almost the same
//! contexts and end up as near-duplicates; the second ordering gives each
//! word its own profile. The translation of a sentence maps every word to
//! its own counterpart and reverses the order. One slot of topics 0 and 1
//! holds the same pseudoword, which translates to a different foreign word
//! in each. The pseudoword only ever appears on the ring, so its contexts
//! within a topic stay coherent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How a topic's `n` words are arranged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Layout {
    /// Words on a cycle; sentences are contiguous arcs.
    Ring(usize),
    /// A ring plus a second, strided ordering of every word except the
    /// pseudoword.
    Braid(usize),
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[derive(Clone, Debug)]
pub struct ToyCorpusConfig {
    pub topics: usize,
    pub layout: Layout,
    pub min_len: usize,
    pub max_len: usize,
    pub pairs: usize,
    /// Held-out occurrences of the pseudoword per topic.
    pub held_out: usize,
    pub seed: u64,
}

impl Default for ToyCorpusConfig {
    fn default() -> Self {
        ToyCorpusConfig {
            topics: 8,
            layout: Layout::Braid(24),
            min_len: 4,
            max_len: 7,
            pairs: 20_000,
            held_out: 200,
            seed: 7,
        }
    }
}

/// A held-out sentence with the index of the pseudoword.
#[derive(Clone, Debug, PartialEq)]
pub struct Occurrence {
    pub tokens: Vec<String>,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct ToyCorpus {
    pub lines_a: Vec<String>,
    pub lines_b: Vec<String>,
    pub pseudoword: String,
    /// Foreign word for the pseudoword in topic 0 and topic 1.
    pub translations: [String; 2],
    /// Held-out occurrences from topic 0 and topic 1 contexts.
    pub held_out: [Vec<Occurrence>; 2],
}

pub const PSEUDOWORD: &str = "bank";

impl ToyCorpusConfig {
    fn slot(&self) -> usize {
        match self.layout {
            Layout::Ring(n) | Layout::Braid(n) => n / 2,
        }
    }

    fn word_a(&self, topic: usize, idx: usize) -> String {
        if topic < 2 && idx == self.slot() {
            PSEUDOWORD.to_string()
        } else {
            format!("a{topic}_{idx}")
        }
    }

    fn word_b(&self, topic: usize, idx: usize) -> String {
        match (topic, idx == self.slot()) {
            (0, true) => "b_river".to_string(),
            (1, true) => "b_money".to_string(),
            _ => format!("b{topic}_{idx}"),
        }
    }

    fn draw<R: Rng>(&self, must: Option<usize>, rng: &mut R) -> Vec<usize> {
        let len = rng.random_range(self.min_len..=self.max_len);
        match self.layout {
            Layout::Ring(n) => {
                let start = match must {
                    Some(m) => (m + n - rng.random_range(0..len)) % n,
                    None => rng.random_range(0..n),
                };
                (0..len).map(|x| (start + x) % n).collect()
            }
            Layout::Braid(n) => {
                // Second order: the other words, stepped by a stride coprime to n − 1.
                let second = must.is_none() && rng.random_bool(0.5);
                let m = n - 1;
                let stride = (m / 2 + 1..m).find(|s| gcd(*s, m) == 1).unwrap_or(1);
                let start = match must {
                    Some(slot) => (slot + n - rng.random_range(0..len)) % n,
                    None => rng.random_range(0..if second { m } else { n }),
                };
                let slot = n / 2;
                (0..len)
                    .map(|x| {
                        if second {
                            let w = (start + x) * stride % m;
                            if w >= slot { w + 1 } else { w }
                        } else {
                            (start + x) % n
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn generate(&self) -> ToyCorpus {
        let (Layout::Ring(n) | Layout::Braid(n)) = self.layout;
        assert!(self.topics >= 2 && n > self.max_len && self.min_len >= 2);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut lines_a = Vec::with_capacity(self.pairs);
        let mut lines_b = Vec::with_capacity(self.pairs);
        for _ in 0..self.pairs {
            let topic = rng.random_range(0..self.topics);
            let words = self.draw(None, &mut rng);
            let a: Vec<String> = words.iter().map(|&i| self.word_a(topic, i)).collect();
            let b: Vec<String> = words.iter().rev().map(|&i| self.word_b(topic, i)).collect();
            lines_a.push(a.join(" "));
            lines_b.push(b.join(" "));
        }

        let held_out = [0, 1].map(|topic| {
            (0..self.held_out)
                .map(|_| {
                    let words = self.draw(Some(self.slot()), &mut rng);
                    Occurrence {
                        target: words.iter().position(|&w| w == self.slot()).unwrap(),
                        tokens: words.iter().map(|&i| self.word_a(topic, i)).collect(),
                    }
                })
                .collect()
        });

        ToyCorpus {
            lines_a,
            lines_b,
            pseudoword: PSEUDOWORD.to_string(),
            translations: [self.word_b(0, self.slot()), self.word_b(1, self.slot())],
            held_out,
        }
    }
}
