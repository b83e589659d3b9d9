//! Vocabularies, sentence-parallel corpora and context windows.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;

use crate::error::{Error, Result};

/// Word id of the padding entry.
pub const PAD: u32 = 0;

/// Surface form of the padding entry. It is never produced by lookups.
pub const PAD_TOKEN: &str = "<pad>";

/// Token ↔ id mapping with occurrence counts for one language.
///
/// Id 0 is reserved for padding; real tokens occupy ids `1..len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    lowercase: bool,
}

impl Vocabulary {
    /// Build a vocabulary from a whitespace-tokenized line stream.
    ///
    /// Ids are assigned by descending count; ties keep first-occurrence
    /// order. Tokens seen fewer than `min_count` times are dropped.
    pub fn build<R: BufRead>(mut reader: R, min_count: u64, lowercase: bool) -> Result<Self> {
        let mut counts: IndexMap<String, u64> = IndexMap::new();
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let line =
                std::str::from_utf8(&buf).map_err(|_| Error::InvalidUtf8 { line: line_no })?;
            for token in line.split_whitespace() {
                let token = normalize(token, lowercase);
                if token == PAD_TOKEN {
                    continue;
                }
                *counts.entry(token.into_owned()).or_insert(0) += 1;
            }
        }

        if counts.is_empty() {
            return Err(Error::Empty("token stream"));
        }

        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .collect();
        // Stable sort keeps first-occurrence order among equal counts.
        entries.sort_by_key(|e| std::cmp::Reverse(e.1));

        if entries.is_empty() {
            return Err(Error::Empty("vocabulary after min_count filtering"));
        }

        Ok(Self::from_counts(entries, lowercase))
    }

    /// Construct from `(token, count)` pairs already in id order (ids 1..).
    pub fn from_counts<I, S>(entries: I, lowercase: bool) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut tokens = vec![PAD_TOKEN.to_string()];
        let mut counts = vec![0];
        for (token, count) in entries {
            tokens.push(token.into());
            counts.push(count);
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(id, t)| (t.clone(), id as u32))
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
            lowercase,
        }
    }

    /// Number of entries including PAD.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// True when no real (non-PAD) token is present.
    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 1
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn normalize<'a>(&self, token: &'a str) -> Cow<'a, str> {
        normalize(token, self.lowercase)
    }

    /// Look up a raw token (normalized first). PAD is never returned.
    pub fn id(&self, token: &str) -> Option<u32> {
        match self.index.get(self.normalize(token).as_ref()) {
            Some(&PAD) | None => None,
            Some(&id) => Some(id),
        }
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Tokenize a line into ids, dropping out-of-vocabulary tokens.
    pub fn encode(&self, line: &str) -> Vec<u32> {
        line.split_whitespace().filter_map(|t| self.id(t)).collect()
    }

    /// Write `token<TAB>count` lines for ids 1.. in id order.
    pub fn write_dump<W: Write>(&self, mut writer: W) -> Result<()> {
        for (token, count) in self.tokens.iter().zip(&self.counts).skip(1) {
            writeln!(writer, "{token}\t{count}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(reader: R, lowercase: bool) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let (token, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected token<TAB>count".into(),
            })?;
            let count = count.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad count {count:?}"),
            })?;
            entries.push((token.to_string(), count));
        }
        Ok(Self::from_counts(entries, lowercase))
    }
}

fn normalize(token: &str, lowercase: bool) -> Cow<'_, str> {
    if lowercase && token.chars().any(char::is_uppercase) {
        Cow::Owned(token.to_lowercase())
    } else {
        Cow::Borrowed(token)
    }
}

/// Sentence-aligned bilingual corpus as id sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelCorpus {
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
    languages: [String; 2],
    skipped: usize,
}

impl ParallelCorpus {
    /// Load two line-parallel files, dropping OOV tokens and skipping pairs
    /// where either side becomes empty.
    pub fn load(
        path_a: impl AsRef<Path>,
        path_b: impl AsRef<Path>,
        vocab_a: &Vocabulary,
        vocab_b: &Vocabulary,
        languages: [String; 2],
    ) -> Result<Self> {
        let path_a = path_a.as_ref();
        let path_b = path_b.as_ref();
        let lines_a = read_lines(path_a)?;
        let lines_b = read_lines(path_b)?;
        Self::from_lines(&lines_a, &lines_b, vocab_a, vocab_b, languages)
    }

    pub fn from_lines<S: AsRef<str>>(
        lines_a: &[S],
        lines_b: &[S],
        vocab_a: &Vocabulary,
        vocab_b: &Vocabulary,
        languages: [String; 2],
    ) -> Result<Self> {
        if lines_a.len() != lines_b.len() {
            return Err(Error::LineCountMismatch {
                lines_a: lines_a.len(),
                lines_b: lines_b.len(),
            });
        }
        let mut pairs = Vec::with_capacity(lines_a.len());
        let mut skipped = 0;
        for (a, b) in lines_a.iter().zip(lines_b) {
            let a = vocab_a.encode(a.as_ref());
            let b = vocab_b.encode(b.as_ref());
            if a.is_empty() || b.is_empty() {
                skipped += 1;
            } else {
                pairs.push((a, b));
            }
        }
        Ok(ParallelCorpus {
            pairs,
            languages,
            skipped,
        })
    }

    /// Build directly from id sequences. Pairs with an empty side are skipped.
    pub fn from_pairs(pairs: Vec<(Vec<u32>, Vec<u32>)>, languages: [String; 2]) -> Self {
        let total = pairs.len();
        let pairs: Vec<_> = pairs
            .into_iter()
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .collect();
        ParallelCorpus {
            skipped: total - pairs.len(),
            pairs,
            languages,
        }
    }

    pub fn pairs(&self) -> &[(Vec<u32>, Vec<u32>)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn languages(&self) -> &[String; 2] {
        &self.languages
    }

    /// Number of input pairs dropped because a side was empty after OOV removal.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Sentence `t` on the given side.
    pub fn sentence(&self, t: usize, side: crate::Side) -> &[u32] {
        let (a, b) = &self.pairs[t];
        match side {
            crate::Side::A => a,
            crate::Side::B => b,
        }
    }
}

/// Read a UTF-8 text file into lines, reporting the line number of any
/// invalid byte sequence.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut lines = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        let line = String::from_utf8(std::mem::take(&mut buf)).map_err(|_| Error::InvalidUtf8 {
            line: lines.len() + 1,
        })?;
        lines.push(line.trim_end_matches(['\n', '\r']).to_string());
    }
    Ok(lines)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowOrigin {
    /// Up to `m` tokens on either side of the target, target excluded.
    Local,
    /// Exactly `M` ids sampled from the parallel sentence, PAD-padded.
    Bilingual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextWindow {
    pub ids: Vec<u32>,
    pub origin: WindowOrigin,
}

impl ContextWindow {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Clipped window of `m` tokens around `position`, excluding it.
pub fn local_context(sentence: &[u32], position: usize, m: usize) -> ContextWindow {
    debug_assert!(position < sentence.len());
    let lo = position.saturating_sub(m);
    let hi = (position + m + 1).min(sentence.len());
    let ids = sentence[lo..position]
        .iter()
        .chain(&sentence[position + 1..hi])
        .copied()
        .collect();
    ContextWindow {
        ids,
        origin: WindowOrigin::Local,
    }
}

/// Sample `m` positions of `sentence` without replacement, keeping their
/// original order, or pad the whole sentence to length `m`.
pub fn bilingual_context<R: Rng + ?Sized>(sentence: &[u32], m: usize, rng: &mut R) -> ContextWindow {
    let ids = if sentence.len() >= m {
        let mut positions = rand::seq::index::sample(rng, sentence.len(), m).into_vec();
        positions.sort_unstable();
        positions.into_iter().map(|p| sentence[p]).collect()
    } else {
        let mut ids = sentence.to_vec();
        ids.resize(m, PAD);
        ids
    };
    ContextWindow {
        ids,
        origin: WindowOrigin::Bilingual,
    }
}
