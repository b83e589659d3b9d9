//! Contextual word-similarity evaluation and nearest-neighbor inspection.
//!
//! Datasets are UTF-8 TSV, one item per line:
//!
//! ```text
//! id  lang_a  target_index_a  sentence_a  lang_b  target_index_b  sentence_b  gold
//! ```
//!
//! Sentences are whitespace-tokenized and the target is given by its
//! zero-based token index. Both sides are decoded with the monolingual
//! induction path (α = 1, ε = 0).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::{local_context, Vocabulary};
use crate::error::{Error, Result};
use crate::export::{parse_sense_label, sense_label};
use crate::induction::{induce_greedy, SenseDecision};
use crate::math::cosine;
use crate::params::{Model, SenseId, Side};

/// Gold scores are accepted in this closed range.
pub const GOLD_RANGE: (f64, f64) = (0.0, 10.0);

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSentence {
    pub language: String,
    pub tokens: Vec<String>,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalItem {
    pub id: String,
    pub a: EvalSentence,
    pub b: EvalSentence,
    pub gold: f64,
}

pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Vec<EvalItem>> {
    let mut items = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        items.push(parse_item(&line).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?);
    }
    Ok(items)
}

fn parse_item(line: &str) -> std::result::Result<EvalItem, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 8 {
        return Err(format!("expected 8 tab-separated fields, got {}", fields.len()));
    }
    let sentence = |lang: &str, index: &str, text: &str| {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        let target: usize = index
            .trim()
            .parse()
            .map_err(|_| format!("bad target index {index:?}"))?;
        if target >= tokens.len() {
            return Err(format!(
                "target index {target} out of range for {} tokens",
                tokens.len()
            ));
        }
        Ok(EvalSentence {
            language: lang.trim().to_string(),
            tokens,
            target,
        })
    };
    let gold: f64 = fields[7]
        .trim()
        .parse()
        .map_err(|_| format!("bad gold score {:?}", fields[7]))?;
    if !(GOLD_RANGE.0..=GOLD_RANGE.1).contains(&gold) {
        return Err(format!("gold score {gold} outside [0, 10]"));
    }
    Ok(EvalItem {
        id: fields[0].to_string(),
        a: sentence(fields[1], fields[2], fields[3])?,
        b: sentence(fields[4], fields[5], fields[6])?,
        gold,
    })
}

pub fn write_item<W: Write>(item: &EvalItem, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        item.id,
        item.a.language,
        item.a.target,
        item.a.tokens.join(" "),
        item.b.language,
        item.b.target,
        item.b.tokens.join(" "),
        item.gold
    )?;
    Ok(())
}

/// Sense distribution of one occurrence plus the input embeddings of all
/// senses of its word.
#[derive(Clone, Debug)]
pub struct ContextualSenses<'a> {
    pub distribution: Vec<f64>,
    pub chosen: usize,
    pub embeddings: Vec<&'a [f32]>,
}

impl<'a> ContextualSenses<'a> {
    pub fn from_decision(decision: &SenseDecision<f32>, model: &'a Model) -> Self {
        let params = model.side_params(decision.sense.side);
        let embeddings = (0..params.senses())
            .map(|k| params.sense_embedding(SenseId { k, ..decision.sense }))
            .collect();
        ContextualSenses {
            distribution: decision.distribution.clone(),
            chosen: decision.sense.k,
            embeddings,
        }
    }
}

/// Σ_k Σ_l π_a(k) π_b(l) cos(U_a[k], U_b[l])
pub fn avg_sim_c(a: &ContextualSenses<'_>, b: &ContextualSenses<'_>) -> f64 {
    let mut total = 0.0;
    for (pa, ua) in a.distribution.iter().zip(&a.embeddings) {
        for (pb, ub) in b.distribution.iter().zip(&b.embeddings) {
            total += pa * pb * cosine(ua, ub);
        }
    }
    total
}

/// Cosine between the most probable senses.
pub fn max_sim_c(a: &ContextualSenses<'_>, b: &ContextualSenses<'_>) -> f64 {
    cosine(a.embeddings[a.chosen], b.embeddings[b.chosen])
}

/// Greedy monolingual decoding of a sentence's target. `None` when the
/// target is out of vocabulary; other OOV tokens are dropped.
pub fn decode_target(
    model: &Model,
    side: Side,
    tokens: &[String],
    target: usize,
    window: usize,
) -> Option<SenseDecision<f32>> {
    let vocab = model.vocab(side);
    let word = vocab.id(&tokens[target])?;
    let mut ids = Vec::with_capacity(tokens.len());
    let mut position = 0;
    for (idx, token) in tokens.iter().enumerate() {
        if idx == target {
            position = ids.len();
            ids.push(word);
        } else if let Some(id) = vocab.id(token) {
            ids.push(id);
        }
    }
    let local = local_context(&ids, position, window);
    Some(induce_greedy(
        word,
        side,
        &local,
        None,
        model.side_params(side),
        1.0,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemScore {
    pub id: String,
    pub gold: f64,
    pub avg_sim_c: f64,
    pub max_sim_c: f64,
}

/// Score one item; `Ok(None)` when a target is out of vocabulary.
pub fn score_item(model: &Model, item: &EvalItem, window: usize) -> Result<Option<ItemScore>> {
    let side_a = model.side_of(&item.a.language)?;
    let side_b = model.side_of(&item.b.language)?;
    let Some(da) = decode_target(model, side_a, &item.a.tokens, item.a.target, window) else {
        return Ok(None);
    };
    let Some(db) = decode_target(model, side_b, &item.b.tokens, item.b.target, window) else {
        return Ok(None);
    };
    let a = ContextualSenses::from_decision(&da, model);
    let b = ContextualSenses::from_decision(&db, model);
    Ok(Some(ItemScore {
        id: item.id.clone(),
        gold: item.gold,
        avg_sim_c: avg_sim_c(&a, &b),
        max_sim_c: max_sim_c(&a, &b),
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub avgsimc_rho: f64,
    pub maxsimc_rho: f64,
    pub scored: usize,
    pub skipped: usize,
    /// More than half of the items were skipped.
    pub low_coverage: bool,
    pub items: Vec<ItemScore>,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.scored + self.skipped
    }

    /// Machine-readable `key=value` block.
    pub fn key_values(&self) -> String {
        format!(
            "avgsimc_rho={}\nmaxsimc_rho={}\nscored={}\nskipped={}\nlow_coverage={}\n",
            self.avgsimc_rho, self.maxsimc_rho, self.scored, self.skipped, self.low_coverage
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Spearman rho x100 (AvgSimC / MaxSimC): {:.1} / {:.1}",
            self.avgsimc_rho * 100.0,
            self.maxsimc_rho * 100.0
        )?;
        writeln!(
            f,
            "scored {} of {} items ({} skipped, OOV target)",
            self.scored,
            self.total(),
            self.skipped
        )?;
        if self.low_coverage {
            writeln!(f, "warning: more than half of the items were skipped")?;
        }
        writeln!(f)?;
        write!(f, "{}", self.key_values())
    }
}

pub fn evaluate(model: &Model, items: &[EvalItem], window: usize) -> Result<EvalReport> {
    let mut scores = Vec::with_capacity(items.len());
    let mut skipped = 0;
    for item in items {
        match score_item(model, item, window)? {
            Some(s) => scores.push(s),
            None => skipped += 1,
        }
    }
    if scores.is_empty() {
        return Err(Error::Empty("evaluation set after skipping OOV items"));
    }
    let gold: Vec<f64> = scores.iter().map(|s| s.gold).collect();
    let avg: Vec<f64> = scores.iter().map(|s| s.avg_sim_c).collect();
    let max: Vec<f64> = scores.iter().map(|s| s.max_sim_c).collect();
    Ok(EvalReport {
        avgsimc_rho: spearman(&avg, &gold)?,
        maxsimc_rho: spearman(&max, &gold)?,
        scored: scores.len(),
        skipped,
        low_coverage: skipped * 2 > items.len(),
        items: scores,
    })
}

pub fn evaluate_file(model: &Model, path: impl AsRef<Path>, window: usize) -> Result<EvalReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let items = parse_dataset(BufReader::new(file))?;
    evaluate(model, &items, window)
}

/// 1-based ranks; tied values share the mean of their rank span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Undefined("spearman: lists differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::Undefined("spearman: need at least two values"));
    }
    if xs.iter().chain(ys).any(|x| x.is_nan()) {
        return Err(Error::Undefined("spearman: NaN input"));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(&ry) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("spearman: constant input"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub label: String,
    pub sense: SenseId,
    pub cosine: f64,
}

/// Resolve `token#k` against one side's vocabulary.
pub fn resolve_sense(model: &Model, side: Side, query: &str) -> Result<SenseId> {
    let vocab = model.vocab(side);
    let senses = model.config.senses;
    let unknown = || Error::UnknownToken {
        query: query.to_string(),
        suggestions: suggest(vocab, query.rsplit_once('#').map_or(query, |(t, _)| t), 5),
    };
    let (token, k) = parse_sense_label(query).ok_or_else(unknown)?;
    let word = vocab.id(&token).ok_or_else(unknown)?;
    if k >= senses {
        return Err(unknown());
    }
    Ok(SenseId { word, k, side })
}

/// Vocabulary tokens closest to `query` by edit distance.
pub fn suggest(vocab: &Vocabulary, query: &str, n: usize) -> Vec<String> {
    let query = vocab.normalize(query);
    let mut scored: Vec<(usize, &String)> = vocab.tokens()[1..]
        .iter()
        .map(|t| (strsim::levenshtein(&query, t), t))
        .collect();
    scored.sort_by_key(|&(d, _)| d);
    scored.into_iter().take(n).map(|(_, t)| t.clone()).collect()
}

/// The `n` sense rows of `target` side's U closest to `query` by cosine,
/// in descending order. The query row itself is excluded; PAD senses
/// are never returned.
pub fn knn(model: &Model, query: SenseId, target: Side, n: usize) -> Vec<Neighbor> {
    let senses = model.config.senses;
    let q = model.side_params(query.side).sense_embedding(query);
    let params = model.side_params(target);
    let vocab = model.vocab(target);
    let mut out: Vec<Neighbor> = (senses..params.u.rows())
        .map(|row| SenseId::from_row(row, senses, target))
        .filter(|s| *s != query)
        .map(|sense| Neighbor {
            label: sense_label(vocab.token(sense.word), sense.k),
            cosine: cosine(q, params.sense_embedding(sense)),
            sense,
        })
        .collect();
    out.sort_by(|a, b| b.cosine.total_cmp(&a.cosine));
    out.truncate(n);
    out
}

/// Convert SCWS-style lines (`id word1 pos1 word2 pos2 context1 context2
/// mean ...`, with the target wrapped in `<b> … </b>`) to the TSV format.
pub fn convert_scws<R: BufRead, W: Write>(reader: R, mut writer: W, language: &str) -> Result<usize> {
    let mut written = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 8 {
            return Err(err(format!("expected at least 8 fields, got {}", fields.len())));
        }
        let side = |text: &str| -> Result<EvalSentence> {
            let (tokens, target) = strip_markup(text)
                .ok_or_else(|| err("context has no <b> … </b> target".into()))?;
            Ok(EvalSentence {
                language: language.to_string(),
                tokens,
                target,
            })
        };
        let gold: f64 = fields[7]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad mean score {:?}", fields[7])))?;
        let item = EvalItem {
            id: fields[0].trim().to_string(),
            a: side(fields[5])?,
            b: side(fields[6])?,
            gold,
        };
        write_item(&item, &mut writer)?;
        written += 1;
    }
    Ok(written)
}

fn strip_markup(text: &str) -> Option<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut target = None;
    let mut inside = false;
    for raw in text.split_whitespace() {
        match raw {
            "<b>" => inside = true,
            "</b>" => inside = false,
            _ => {
                if inside && target.is_none() {
                    target = Some(tokens.len());
                }
                tokens.push(raw.to_string());
            }
        }
    }
    target.map(|t| (tokens, t))
}
