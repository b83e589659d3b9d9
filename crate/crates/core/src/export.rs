//! word2vec-style text export of sense embeddings.
//!
//! The first line holds `<rows> <dim>`; each following line holds
//! `token#k` and the `dim` components of that sense's input embedding.
//! A literal `#` inside a token is written as `##`, so the last single
//! `#` always separates the token from the sense index.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{Vocabulary, PAD};
use crate::error::{Error, Result};
use crate::params::LanguageParams;

pub fn sense_label(token: &str, k: usize) -> String {
    format!("{}#{k}", token.replace('#', "##"))
}

/// Split `token#k` into the unescaped token and `k`.
pub fn parse_sense_label(label: &str) -> Option<(String, usize)> {
    let (token, k) = label.rsplit_once('#')?;
    let k = k.parse().ok()?;
    if token.is_empty() {
        return None;
    }
    // An odd run of trailing '#' means the separator was itself escaped.
    let trailing = token.len() - token.trim_end_matches('#').len();
    if trailing % 2 == 1 {
        return None;
    }
    Some((token.replace("##", "#"), k))
}

pub fn write_senses<W: Write>(
    params: &LanguageParams<f32>,
    vocab: &Vocabulary,
    mut writer: W,
) -> Result<()> {
    let senses = params.senses();
    let rows = (vocab.len() - 1) * senses;
    writeln!(writer, "{rows} {}", params.dim())?;
    for word in 1..vocab.len() as u32 {
        debug_assert_ne!(word, PAD);
        for k in 0..senses {
            write!(writer, "{}", sense_label(vocab.token(word), k))?;
            for x in params.u.row(word as usize * senses + k) {
                write!(writer, " {x}")?;
            }
            writeln!(writer)?;
        }
    }
    Ok(())
}

pub fn export_senses(
    params: &LanguageParams<f32>,
    vocab: &Vocabulary,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_senses(params, vocab, &mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// One parsed row of an exported sense file.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseVector {
    pub token: String,
    pub k: usize,
    pub vector: Vec<f32>,
}

pub fn read_senses<R: BufRead>(reader: R) -> Result<Vec<SenseVector>> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Empty("sense file"))??;
    let bad_header = || Error::Parse {
        line: 1,
        message: format!("expected `<rows> <dim>` header, got {header:?}"),
    };
    let mut fields = header.split_whitespace();
    let rows: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;
    let dim: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;

    let mut out = Vec::with_capacity(rows);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut fields = line.split(' ');
        let label = fields.next().unwrap_or_default();
        let (token, k) =
            parse_sense_label(label).ok_or_else(|| err(format!("bad sense label {label:?}")))?;
        let vector = fields
            .map(|f| f.parse::<f32>().map_err(|_| err(format!("bad component {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if vector.len() != dim {
            return Err(err(format!("expected {dim} components, got {}", vector.len())));
        }
        out.push(SenseVector { token, k, vector });
    }
    if out.len() != rows {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares {rows} rows, file has {}", out.len()),
        });
    }
    Ok(out)
}

pub fn load_senses(path: impl AsRef<Path>) -> Result<Vec<SenseVector>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_senses(BufReader::new(file))
}
