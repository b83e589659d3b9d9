//! Binary checkpoint format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes   "XSENSECK"
//! version    u32
//! config     alpha f64, window u32, bilingual_sample u32, epsilon f64,
//!            lambda f64, negatives u32, lr f64, batch u32, dim u32,
//!            senses u32, epochs u32, seed u64, subsample f64, epochs_done u32
//! languages  2 × string
//! vocabs     2 × (lowercase u8, entries u32, entries × (string, count u64))
//! params     2 × [P, Q, U, V], each rows u32, cols u32, rows·cols × f32
//! crc32      u32 over every preceding byte
//! ```
//!
//! Strings are a u32 byte length followed by UTF-8 bytes. Vocabulary
//! entries exclude PAD, which is implied at id 0.

use std::fs;
use std::path::Path;

use crate::config::TrainingConfig;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::params::{LanguageParams, Matrix, Model};

pub const MAGIC: &[u8; 8] = b"XSENSECK";
pub const VERSION: u32 = 1;

pub fn save(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = to_bytes(model);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);

    let c = &model.config;
    w.f64(c.alpha);
    w.u32(c.window as u32);
    w.u32(c.bilingual_sample as u32);
    w.f64(c.epsilon);
    w.f64(c.lambda);
    w.u32(c.negatives as u32);
    w.f64(c.lr);
    w.u32(c.batch as u32);
    w.u32(c.dim as u32);
    w.u32(c.senses as u32);
    w.u32(c.epochs);
    w.u64(c.seed);
    w.f64(c.subsample);
    w.u32(model.epochs_done);

    for lang in &model.languages {
        w.str(lang);
    }
    for vocab in &model.vocabs {
        w.0.push(vocab.lowercase() as u8);
        w.u32((vocab.len() - 1) as u32);
        for (token, &count) in vocab.tokens().iter().zip(vocab.counts()).skip(1) {
            w.str(token);
            w.u64(count);
        }
    }
    for params in &model.params {
        for m in [&params.p, &params.q, &params.u, &params.v] {
            w.u32(m.rows() as u32);
            w.u32(m.cols() as u32);
            for x in m.as_slice() {
                w.0.extend_from_slice(&x.to_le_bytes());
            }
        }
    }

    let crc = crc32fast::hash(&w.0);
    w.u32(crc);
    w.0
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() + 4 {
        return Err(if bytes.starts_with(&MAGIC[..bytes.len().min(8)]) {
            Error::Truncated
        } else {
            Error::BadMagic
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            expected: VERSION,
        });
    }
    if bytes.len() < 16 {
        return Err(Error::Truncated);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader { buf: body, pos: 12 };
    let config = TrainingConfig {
        alpha: r.f64()?,
        window: r.u32()? as usize,
        bilingual_sample: r.u32()? as usize,
        epsilon: r.f64()?,
        lambda: r.f64()?,
        negatives: r.u32()? as usize,
        lr: r.f64()?,
        batch: r.u32()? as usize,
        dim: r.u32()? as usize,
        senses: r.u32()? as usize,
        epochs: r.u32()?,
        seed: r.u64()?,
        subsample: r.f64()?,
    };
    let epochs_done = r.u32()?;
    config.validate()?;

    let languages = [r.string()?, r.string()?];
    let vocabs = [r.vocab()?, r.vocab()?];

    let mut params = Vec::with_capacity(2);
    for vocab in &vocabs {
        let words = vocab.len();
        let sense_rows = words * config.senses;
        let p = r.matrix("P", words, config.dim)?;
        let q = r.matrix("Q", sense_rows, config.dim)?;
        let u = r.matrix("U", sense_rows, config.dim)?;
        let v = r.matrix("V", sense_rows, config.dim)?;
        params.push(LanguageParams::from_blocks(p, q, u, v, config.senses)?);
    }
    if r.pos != body.len() {
        return Err(Error::Shape(format!(
            "{} trailing bytes after parameter payload",
            body.len() - r.pos
        )));
    }
    let b = params.pop().unwrap();
    let a = params.pop().unwrap();

    Ok(Model {
        config,
        languages,
        vocabs,
        params: [a, b],
        epochs_done,
    })
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated)?;
        let slice = self.buf.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.array().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.array().map(f64::from_le_bytes)
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::Shape("string field is not UTF-8".into()))
    }

    fn vocab(&mut self) -> Result<Vocabulary> {
        let lowercase = self.take(1)?[0] != 0;
        let n = self.u32()? as usize;
        let mut entries = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let token = self.string()?;
            let count = self.u64()?;
            entries.push((token, count));
        }
        Ok(Vocabulary::from_counts(entries, lowercase))
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<Matrix<f32>> {
        let stored_rows = self.u32()? as usize;
        let stored_cols = self.u32()? as usize;
        if stored_rows != rows || stored_cols != cols {
            return Err(Error::Shape(format!(
                "block {name} declared {stored_rows}x{stored_cols}, config implies {rows}x{cols}"
            )));
        }
        let bytes = self.take(rows * cols * 4)?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Matrix::from_vec(rows, cols, data))
    }
}
