//! Embedding persistence.
//!
//! Text: a `"<vocab_size> <dim>"` header line, then `word v1 … vD` per row.
//! Binary: magic `CWME`, `u32` version, `u64` vocabulary size, `u32` dim, then
//! `f32` rows in id order, all little-endian. The binary format carries no
//! words; it is read against a vocabulary file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::matrix::EmbeddingMatrix;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const EMBEDDINGS_MAGIC: &[u8; 4] = b"CWME";
pub const EMBEDDINGS_VERSION: u32 = 1;

pub fn write_text<T: Real, W: Write>(m: &EmbeddingMatrix<T>, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", m.len(), m.dim())?;
    for id in 0..m.len() as u32 {
        let word = m.vocab().word(id);
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::Incompatible(format!(
                "word {word:?} cannot be written in the text format"
            )));
        }
        w.write_all(word.as_bytes())?;
        for x in m.row(id) {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text<T: Real, R: BufRead>(mut r: R) -> Result<EmbeddingMatrix<T>> {
    let mut line = String::new();
    let mut offset = 0u64;
    r.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let parse_dim = |s: Option<&str>, what: &str| -> Result<usize> {
        s.and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(0, format!("header: missing or invalid {what}")))
    };
    let rows = parse_dim(parts.next(), "vocabulary size")?;
    let dim = parse_dim(parts.next(), "dimension")?;
    if dim == 0 {
        return Err(Error::parse(0, "header: dimension must be positive"));
    }
    offset += line.len() as u64;

    let mut words = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    for _ in 0..rows {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::parse(offset, format!("expected {rows} rows, found {}", words.len())));
        }
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| Error::parse(offset, "empty row"))?;
        let before = data.len();
        for f in fields {
            let x: T = f
                .parse()
                .map_err(|_| Error::parse(offset, format!("invalid number `{f}`")))?;
            data.push(x);
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                offset,
                format!("row `{word}` has {} values, header says {dim}", data.len() - before),
            ));
        }
        words.push(word.to_owned());
        offset += line.len() as u64;
    }
    let vocab = Vocabulary::from_words(words).map_err(|e| Error::parse(offset, e.to_string()))?;
    EmbeddingMatrix::from_rows(Arc::new(vocab), dim, data)
}

pub fn write_binary<T: Real, W: Write>(m: &EmbeddingMatrix<T>, mut w: W) -> Result<()> {
    w.write_all(EMBEDDINGS_MAGIC)?;
    w.write_all(&EMBEDDINGS_VERSION.to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    w.write_all(&(m.dim() as u32).to_le_bytes())?;
    for x in m.as_slice() {
        w.write_all(&x.as_f32().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read binary rows for `vocab`. The stored vocabulary size must match.
pub fn read_binary<T: Real, R: Read>(mut r: R, vocab: Arc<Vocabulary>) -> Result<EmbeddingMatrix<T>> {
    let mut header = [0u8; 20];
    r.read_exact(&mut header)
        .map_err(|_| Error::parse(0, "truncated header"))?;
    if &header[0..4] != EMBEDDINGS_MAGIC {
        return Err(Error::parse(0, "bad magic, expected CWME"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != EMBEDDINGS_VERSION {
        return Err(Error::parse(4, format!("unsupported format version {version}")));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
    if rows != vocab.len() as u64 {
        return Err(Error::Incompatible(format!(
            "embedding file has {rows} rows, vocabulary has {}",
            vocab.len()
        )));
    }
    if dim == 0 {
        return Err(Error::parse(16, "dimension must be positive"));
    }
    let n = vocab.len() * dim;
    let mut bytes = Vec::with_capacity(n * 4);
    r.take(n as u64 * 4).read_to_end(&mut bytes)?;
    if bytes.len() != n * 4 {
        let offset = 20 + (bytes.len() / 4 * 4) as u64;
        return Err(Error::parse(offset, "truncated row data"));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    EmbeddingMatrix::from_rows(vocab, dim, data)
}

pub fn save_text<T: Real>(m: &EmbeddingMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_text(m, BufWriter::new(File::create(path)?))
}

pub fn load_text<T: Real>(path: impl AsRef<Path>) -> Result<EmbeddingMatrix<T>> {
    read_text(BufReader::new(File::open(path)?))
}

pub fn save_binary<T: Real>(m: &EmbeddingMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_binary(m, BufWriter::new(File::create(path)?))
}

pub fn load_binary<T: Real>(path: impl AsRef<Path>, vocab: Arc<Vocabulary>) -> Result<EmbeddingMatrix<T>> {
    read_binary(BufReader::new(File::open(path)?), vocab)
}
