//! Count and vocabulary file formats.
//!
//! Count files are little-endian: magic `CWMC`, `u32` format version, `u64`
//! vocabulary size, `u32` window, then `(u32 i, u32 j, u64 count)` records
//! with `i <= j`, strictly ascending by `(i, j)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::cooc::CooccurrenceStore;
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

pub const COUNTS_MAGIC: &[u8; 4] = b"CWMC";
pub const COUNTS_VERSION: u32 = 1;
const HEADER_LEN: u64 = 20;
const RECORD_LEN: usize = 16;

pub fn write_counts<W: Write>(store: &CooccurrenceStore, mut w: W) -> Result<()> {
    w.write_all(COUNTS_MAGIC)?;
    w.write_all(&COUNTS_VERSION.to_le_bytes())?;
    w.write_all(&(store.vocab_size() as u64).to_le_bytes())?;
    w.write_all(&(store.window() as u32).to_le_bytes())?;
    for (i, j, c) in store.sorted_entries() {
        w.write_all(&i.to_le_bytes())?;
        w.write_all(&j.to_le_bytes())?;
        w.write_all(&c.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Fill `buf` completely, or report how many bytes were available before EOF.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn read_counts<R: Read>(mut r: R) -> Result<CooccurrenceStore> {
    let mut header = [0u8; HEADER_LEN as usize];
    let got = read_full(&mut r, &mut header)?;
    if got < header.len() {
        return Err(Error::parse(got as u64, "truncated header"));
    }
    if &header[0..4] != COUNTS_MAGIC {
        return Err(Error::parse(0, "bad magic, expected CWMC"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != COUNTS_VERSION {
        return Err(Error::parse(4, format!("unsupported format version {version}")));
    }
    let vocab_size = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let window = u32::from_le_bytes(header[16..20].try_into().unwrap());
    if window == 0 {
        return Err(Error::parse(16, "window must be positive"));
    }
    let vocab_size = usize::try_from(vocab_size)
        .ok()
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::parse(8, "vocabulary size out of range"))?;

    let mut store = CooccurrenceStore::new(vocab_size, window as usize)?;
    let mut offset = HEADER_LEN;
    let mut prev: Option<(u32, u32)> = None;
    let mut rec = [0u8; RECORD_LEN];
    loop {
        let got = read_full(&mut r, &mut rec)?;
        if got == 0 {
            break;
        }
        if got < RECORD_LEN {
            return Err(Error::parse(offset, "truncated record"));
        }
        let i = u32::from_le_bytes(rec[0..4].try_into().unwrap());
        let j = u32::from_le_bytes(rec[4..8].try_into().unwrap());
        let c = u64::from_le_bytes(rec[8..16].try_into().unwrap());
        if i > j {
            return Err(Error::parse(offset, format!("record ({i},{j}) has i > j")));
        }
        if j as usize >= vocab_size {
            return Err(Error::parse(offset, format!("id {j} exceeds vocabulary size")));
        }
        if c == 0 || (i == j && c % 2 == 1) {
            return Err(Error::parse(offset, format!("invalid count {c} for ({i},{j})")));
        }
        if prev.is_some_and(|p| p >= (i, j)) {
            return Err(Error::parse(offset, "records not strictly sorted"));
        }
        prev = Some((i, j));
        store.set(i, j, c);
        offset += RECORD_LEN as u64;
    }
    Ok(store)
}

pub fn save_counts(store: &CooccurrenceStore, path: impl AsRef<Path>) -> Result<()> {
    write_counts(store, BufWriter::new(File::create(path)?))
}

pub fn load_counts(path: impl AsRef<Path>) -> Result<CooccurrenceStore> {
    read_counts(BufReader::new(File::open(path)?))
}

/// One `token<TAB>count` line per word, in id order.
pub fn write_vocab<W: Write>(vocab: &Vocabulary, mut w: W) -> Result<()> {
    for (word, count) in vocab.words().iter().zip(vocab.counts()) {
        writeln!(w, "{word}\t{count}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vocab<R: BufRead>(r: R) -> Result<Vocabulary> {
    let mut words = Vec::new();
    let mut counts = Vec::new();
    let mut offset = 0u64;
    for line in r.lines() {
        let line = line?;
        let (word, count) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(offset, "expected token<TAB>count"))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| Error::parse(offset, format!("bad count `{count}`")))?;
        words.push(word.to_owned());
        counts.push(count);
        offset += line.len() as u64 + 1;
    }
    Vocabulary::from_ordered(words, counts)
}

pub fn save_vocab(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    write_vocab(vocab, BufWriter::new(File::create(path)?))
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocabulary> {
    read_vocab(BufReader::new(File::open(path)?))
}
