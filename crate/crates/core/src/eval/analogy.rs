use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::analysis::Quadruple;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// How multi-answer lines (`a<TAB>w1/w2/w3`) are scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiAnswer {
    /// Only the first listed variant is the answer.
    #[default]
    First,
    /// Any in-vocabulary variant counts as a hit.
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyPair {
    pub a: String,
    /// Answer variants, first is canonical.
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub pairs: Vec<AnalogyPair>,
    /// Lines dropped because the same pair already appeared.
    pub duplicates: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogySet {
    pub categories: Vec<Category>,
}

/// A category restricted to in-vocabulary pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedCategory {
    pub name: String,
    /// `(a, variants of b)`; the first variant is canonical. Variants outside
    /// the vocabulary are dropped, pairs whose `a` or canonical `b` is outside
    /// are dropped entirely.
    pub pairs: Vec<(u32, Vec<u32>)>,
    pub total_pairs: usize,
}

/// One ordered combination `(a_i, b_i, a_j, b_j)` of two pairs in a category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyQuery {
    pub category: usize,
    pub quadruple: Quadruple,
    /// Acceptable answers for `d`, canonical first.
    pub answers: Vec<u32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Coverage {
    /// Quadruples formed from all listed pairs.
    pub total: usize,
    /// Quadruples with all four words in the vocabulary and distinct.
    pub evaluated: usize,
    pub out_of_vocabulary: usize,
    pub repeated_word: usize,
}

impl Coverage {
    pub fn merge(&mut self, o: &Coverage) {
        self.total += o.total;
        self.evaluated += o.evaluated;
        self.out_of_vocabulary += o.out_of_vocabulary;
        self.repeated_word += o.repeated_word;
    }
}

impl Category {
    /// Parse `word_a<TAB>word_b` lines; blank lines and `#`/`:` comment lines are skipped.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut seen = HashSet::new();
        let mut duplicates = 0;
        let mut offset = 0u64;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len() as u64;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(':') {
                continue;
            }
            let mut fields = t.split('\t');
            let (a, b) = match (fields.next(), fields.next()) {
                (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => (a.trim(), b.trim()),
                _ => {
                    let mut ws = t.split_whitespace();
                    match (ws.next(), ws.next(), ws.next()) {
                        (Some(a), Some(b), None) => (a, b),
                        _ => return Err(Error::parse(start, "expected \"word_a<TAB>word_b\"")),
                    }
                }
            };
            let a = a.to_lowercase();
            let b: Vec<String> = b
                .split('/')
                .map(|v| v.trim().to_lowercase())
                .filter(|v| !v.is_empty())
                .collect();
            if b.is_empty() {
                return Err(Error::parse(start, "empty answer"));
            }
            if seen.insert((a.clone(), b[0].clone())) {
                pairs.push(AnalogyPair { a, b });
            } else {
                duplicates += 1;
            }
        }
        Ok(Category {
            name: name.into(),
            pairs,
            duplicates,
        })
    }
}

impl AnalogySet {
    /// One category per regular file in `dir` (sorted by file name); the
    /// category name is the file stem.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut files: Vec<_> = fs::read_dir(dir.as_ref())?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| !n.starts_with('.'))
            })
            .collect();
        files.sort();
        let mut categories = Vec::with_capacity(files.len());
        for path in files {
            let text = fs::read_to_string(&path)?;
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_owned();
            categories.push(Category::parse(name, &text)?);
        }
        Ok(AnalogySet { categories })
    }

    pub fn from_categories(categories: Vec<Category>) -> Self {
        AnalogySet { categories }
    }

    pub fn num_pairs(&self) -> usize {
        self.categories.iter().map(|c| c.pairs.len()).sum()
    }

    pub fn resolve(&self, vocab: &Vocabulary) -> Vec<ResolvedCategory> {
        self.categories
            .iter()
            .map(|c| ResolvedCategory {
                name: c.name.clone(),
                total_pairs: c.pairs.len(),
                pairs: c
                    .pairs
                    .iter()
                    .filter_map(|p| {
                        let a = vocab.id(&p.a)?;
                        let b0 = vocab.id(&p.b[0])?;
                        let mut variants = vec![b0];
                        variants.extend(p.b[1..].iter().filter_map(|v| vocab.id(v)));
                        Some((a, variants))
                    })
                    .collect(),
            })
            .collect()
    }

    /// Every ordered quadruple `(a_i, b_i, a_j, b_j)`, `i ≠ j`, with its coverage.
    /// Quadruples repeating a word are skipped and counted.
    pub fn queries(&self, vocab: &Vocabulary, mode: MultiAnswer) -> (Vec<AnalogyQuery>, Coverage) {
        let resolved = self.resolve(vocab);
        let mut out = Vec::new();
        let mut cov = Coverage::default();
        for (ci, (cat, res)) in self.categories.iter().zip(&resolved).enumerate() {
            let n = cat.pairs.len();
            let m = res.pairs.len();
            cov.total += n * n.saturating_sub(1);
            cov.out_of_vocabulary += n * n.saturating_sub(1) - m * m.saturating_sub(1);
            for (i, (a, bs)) in res.pairs.iter().enumerate() {
                for (j, (c, ds)) in res.pairs.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let q = Quadruple::new(*a, bs[0], *c, ds[0]);
                    if !q.all_distinct() {
                        cov.repeated_word += 1;
                        continue;
                    }
                    let answers = match mode {
                        MultiAnswer::First => vec![ds[0]],
                        MultiAnswer::Any => ds.clone(),
                    };
                    out.push(AnalogyQuery {
                        category: ci,
                        quadruple: q,
                        answers,
                    });
                }
            }
        }
        cov.evaluated = out.len();
        (out, cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tabs_variants_and_duplicates() {
        let c = Category::parse("x", "man\twoman\nking\tqueen/empress\n\nman\twoman\n# note\n").unwrap();
        assert_eq!(c.pairs.len(), 2);
        assert_eq!(c.duplicates, 1);
        assert_eq!(c.pairs[1].b, vec!["queen", "empress"]);
    }

    #[test]
    fn bad_line_reports_offset() {
        match Category::parse("x", "a\tb\nonlyone\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quadruples_skip_oov_and_repeats() {
        let vocab = Vocabulary::from_words(["man", "woman", "king", "queen", "empress"]).unwrap();
        let cat = Category::parse("g", "man\twoman\nking\tqueen/empress\nduke\tduchess\nwoman\tman\n").unwrap();
        let set = AnalogySet::from_categories(vec![cat]);
        let (qs, cov) = set.queries(&vocab, MultiAnswer::Any);
        // 4 pairs → 12 ordered quadruples; duke is OOV (6 lost); man:woman with woman:man repeats
        assert_eq!(cov.total, 12);
        assert_eq!(cov.out_of_vocabulary, 6);
        assert_eq!(cov.repeated_word, 2);
        assert_eq!(cov.evaluated, 4);
        assert_eq!(qs.len(), 4);
        let royal = qs.iter().find(|q| q.quadruple.c == 2).unwrap();
        assert_eq!(royal.answers, vec![3, 4]);
        let (qs, _) = set.queries(&vocab, MultiAnswer::First);
        assert!(qs.iter().all(|q| q.answers.len() == 1));
    }

    #[test]
    fn loads_directory_sorted() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b_cat.txt"), "x\ty\n").unwrap();
        fs::write(dir.path().join("a_cat.txt"), "p\tq\nr\ts\n").unwrap();
        let set = AnalogySet::load_dir(dir.path()).unwrap();
        assert_eq!(set.categories[0].name, "a_cat");
        assert_eq!(set.num_pairs(), 3);
    }
}
