mod common;

use std::sync::Arc;

use cwm::analysis::{CooccurrenceStats, Marginal, Quadruple};
use cwm::corpus::{
    count_cooccurrences, count_cooccurrences_sharded, read_counts, read_vocab, write_counts, write_vocab, IdCorpus,
    Vocabulary,
};
use cwm::eval::pcs_from_scores;
use cwm::model::{read_binary, read_text, write_binary, write_text, EmbeddingMatrix};
use proptest::prelude::*;

fn word_lines() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..12, 0..15), 1..25)
}

fn render(lines: &[Vec<u8>]) -> Vec<String> {
    lines
        .iter()
        .map(|l| l.iter().map(|w| format!("t{w}")).collect::<Vec<_>>().join(" "))
        .collect()
}

fn build(lines: &[Vec<u8>], min_count: u64) -> Option<(Vocabulary, IdCorpus)> {
    let text = render(lines);
    let vocab = Vocabulary::build(text.iter().flat_map(|l| cwm::corpus::tokenize(l)), min_count).ok()?;
    let corpus = IdCorpus::from_lines(&text, &vocab);
    Some((vocab, corpus))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn store_is_symmetric(lines in word_lines(), window in 1usize..6) {
        if let Some((vocab, corpus)) = build(&lines, 1) {
            let s = count_cooccurrences(&corpus, &vocab, window).unwrap();
            let n = vocab.len() as u32;
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(s.get(i, j), s.get(j, i));
                }
            }
        }
    }

    #[test]
    fn sharded_counts_match(lines in word_lines(), window in 1usize..6, shards in 1usize..9, mc in 1u64..3) {
        if let Some((vocab, corpus)) = build(&lines, mc) {
            let one = count_cooccurrences(&corpus, &vocab, window).unwrap();
            let many = count_cooccurrences_sharded(&corpus, &vocab, window, shards).unwrap();
            prop_assert_eq!(one.sorted_entries(), many.sorted_entries());
        }
    }

    #[test]
    fn counts_and_vocab_round_trip(lines in word_lines(), window in 1usize..6) {
        if let Some((vocab, corpus)) = build(&lines, 1) {
            let s = count_cooccurrences(&corpus, &vocab, window).unwrap();
            let mut buf = Vec::new();
            write_counts(&s, &mut buf).unwrap();
            let back = read_counts(&buf[..]).unwrap();
            prop_assert_eq!(back.window(), s.window());
            prop_assert_eq!(back.sorted_entries(), s.sorted_entries());
            let mut again = Vec::new();
            write_counts(&back, &mut again).unwrap();
            prop_assert_eq!(&again, &buf);

            let mut vb = Vec::new();
            write_vocab(&vocab, &mut vb).unwrap();
            let v2 = read_vocab(&vb[..]).unwrap();
            prop_assert_eq!(v2.words(), vocab.words());
            prop_assert_eq!(v2.counts(), vocab.counts());
            prop_assert_eq!(v2.content_hash(), vocab.content_hash());
        }
    }

    #[test]
    fn embeddings_round_trip(n in 1usize..20, dim in 1usize..10, seed in any::<u64>()) {
        let vocab = Arc::new(Vocabulary::from_words((0..n).map(|i| format!("w{i}"))).unwrap());
        let m = EmbeddingMatrix::<f32>::init(vocab.clone(), dim, seed).unwrap();
        let mut bin = Vec::new();
        write_binary(&m, &mut bin).unwrap();
        let back = read_binary::<f32, _>(&bin[..], vocab).unwrap();
        prop_assert_eq!(&back, &m);
        let mut txt = Vec::new();
        write_text(&m, &mut txt).unwrap();
        let back = read_text::<f32, _>(&txt[..]).unwrap();
        prop_assert_eq!(back.as_slice(), m.as_slice());
        prop_assert_eq!(back.vocab().words(), m.vocab().words());
    }

    #[test]
    fn collinearity_symmetric_and_zeta_reciprocal(seed in any::<u64>(), pick in any::<[u8; 4]>(), k in 2u64..9) {
        let n = 16;
        let store = common::random_store(n, 300, seed);
        let vocab = Vocabulary::from_words((0..n).map(|i| format!("w{i}"))).unwrap();
        let stats = CooccurrenceStats::new(&store, &vocab, Marginal::RowSum).unwrap();
        let q = Quadruple::new(
            pick[0] as u32 % n as u32,
            pick[1] as u32 % n as u32,
            pick[2] as u32 % n as u32,
            pick[3] as u32 % n as u32,
        );
        if let (Ok(c), Ok(z)) = (stats.collinearity(q), stats.zeta_hat(q)) {
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!((stats.collinearity(q.swapped()).unwrap() - c).abs() <= 1e-12);
            prop_assert!((stats.zeta_hat(q.swapped()).unwrap() * z - 1.0).abs() <= 1e-12);

            // C-vectors depend on profiles only, so scaling every count changes nothing
            let scaled = store.scaled(k);
            let s2 = CooccurrenceStats::new(&scaled, &vocab, Marginal::RowSum).unwrap();
            prop_assert!((s2.collinearity(q).unwrap() - c).abs() <= 1e-12);
            prop_assert!((s2.zeta_hat(q).unwrap() - z).abs() <= 1e-12 * z);
        }
    }

    #[test]
    fn pcs_invariant_under_monotone_maps(
        pos in prop::collection::vec(-5.0f64..5.0, 2..20),
        extra in prop::collection::vec(-5.0f64..5.0, 0..30),
        seed in any::<u64>(),
    ) {
        let mut neg: Vec<f64> = pos.iter().map(|x| x * 0.7 - 0.3).collect();
        neg.extend(extra);
        let base = pcs_from_scores(&pos, &neg, 10, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        let f = |x: &f64| (x * 0.5).exp() * 3.0 + 1.0;
        let pos2: Vec<f64> = pos.iter().map(f).collect();
        let neg2: Vec<f64> = neg.iter().map(f).collect();
        prop_assert!((pcs_from_scores(&pos2, &neg2, 10, seed).unwrap() - base).abs() <= 1e-12);
    }
}
