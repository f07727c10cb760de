use std::sync::Arc;

use cwm::analysis::{CooccurrenceStats, Marginal};
use cwm::corpus::{count_cooccurrences, tokenize, IdCorpus, Vocabulary};
use cwm::eval::{evaluate, parse_similarity, word_similarity, AnalogySet, Category, EvalConfig, EvalReport, SCHEMA_VERSION};
use cwm::trainer::{train, train_from_counts, TrainConfig};

const TOY: &str = "a b c\nc b a\na c b\nb a c\n";

fn toy() -> (Arc<Vocabulary>, IdCorpus) {
    let text = TOY.repeat(25);
    let lines: Vec<&str> = text.lines().collect();
    let vocab = Arc::new(Vocabulary::build(lines.iter().flat_map(|l| tokenize(l)), 1).unwrap());
    let corpus = IdCorpus::from_lines(&lines, &vocab);
    (vocab, corpus)
}

fn cfg() -> TrainConfig {
    TrainConfig {
        dim: 8,
        window: 2,
        epochs: 2,
        ..Default::default()
    }
}

#[test]
fn toy_corpus_trains_and_report_round_trips() {
    let (vocab, corpus) = toy();
    let (m, stats) = train::<f32>(&corpus, vocab.clone(), &cfg()).unwrap();
    assert!(m.all_finite());
    assert_eq!(stats.epochs.len(), 2);
    assert!(stats.triples > 0);

    let set = AnalogySet::from_categories(vec![Category::parse("toy", "a\tb\nb\tc\nc\ta\n").unwrap()]);
    let store = count_cooccurrences(&corpus, &vocab, 2).unwrap();
    let co = CooccurrenceStats::new(&store, &vocab, Marginal::RowSum).unwrap();
    let report = evaluate(&m, &set, Some(&co), &EvalConfig::default()).unwrap();
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    for r in report.aggregate.recovery.parallelogram.iter().chain(&report.aggregate.recovery.trapezoid) {
        if let Some(v) = r.value() {
            assert!((0.0..=1.0).contains(&v));
        }
    }
    let back = EvalReport::from_json(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert!(report.to_table().contains("parallelogram"));
}

#[test]
fn count_driven_training_is_deterministic() {
    let (vocab, corpus) = toy();
    let store = count_cooccurrences(&corpus, &vocab, 2).unwrap();
    let (a, _) = train_from_counts::<f32>(&store, vocab.clone(), &cfg()).unwrap();
    let (b, _) = train_from_counts::<f32>(&store, vocab.clone(), &cfg()).unwrap();
    assert_eq!(a, b);
    let other = TrainConfig { seed: 2, ..cfg() };
    let (c, _) = train_from_counts::<f32>(&store, vocab, &other).unwrap();
    assert_ne!(a, c);
}

#[test]
fn hogwild_training_stays_finite() {
    let (vocab, corpus) = toy();
    let par = TrainConfig { threads: 4, ..cfg() };
    let (m, stats) = train::<f32>(&corpus, vocab, &par).unwrap();
    assert!(m.all_finite());
    assert_eq!(stats.threads, 4);
}

#[test]
fn similarity_needs_enough_pairs() {
    let (vocab, corpus) = toy();
    let (m, _) = train::<f32>(&corpus, vocab, &cfg()).unwrap();
    let pairs = parse_similarity("word1\tword2\tscore\na\tb\t1\nb\tc\t2\n").unwrap();
    assert_eq!(pairs.len(), 2);
    assert!(word_similarity(&m, &pairs).is_err());
}

#[test]
fn vocabulary_matches_hash_count_oracle() {
    use cwm::corpus::synthetic::{zipf_corpus, ZipfCorpusConfig};
    use std::collections::HashMap;
    let lines = zipf_corpus(&ZipfCorpusConfig::default());
    let mut oracle: HashMap<&str, u64> = HashMap::new();
    for tok in lines.iter().flat_map(|l| l.split(' ')) {
        *oracle.entry(tok).or_default() += 1;
    }
    oracle.retain(|_, c| *c >= 5);
    let vocab = Vocabulary::build(lines.iter().flat_map(|l| tokenize(l)), 5).unwrap();
    assert_eq!(vocab.len(), oracle.len());
    for (w, c) in &oracle {
        assert_eq!(vocab.count(vocab.id(w).unwrap()), *c);
    }
    assert!(vocab.counts().windows(2).all(|p| p[0] >= p[1]));
}

#[test]
fn epoch_objective_does_not_grow() {
    use cwm::corpus::synthetic::{zipf_corpus, ZipfCorpusConfig};
    let lines = zipf_corpus(&ZipfCorpusConfig {
        vocab_size: 200,
        tokens: 40_000,
        ..Default::default()
    });
    let vocab = Arc::new(Vocabulary::build(lines.iter().flat_map(|l| tokenize(l)), 1).unwrap());
    let corpus = IdCorpus::from_lines(&lines, &vocab);
    let c = TrainConfig {
        dim: 32,
        epochs: 3,
        ..Default::default()
    };
    let (_, stats) = train::<f32>(&corpus, vocab, &c).unwrap();
    let objective: Vec<f64> = stats.epochs.iter().map(|e| e.objective).collect();
    let running: Vec<f64> = stats.epochs.iter().map(|e| e.mean_loss).collect();
    let regressions = objective.windows(2).filter(|p| p[1] > p[0]).count();
    let worst = objective.windows(2).map(|p| p[1] / p[0]).fold(0.0, f64::max);
    assert!(
        regressions <= 1 && worst <= 1.05,
        "end-of-epoch objective {objective:?}, running loss {running:?}"
    );
}
