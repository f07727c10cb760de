use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, ValueEnum};
use cwm::analysis::{
    diagnose_quadruple, satisfies_condition, theorem1_batch, theorem1_synthesize, realize_corpus,
    write_diagnostics, write_plot_data, zeta_distribution, CooccurrenceStats, Marginal, NormFrequencyFit,
    Population, Quadruple, ResidualReport, Summary, Theorem1Config, EmbeddingDiagnostics,
};
use cwm::corpus::{
    count_cooccurrences, count_cooccurrences_sharded, load_counts, load_vocab, save_counts, save_vocab,
    CooccurrenceStore, IdCorpus, Vocabulary,
};
use cwm::eval::{evaluate, load_similarity, word_similarity, AnalogySet, EvalConfig, MultiAnswer, SCHEMA_VERSION};
use cwm::model::{load_binary, load_text, save_binary, save_text, EMBEDDINGS_MAGIC};
use cwm::trainer::{train_from_counts_with_progress, train_with_progress, ProgressRecord, TrainConfig};
use cwm::{Embeddings, Error};
use serde::Serialize;

use crate::config::{self, TrainFlags};
use crate::manifest::{check_vocab, Recorder};
use crate::Global;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MarginalArg {
    /// Row sum of the co-occurrence matrix
    RowSum,
    /// Corpus occurrence count
    Occurrence,
}

impl From<MarginalArg> for Marginal {
    fn from(m: MarginalArg) -> Self {
        match m {
            MarginalArg::RowSum => Marginal::RowSum,
            MarginalArg::Occurrence => Marginal::Occurrence,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Binary,
    Text,
}

#[derive(Args, Debug)]
pub struct VocabArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Context half-width (default: config file, then 5)
    #[arg(long, env = "CWM_WINDOW")]
    pub window: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Line-oriented text corpus, streamed
    #[arg(long, required_unless_present = "counts")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Train from a count file instead of streaming the corpus
    #[arg(long, conflicts_with = "corpus")]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    pub format: Format,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Vocabulary file; required for binary embeddings and with --counts
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Directory of analogy category files, one word pair per line
    #[arg(long)]
    pub bats: PathBuf,
    /// Count file; enables the collinearity-stratified recovery table
    #[arg(long, requires = "vocab")]
    pub counts: Option<PathBuf>,
    /// Word-similarity ratings to include in the report
    #[arg(long)]
    pub simfile: Option<PathBuf>,
    /// JSON report
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = cwm::eval::DEFAULT_PCS_SUBSETS)]
    pub pcs_subsets: usize,
    /// Count a query as recovered when any listed answer variant is hit
    #[arg(long)]
    pub any_answer: bool,
    #[arg(long, value_enum, default_value = "row-sum")]
    pub marginal: MarginalArg,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Analogy categories; required for the analogy and shuffled modes
    #[arg(long)]
    pub bats: Option<PathBuf>,
    #[arg(long)]
    pub mode: Population,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "row-sum")]
    pub marginal: MarginalArg,
    /// Plot data: `population<TAB>value` lines
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-quadruple records
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimevalArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub simfile: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub counts: PathBuf,
    /// JSON report
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub gamma_samples: usize,
    /// Residual threshold reported as a fraction
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "row-sum")]
    pub marginal: MarginalArg,
    /// Quadruples to diagnose, `a b c d` per line
    #[arg(long, requires = "records")]
    pub quadruples: Option<PathBuf>,
    /// Per-quadruple records (collinearity, zeta_hat, offset cosine)
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    /// Total vocabulary size |W|; one quadruple, the rest split into clusters and background
    #[arg(long, conflicts_with_all = ["quadruples", "cluster_size", "background", "shared_pool"])]
    pub words: Option<usize>,
    /// Number of planted quadruples
    #[arg(long)]
    pub quadruples: Option<usize>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub zeta: f64,
    #[arg(long)]
    pub cluster_size: Option<usize>,
    #[arg(long)]
    pub unit: Option<u64>,
    #[arg(long)]
    pub noise: Option<u64>,
    #[arg(long)]
    pub background: Option<usize>,
    #[arg(long)]
    pub shared_pool: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

fn seed(g: &Global) -> u64 {
    g.seed.unwrap_or(1)
}

fn threads(g: &Global) -> usize {
    g.threads.unwrap_or(1)
}

fn file_config(g: &Global) -> anyhow::Result<Option<TrainConfig>> {
    g.config.as_deref().map(config::load_file).transpose()
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).map_err(Error::Io).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::Io)?;
    }
    let f = File::create(path).map_err(Error::Io).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<S: Serialize>(path: &Path, v: &S) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n").map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    Ok(())
}

fn read_vocab_file(path: &Path) -> anyhow::Result<Vocabulary> {
    load_vocab(path).with_context(|| format!("loading vocabulary {}", path.display()))
}

fn read_counts_for(path: &Path, vocab: &Vocabulary) -> anyhow::Result<CooccurrenceStore> {
    check_vocab(path, vocab)?;
    let store = load_counts(path).with_context(|| format!("loading counts {}", path.display()))?;
    if store.vocab_size() != vocab.len() {
        return Err(Error::Incompatible(format!(
            "{} covers {} words, vocabulary has {}",
            path.display(),
            store.vocab_size(),
            vocab.len()
        ))
        .into());
    }
    Ok(store)
}

fn is_binary(path: &Path) -> anyhow::Result<bool> {
    let mut magic = [0u8; 4];
    let mut r = open(path)?;
    let n = r.read(&mut magic).map_err(Error::Io)?;
    Ok(n == 4 && &magic == EMBEDDINGS_MAGIC)
}

/// Load embeddings in either format. With a vocabulary file the returned
/// matrix is indexed by that vocabulary.
fn read_embeddings(path: &Path, vocab: Option<&Path>) -> anyhow::Result<Embeddings> {
    let ctx = || format!("loading embeddings {}", path.display());
    if is_binary(path)? {
        let vp = vocab.ok_or_else(|| Error::InvalidConfig("binary embeddings need --vocab".into()))?;
        let v = read_vocab_file(vp)?;
        check_vocab(path, &v)?;
        return load_binary(path, Arc::new(v)).with_context(ctx);
    }
    let m: Embeddings = load_text(path).with_context(ctx)?;
    let Some(vp) = vocab else { return Ok(m) };
    let v = read_vocab_file(vp)?;
    if v.words() != m.vocab().words() {
        return Err(Error::Incompatible(format!(
            "{} does not list the words of {} in the same order",
            path.display(),
            vp.display()
        ))
        .into());
    }
    let dim = m.dim();
    Ok(Embeddings::from_rows(Arc::new(v), dim, m.into_vec())?)
}

fn progress(r: &ProgressRecord) {
    if let Ok(s) = serde_json::to_string(r) {
        eprintln!("{s}");
    }
}

pub fn cmd_vocab(g: &Global, a: &VocabArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new("vocab", None, 1);
    let v = Vocabulary::from_reader(open(&a.corpus)?, a.min_count)
        .with_context(|| format!("reading corpus {}", a.corpus.display()))?;
    save_vocab(&v, &a.out)?;
    let _ = g;
    rec.config(&serde_json::json!({ "min_count": a.min_count }))
        .input("corpus", &a.corpus)
        .output("vocab", &a.out)
        .vocab(&v)
        .metrics(&serde_json::json!({
            "words": v.len(),
            "total_tokens": v.total_tokens(),
            "discarded_tokens": v.discarded_tokens(),
        }))
        .finish(&a.out)?;
    Ok(())
}

pub fn cmd_count(g: &Global, a: &CountArgs) -> anyhow::Result<()> {
    let window = a
        .window
        .or(file_config(g)?.map(|c| c.window))
        .unwrap_or(TrainConfig::default().window);
    let t = threads(g);
    let mut rec = Recorder::new("count", None, t);
    let vocab = read_vocab_file(&a.vocab)?;
    let corpus = IdCorpus::from_reader(open(&a.corpus)?, &vocab)?;
    let store = if t > 1 {
        count_cooccurrences_sharded(&corpus, &vocab, window, t)?
    } else {
        count_cooccurrences(&corpus, &vocab, window)?
    };
    save_counts(&store, &a.out)?;
    rec.config(&serde_json::json!({ "window": window }))
        .input("corpus", &a.corpus)
        .input("vocab", &a.vocab)
        .output("counts", &a.out)
        .vocab(&vocab)
        .metrics(&serde_json::json!({
            "tokens": corpus.num_tokens(),
            "in_vocab_tokens": corpus.num_in_vocab(),
            "nonzero_entries": store.len(),
            "total_mass": store.total_mass(),
        }))
        .finish(&a.out)?;
    Ok(())
}

pub fn cmd_train(g: &Global, a: &TrainArgs) -> anyhow::Result<()> {
    let cfg = config::resolve(file_config(g)?, &a.flags, g.seed, g.threads);
    cfg.validate()?;
    let mut rec = Recorder::new("train", Some(cfg.seed), cfg.threads);
    let vocab = Arc::new(read_vocab_file(&a.vocab)?);
    rec.input("vocab", &a.vocab);
    let report: &(dyn Fn(&ProgressRecord) + Sync) = &progress;
    let (m, stats) = match (&a.corpus, &a.counts) {
        (_, Some(cp)) => {
            let store = read_counts_for(cp, &vocab)?;
            rec.input("counts", cp);
            train_from_counts_with_progress::<f32>(&store, vocab.clone(), &cfg, Some(report))?
        }
        (Some(cp), None) => {
            let corpus = IdCorpus::from_reader(open(cp)?, &vocab)?;
            rec.input("corpus", cp);
            train_with_progress::<f32>(&corpus, vocab.clone(), &cfg, Some(report))?
        }
        (None, None) => unreachable!("clap requires --corpus or --counts"),
    };
    match a.format {
        Format::Binary => save_binary(&m, &a.out)?,
        Format::Text => save_text(&m, &a.out)?,
    }
    rec.config(&cfg)
        .output("embeddings", &a.out)
        .vocab(&vocab)
        .metrics(&serde_json::json!({
            "tokens_per_sec": stats.tokens_per_sec(),
            "updates_per_sec": stats.updates_per_sec(),
            "stats": stats,
        }))
        .finish(&a.out)?;
    Ok(())
}

pub fn cmd_eval(g: &Global, a: &EvalArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new("eval", g.seed, threads(g));
    let m = read_embeddings(&a.embeddings, a.vocab.as_deref())?;
    let set = AnalogySet::load_dir(&a.bats).with_context(|| format!("loading analogies {}", a.bats.display()))?;
    let cfg = EvalConfig {
        ks: a.k.clone(),
        pcs_subsets: a.pcs_subsets,
        seed: seed(g),
        multi_answer: if a.any_answer { MultiAnswer::Any } else { MultiAnswer::First },
    };
    let store = a.counts.as_deref().map(|p| read_counts_for(p, m.vocab())).transpose()?;
    let stats = store
        .as_ref()
        .map(|s| CooccurrenceStats::new(s, m.vocab(), a.marginal.into()))
        .transpose()?;
    let mut report = evaluate(&m, &set, stats.as_ref(), &cfg)?;
    if let Some(sp) = &a.simfile {
        let pairs = load_similarity(sp)?;
        report.similarity = Some(word_similarity(&m, &pairs)?);
        rec.input("simfile", sp);
    }
    fs::write(&a.out, report.to_json() + "\n").map_err(Error::Io)?;
    print!("{}", report.to_table());
    rec.config(&cfg)
        .input("embeddings", &a.embeddings)
        .input("bats", &a.bats)
        .output("report", &a.out)
        .vocab(m.vocab());
    if let Some(v) = &a.vocab {
        rec.input("vocab", v);
    }
    if let Some(c) = &a.counts {
        rec.input("counts", c);
    }
    rec.finish(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct ZetaMetrics<'a> {
    population: Population,
    requested: usize,
    available: usize,
    skipped: usize,
    summary: &'a Summary,
}

pub fn cmd_zeta(g: &Global, a: &ZetaArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new("zeta", Some(seed(g)), threads(g));
    let vocab = read_vocab_file(&a.vocab)?;
    let store = read_counts_for(&a.counts, &vocab)?;
    let stats = CooccurrenceStats::new(&store, &vocab, a.marginal.into())?;
    let set = a
        .bats
        .as_deref()
        .map(|p| AnalogySet::load_dir(p).with_context(|| format!("loading analogies {}", p.display())))
        .transpose()?;
    let pop = zeta_distribution(&stats, set.as_ref(), a.mode, a.samples, seed(g))?;
    let mut w = create(&a.out)?;
    write_plot_data(&mut w, std::slice::from_ref(&pop))?;
    w.flush().map_err(Error::Io)?;
    if let Some(rp) = &a.records {
        let (quads, _) = cwm::analysis::population_quadruples(&stats, set.as_ref(), a.mode, a.samples, seed(g))?;
        let records: Vec<_> = quads
            .into_iter()
            .filter_map(|q| diagnose_quadruple::<f32>(&stats, q, None).ok())
            .collect();
        write_diagnostics(create(rp)?, &records)?;
        rec.output("records", rp);
    }
    println!(
        "{}: median collinearity {:.4} over {} quadruples ({} skipped)",
        pop.population, pop.summary.median, pop.summary.n, pop.skipped
    );
    rec.config(&serde_json::json!({
        "mode": a.mode,
        "samples": a.samples,
        "marginal": Marginal::from(a.marginal),
        "window": store.window(),
    }))
    .input("counts", &a.counts)
    .input("vocab", &a.vocab)
    .output("plot_data", &a.out)
    .vocab(&vocab)
    .metrics(&ZetaMetrics {
        population: pop.population,
        requested: pop.requested,
        available: pop.available,
        skipped: pop.skipped,
        summary: &pop.summary,
    });
    if let Some(b) = &a.bats {
        rec.input("bats", b);
    }
    rec.finish(&a.out)?;
    Ok(())
}

pub fn cmd_simeval(g: &Global, a: &SimevalArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new("simeval", None, threads(g));
    let m = read_embeddings(&a.embeddings, a.vocab.as_deref())?;
    let pairs = load_similarity(&a.simfile)?;
    let report = word_similarity(&m, &pairs)?;
    write_json(
        &a.out,
        &serde_json::json!({ "schema_version": SCHEMA_VERSION, "similarity": report }),
    )?;
    println!("spearman {:.4} over {}/{} pairs", report.spearman, report.used, report.total);
    rec.input("embeddings", &a.embeddings)
        .input("simfile", &a.simfile)
        .output("report", &a.out)
        .vocab(m.vocab())
        .finish(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct DiagnoseReport {
    schema_version: u32,
    marginal: Marginal,
    residuals: ResidualReport,
    norm_frequency: Option<NormFrequencyFit>,
    gamma: Summary,
}

fn read_quadruples(path: &Path, vocab: &Vocabulary) -> anyhow::Result<Vec<Quadruple>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(Error::Io)?;
        let w: Vec<String> = cwm::corpus::tokenize(&line).collect();
        if w.is_empty() || w[0].starts_with('#') || w == ["a", "b", "c", "d"] {
            continue;
        }
        if w.len() != 4 {
            return Err(Error::InvalidConfig(format!("expected four words per line, got {line:?}")).into());
        }
        out.push(Quadruple::from_words(vocab, [&w[0], &w[1], &w[2], &w[3]])?);
    }
    Ok(out)
}

pub fn cmd_diagnose(g: &Global, a: &DiagnoseArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new("diagnose", Some(seed(g)), threads(g));
    let m = read_embeddings(&a.embeddings, Some(&a.vocab))?;
    let store = read_counts_for(&a.counts, m.vocab())?;
    let stats = CooccurrenceStats::new(&store, m.vocab(), a.marginal.into())?;
    let diag = EmbeddingDiagnostics::new(&m, &stats)?;
    let words = diag.above_median_frequency();
    let residuals = diag.residuals(&words, a.threshold);
    let (gamma, _) = diag.gamma_stats(a.gamma_samples, seed(g));
    let report = DiagnoseReport {
        schema_version: SCHEMA_VERSION,
        marginal: a.marginal.into(),
        residuals,
        norm_frequency: diag.norm_frequency(),
        gamma,
    };
    write_json(&a.out, &report)?;
    println!(
        "residual >= {}: {:.3} of {} words; norm-frequency pearson {}; gamma cv {:.3}",
        a.threshold,
        report.residuals.fraction_above(),
        report.residuals.words,
        report
            .norm_frequency
            .map_or_else(|| "n/a".to_owned(), |f| format!("{:.3} (beta {:.3})", f.pearson, f.beta)),
        report.gamma.cv()
    );
    if let (Some(qp), Some(rp)) = (&a.quadruples, &a.records) {
        let view = m.normalized();
        let records = read_quadruples(qp, m.vocab())?
            .into_iter()
            .map(|q| diagnose_quadruple(&stats, q, Some(&view)))
            .collect::<Result<Vec<_>, _>>()?;
        write_diagnostics(create(rp)?, &records)?;
        rec.input("quadruples", qp).output("records", rp);
    }
    rec.config(&serde_json::json!({
        "gamma_samples": a.gamma_samples,
        "threshold": a.threshold,
        "marginal": report.marginal,
    }))
    .input("embeddings", &a.embeddings)
    .input("vocab", &a.vocab)
    .input("counts", &a.counts)
    .output("report", &a.out)
    .vocab(m.vocab())
    .finish(&a.out)?;
    Ok(())
}

pub fn cmd_synthesize(g: &Global, a: &SynthesizeArgs) -> anyhow::Result<()> {
    let seed = seed(g);
    let mut rec = Recorder::new("synthesize", Some(seed), 1);
    let (synth, cfg) = if let Some(n) = a.words {
        let s = theorem1_synthesize(n, a.zeta, seed)?;
        (s, serde_json::json!({ "words": n, "zeta": a.zeta }))
    } else {
        let d = Theorem1Config::default();
        let cfg = Theorem1Config {
            quadruples: a.quadruples.unwrap_or(d.quadruples),
            cluster_size: a.cluster_size.unwrap_or(d.cluster_size),
            zeta: a.zeta,
            unit: a.unit.unwrap_or(d.unit),
            noise: a.noise.unwrap_or(d.noise),
            background: a.background.unwrap_or(d.background),
            shared_pool: a.shared_pool.unwrap_or(d.shared_pool),
            seed,
        };
        (theorem1_batch(&cfg)?, serde_json::to_value(&cfg)?)
    };
    fs::create_dir_all(a.out.join("analogies")).map_err(Error::Io)?;
    let corpus_path = a.out.join("corpus.txt");
    let mut w = create(&corpus_path)?;
    for line in realize_corpus(&synth.store, &synth.vocab, seed) {
        writeln!(w, "{line}").map_err(Error::Io)?;
    }
    w.flush().map_err(Error::Io)?;

    let quad_path = a.out.join("quadruples.tsv");
    let mut q = create(&quad_path)?;
    writeln!(q, "a\tb\tc\td").map_err(Error::Io)?;
    for (i, quad) in synth.quadruples.iter().enumerate() {
        if !satisfies_condition(&synth.store, *quad, synth.zeta)? {
            return Err(Error::InfeasibleConstruction(format!("quadruple {i} misses the target ratio")).into());
        }
        let [wa, wb, wc, wd] = quad.words(&synth.vocab);
        writeln!(q, "{wa}\t{wb}\t{wc}\t{wd}").map_err(Error::Io)?;
        fs::write(
            a.out.join("analogies").join(format!("q{i:03}.txt")),
            format!("{wa}\t{wb}\n{wc}\t{wd}\n"),
        )
        .map_err(Error::Io)?;
    }
    q.flush().map_err(Error::Io)?;
    save_counts(&synth.store, a.out.join("counts.bin"))?;
    save_vocab(&synth.vocab, a.out.join("vocab.txt"))?;

    println!(
        "{} words, {} quadruples, zeta {} -> {}",
        synth.vocab.len(),
        synth.quadruples.len(),
        synth.zeta,
        a.out.display()
    );
    rec.config(&cfg)
        .output("corpus", &corpus_path)
        .output("quadruples", &quad_path)
        .output("analogies", &a.out.join("analogies"))
        .output("counts", &a.out.join("counts.bin"))
        .output("vocab", &a.out.join("vocab.txt"))
        .vocab(&synth.vocab)
        .metrics(&serde_json::json!({
            "words": synth.vocab.len(),
            "quadruples": synth.quadruples.len(),
            "zeta_realized": synth.zeta.to_string(),
            "total_mass": synth.store.total_mass(),
        }))
        .finish(&corpus_path)?;
    Ok(())
}
