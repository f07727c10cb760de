use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use cwm::corpus::Vocabulary;
use cwm::Error;
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
}

/// Provenance record written next to every artifact as `<artifact>.manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub code_version: String,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    pub seed: Option<u64>,
    pub threads: usize,
    /// Hash of the vocabulary the artifact is indexed by.
    pub vocab_hash: Option<String>,
    pub timings: Timings,
    #[serde(default)]
    pub metrics: serde_json::Value,
}

pub fn hash_hex(v: &Vocabulary) -> String {
    format!("{:016x}", v.content_hash())
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub struct Recorder {
    m: RunManifest,
    clock: Instant,
}

impl Recorder {
    pub fn new(subcommand: &str, seed: Option<u64>, threads: usize) -> Self {
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Recorder {
            m: RunManifest {
                schema_version: MANIFEST_SCHEMA,
                subcommand: subcommand.into(),
                code_version: env!("CARGO_PKG_VERSION").into(),
                config: serde_json::Value::Null,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                seed,
                threads,
                vocab_hash: None,
                timings: Timings {
                    started_unix_secs: started,
                    wall_clock_secs: 0.0,
                },
                metrics: serde_json::Value::Null,
            },
            clock: Instant::now(),
        }
    }

    pub fn config<S: Serialize>(&mut self, c: &S) -> &mut Self {
        self.m.config = serde_json::to_value(c).expect("config serializes");
        self
    }

    pub fn input(&mut self, name: &str, p: &Path) -> &mut Self {
        self.m.inputs.insert(name.into(), p.to_path_buf());
        self
    }

    pub fn output(&mut self, name: &str, p: &Path) -> &mut Self {
        self.m.outputs.insert(name.into(), p.to_path_buf());
        self
    }

    pub fn vocab(&mut self, v: &Vocabulary) -> &mut Self {
        self.m.vocab_hash = Some(hash_hex(v));
        self
    }

    pub fn metrics<S: Serialize>(&mut self, m: &S) -> &mut Self {
        self.m.metrics = serde_json::to_value(m).expect("metrics serialize");
        self
    }

    /// Write the manifest beside `artifact`.
    pub fn finish(&mut self, artifact: &Path) -> anyhow::Result<PathBuf> {
        self.m.timings.wall_clock_secs = self.clock.elapsed().as_secs_f64();
        let path = manifest_path(artifact);
        let json = serde_json::to_string_pretty(&self.m)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn read(path: &Path) -> anyhow::Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            offset: e.column() as u64,
            message: format!("{}: {e}", path.display()),
        }
        .into()
    })
}

/// Refuse an artifact whose manifest names a different vocabulary.
/// Artifacts without a manifest are accepted as is.
pub fn check_vocab(artifact: &Path, vocab: &Vocabulary) -> anyhow::Result<()> {
    let mp = manifest_path(artifact);
    if !mp.exists() {
        return Ok(());
    }
    let m = read(&mp)?;
    match m.vocab_hash {
        Some(h) if h != hash_hex(vocab) => Err(Error::Incompatible(format!(
            "{} was built against vocabulary {h}, but the given vocabulary is {}",
            artifact.display(),
            hash_hex(vocab)
        ))
        .into()),
        _ => Ok(()),
    }
}
