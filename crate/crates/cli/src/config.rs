use std::fs;
use std::path::Path;

use anyhow::Context;
use clap::Args;
use cwm::trainer::TrainConfig;
use cwm::Error;

/// Training flags. Unset flags fall through to the config file, then to defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct TrainFlags {
    /// Hinge margin, in (0, 2)
    #[arg(long, env = "CWM_MARGIN")]
    pub margin: Option<f64>,
    /// Context half-width
    #[arg(long, env = "CWM_WINDOW")]
    pub window: Option<usize>,
    /// Embedding dimension
    #[arg(long, env = "CWM_DIM")]
    pub dim: Option<usize>,
    /// Negatives per (center, context) event
    #[arg(long, env = "CWM_NEGATIVES")]
    pub negatives: Option<usize>,
    /// Initial learning rate
    #[arg(long, env = "CWM_LEARNING_RATE")]
    pub learning_rate: Option<f64>,
    #[arg(long, env = "CWM_EPOCHS")]
    pub epochs: Option<usize>,
    /// Emit a progress record every N events (0 disables)
    #[arg(long, env = "CWM_PROGRESS_EVERY")]
    pub progress_every: Option<u64>,
}

/// Read a TOML file of `TrainConfig` keys. Missing keys keep their defaults.
pub fn load_file(path: &Path) -> anyhow::Result<TrainConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start) as u64;
        Error::Parse {
            offset,
            message: format!("{}: {}", path.display(), e.message()),
        }
        .into()
    })
}

/// Flag over file over default.
pub fn resolve(
    file: Option<TrainConfig>,
    flags: &TrainFlags,
    seed: Option<u64>,
    threads: Option<usize>,
) -> TrainConfig {
    let mut c = file.unwrap_or_default();
    macro_rules! over {
        ($($f:ident),*) => { $( if let Some(v) = flags.$f { c.$f = v; } )* };
    }
    over!(margin, window, dim, negatives, learning_rate, epochs, progress_every);
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(t) = threads {
        c.threads = t;
    }
    c
}
