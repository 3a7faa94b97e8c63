use std::path::Path;

use rayon::prelude::*;
use stylekit::audio::read_wav;
use stylekit::AudioBuffer;

use crate::error::{CliError, CliResult};
use crate::manifest::Record;
use crate::settings::Settings;

/// State shared by every subcommand.
pub struct Ctx {
    pub settings: Settings,
    pub seed: u64,
    pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn new(mut settings: Settings) -> CliResult<Self> {
        let seed = settings.take::<u64>("seed")?.unwrap_or(0);
        let jobs = settings.take::<usize>("jobs")?.unwrap_or(0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::failed(format!("cannot start worker pool: {e}")))?;
        Ok(Ctx { settings, seed, pool })
    }

    /// Maps `items` in parallel. Results keep input order, and the first
    /// failure in that order is reported, so output never depends on
    /// scheduling.
    pub fn par_map<T: Sync, U: Send>(
        &self,
        items: &[T],
        f: impl Fn(&T) -> CliResult<U> + Sync + Send,
    ) -> CliResult<Vec<U>> {
        self.pool.install(|| items.par_iter().map(f).collect::<Vec<_>>()).into_iter().collect()
    }
}

pub fn input_file(path: &Path) -> CliResult<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::usage(format!("input file not found: {}", path.display())))
    }
}

pub fn load_wav(path: &Path) -> CliResult<AudioBuffer> {
    read_wav(input_file(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

/// Checks that every file a manifest names exists before any work starts.
pub fn check_manifest_inputs(records: &[Record]) -> CliResult<()> {
    for r in records {
        input_file(&r.path).map_err(|e| e.context(format!("manifest line {}", r.line)))?;
    }
    Ok(())
}

/// A stable per-utterance seed derived from the global seed (FNV-1a over
/// the record key).
pub fn record_seed(seed: u64, speaker: &str, utterance_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in speaker.bytes().chain([0]).chain(utterance_id.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Rejects labels that cannot be used as a single path component.
pub fn path_component(label: &str, what: &str, line: usize) -> CliResult<()> {
    let bad = label.is_empty() || label == "." || label == ".." || label.contains(['/', '\\', '\0']);
    if bad {
        Err(CliError::usage(format!("manifest line {line}: {what} `{label}` cannot be used as a file name")))
    } else {
        Ok(())
    }
}
