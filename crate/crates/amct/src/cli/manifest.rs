//! Run manifests: enough provenance to reproduce a stage bit-for-bit under
//! the mock backend. Equal (config digest, input digests, seed) means
//! equal outputs, and the run id is derived from exactly those.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::digest::{hex16, Fnv64};
use crate::jsonl::{atomic_write, JsonlError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub generated: usize,
    pub scored: usize,
    pub filtered: usize,
    pub emitted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    /// 64-bit hex digest of the config file bytes.
    pub config_digest: String,
    /// Per input path, the 64-bit hex digest of the file bytes.
    pub input_digests: BTreeMap<String, String>,
    pub counts: StageCounts,
    pub wall_clock_ms: BTreeMap<String, u64>,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_digest: String,
        input_digests: BTreeMap<String, String>,
        seed: u64,
    ) -> Self {
        let mut hasher = Fnv64::new();
        hasher.update(command.as_bytes());
        hasher.update(config_digest.as_bytes());
        for (path, digest) in &input_digests {
            hasher.update(path.as_bytes());
            hasher.update(digest.as_bytes());
        }
        hasher.update(&seed.to_be_bytes());
        Self {
            run_id: hex16(hasher.finish()),
            command: command.to_string(),
            config_digest,
            input_digests,
            counts: StageCounts::default(),
            wall_clock_ms: BTreeMap::new(),
            seed,
        }
    }

    pub fn record_stage(&mut self, stage: &str, elapsed: std::time::Duration) {
        self.wall_clock_ms
            .insert(stage.to_string(), elapsed.as_millis() as u64);
    }

    pub fn write(&self, path: &Path) -> Result<(), JsonlError> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        atomic_write(path, &bytes)
    }
}
