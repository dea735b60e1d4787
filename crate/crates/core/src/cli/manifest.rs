use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTiming {
    pub scenario_id: String,
    pub runtime_s: f64,
}

/// Record of one `simulate` run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub replications: usize,
    pub threads: usize,
    pub timestamp: String,
    /// `complete` or `failed`.
    pub status: String,
    pub scenarios_planned: usize,
    pub scenarios_completed: usize,
    pub outputs: Vec<String>,
    pub timings: Vec<ScenarioTiming>,
}

impl RunManifest {
    /// Writes to a temporary sibling and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)
    }
}
