//! Run manifest written next to every result set. This is the only place
//! the system clock is read.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{self, IoResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Fully resolved configuration, defaults included. Feeding it back via
    /// `--config` reproduces the run.
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub started_unix_s: f64,
    pub wall_time_s: f64,
}

/// Clock readings taken at the start of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunClock {
    start: Instant,
    started_unix_s: f64,
}

impl RunClock {
    pub fn start() -> Self {
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Self {
            start: Instant::now(),
            started_unix_s,
        }
    }

    pub fn started_unix_s(&self) -> f64 {
        self.started_unix_s
    }

    pub fn elapsed_s(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> IoResult<()> {
    io::write_json(&dir.join(MANIFEST_FILE), m)
}

pub fn read_manifest(dir: &Path) -> IoResult<Manifest> {
    io::read_json(&dir.join(MANIFEST_FILE))
}
