//! Self-describing run records written next to every output set.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

/// Timings and memory here are coarse self-measurements for orientation
/// only; they are not comparable across machines or to external profilers.
pub const TELEMETRY_NOTE: &str = "wall-clock and memory figures are coarse self-measurements, \
    not comparable across machines or to external profilers";

#[derive(Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub wall_seconds: f64,
}

/// Record of one subcommand invocation. The timestamp and stage timings are
/// the only fields expected to differ between identical runs; every data
/// output stays byte-identical for fixed inputs, settings, and seed.
#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    /// UTC, RFC 3339.
    pub timestamp: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub config_path: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub stages: Vec<StageTiming>,
    pub peak_memory_bytes: Option<u64>,
    pub telemetry_note: &'static str,
}

/// Accumulates per-stage wall-clock measurements in execution order.
#[derive(Default)]
pub struct StageClock {
    stages: Vec<StageTiming>,
}

impl StageClock {
    pub fn new() -> StageClock {
        StageClock::default()
    }

    pub fn time<T>(&mut self, stage: &str, run: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let value = run();
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            wall_seconds: started.elapsed().as_secs_f64(),
        });
        value
    }

    pub fn into_stages(self) -> Vec<StageTiming> {
        self.stages
    }
}

pub struct ManifestInfo<'a> {
    pub subcommand: &'a str,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub config_path: Option<&'a Path>,
    pub inputs: &'a [PathBuf],
    pub outputs: &'a [PathBuf],
}

/// Writes `run_manifest.json` into `out_dir` and returns its path.
pub fn write_run_manifest(out_dir: &Path, info: ManifestInfo, clock: StageClock) -> Result<PathBuf> {
    let manifest = RunManifest {
        subcommand: info.subcommand.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        seed: info.seed,
        jobs: info.jobs,
        config_path: info.config_path.map(|p| p.display().to_string()),
        inputs: info.inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: info.outputs.iter().map(|p| p.display().to_string()).collect(),
        stages: clock.into_stages(),
        peak_memory_bytes: peak_memory_bytes(),
        telemetry_note: TELEMETRY_NOTE,
    };
    let path = out_dir.join(RUN_MANIFEST_FILE);
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Process memory high-water mark, where the OS exposes one.
fn peak_memory_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}
