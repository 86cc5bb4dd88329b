//! Run directories: `config.json`, `series.csv`, `result.json` and one
//! snapshot file per output time under `snapshots/`.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::elliptic::solve_pe_signal;
use crate::error::{Error, Result};
use crate::functionals::MomentConfig;
use crate::grid::{read_snapshot, write_snapshot, RadialField};
use crate::monitor::{build_ledger, Ledger};
use crate::params::Variant;
use crate::solver::{run, Diagnostics, MomentSeries, RunResult, RunStatus};

pub const CONFIG_FILE: &str = "config.json";
pub const SERIES_FILE: &str = "series.csv";
pub const RESULT_FILE: &str = "result.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const LEDGER_SUMMARY_FILE: &str = "ledger_summary.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";

/// Contents of `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(default)]
    pub name: Option<String>,
    pub status: RunStatus,
    pub diagnostics: Diagnostics,
    /// Moment configuration with `s0` on the grid.
    pub moments: Option<MomentConfig>,
    pub snapshots: usize,
}

/// Builds the grid and initial datum from `cfg` and integrates.
pub fn simulate(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let grid = cfg.grid.build(&cfg.model)?;
    let u0 = cfg.initial_field(grid)?;
    run(&cfg.model, &u0, &cfg.stepper, &cfg.run_options())
}

fn snapshot_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("{k:05}.csv"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Writes the full run directory.
pub fn write_run(dir: &Path, cfg: &RunConfig, result: &RunResult) -> Result<RunSummary> {
    fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    write_text(&dir.join(CONFIG_FILE), &(cfg.to_json()? + "\n"))?;
    write_text(&dir.join(SERIES_FILE), &result.series.to_csv())?;
    for (k, field) in result.snapshots.iter().enumerate() {
        let signal = match cfg.model.variant {
            Variant::PE => Some(solve_pe_signal(field)?.v),
            Variant::JL => None,
        };
        let mut out = BufWriter::new(fs::File::create(snapshot_path(dir, k))?);
        write_snapshot(&mut out, field, cfg.model.variant, signal.as_deref())?;
        out.flush()?;
    }
    let summary = RunSummary {
        name: cfg.name.clone(),
        status: result.status,
        diagnostics: result.diagnostics,
        moments: result.moments,
        snapshots: result.snapshots.len(),
    };
    write_json(&dir.join(RESULT_FILE), &summary)?;
    Ok(summary)
}

/// A run directory read back from disk. Snapshot values are placed on the
/// grid rebuilt from the stored configuration.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub config: RunConfig,
    pub summary: RunSummary,
    pub series: MomentSeries,
    pub snapshots: Vec<RadialField>,
}

pub fn load_run(dir: &Path) -> Result<StoredRun> {
    let config = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let text = fs::read_to_string(dir.join(RESULT_FILE))
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", dir.join(RESULT_FILE).display())))?;
    let summary: RunSummary = serde_json::from_str(&text)?;
    let series_text = fs::read_to_string(dir.join(SERIES_FILE))?;
    let series = MomentSeries::from_csv(&series_text, config.model.variant)?;
    let grid = config.grid.build(&config.model)?;
    let mut snapshots = Vec::with_capacity(summary.snapshots);
    for k in 0..summary.snapshots {
        let file = fs::File::open(snapshot_path(dir, k))?;
        let (header, field) = read_snapshot(BufReader::new(file))?;
        if header.cells != grid.cells() {
            return Err(Error::Config(format!("snapshot {k} does not match the configured grid")));
        }
        snapshots.push(RadialField::new(grid.clone(), field.values, header.t)?);
    }
    Ok(StoredRun { config, summary, series, snapshots })
}

/// Builds the ledger of a stored run.
pub fn ledger_for(stored: &StoredRun) -> Result<Ledger> {
    build_ledger(
        &stored.config.model,
        &stored.series,
        &stored.snapshots,
        stored.summary.moments.as_ref(),
        &stored.config.monitor,
    )
}

/// Writes `ledger.csv` and `ledger_summary.json` to `out` (a file path for
/// the CSV; the summary goes next to it).
pub fn write_ledger(out: &Path, ledger: &Ledger) -> Result<()> {
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_text(out, &ledger.to_csv())?;
    let summary_path = out.with_file_name(LEDGER_SUMMARY_FILE);
    write_json(&summary_path, &ledger.summary())
}
