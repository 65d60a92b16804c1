//! Scenario execution: configuration, ensemble loops, CSV output and the run
//! manifest that makes every output directory reproducible.

pub mod config;
pub mod scenarios;
pub mod self_check;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use config::{expand_seeds, Scenario, ScenarioConfig, TimeSpec};
pub use scenarios::{
    count_strong, coupling_statistics, decoherence_scan, ensemble_mean, fidelity_scan, field_sweep, realizations,
    sbs_diagnostic, sbs_trace, window_stats, window_summary, windows_below, SbsTrace, Window,
};
pub use self_check::{self_check, CheckRow};

use crate::environment::RNG_ALGORITHM;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Random cases used by the `self-check` scenario.
pub const SELF_CHECK_SINGLE: usize = 10_000;
pub const SELF_CHECK_MULTI: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: Scenario,
    /// Fully resolved; rerunning with it reproduces every data file.
    pub config: ScenarioConfig,
    pub rng_algorithm: String,
    pub code_version: String,
    pub seeds: Vec<u64>,
    pub created_unix_s: u64,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub directory: PathBuf,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// False only when a self-check tolerance was breached.
    pub passed: bool,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Output<'_> {
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        write_csv(&self.dir.join(name), rows)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn run_scenario(scenario: Scenario, cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let cfg = cfg.resolved(scenario);
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut out = Output {
        dir: &dir,
        files: Vec::new(),
    };
    let mut summary = Vec::new();
    let mut passed = true;

    match scenario {
        Scenario::Decoherence => {
            let rows = decoherence_scan(&cfg)?;
            summary.push(format!("{} decoherence rows", rows.len()));
            out.csv("decoherence.csv", &rows)?;
        }
        Scenario::Fidelity => {
            let rows = fidelity_scan(&cfg)?;
            summary.push(format!("{} fidelity rows", rows.len()));
            out.csv("fidelity.csv", &rows)?;
        }
        Scenario::Sbs => {
            let d = sbs_diagnostic(&cfg)?;
            for w in &d.windows {
                summary.push(format!(
                    "muN={} p={} seed={} sustained={} longest={:.2} us",
                    w.mu_n, w.polarization, w.seed, w.sustained, w.longest_window_us
                ));
            }
            out.csv("sbs.csv", &d.rows)?;
            out.csv("sbs_windows.csv", &d.windows)?;
        }
        Scenario::FieldSweep => {
            let s = field_sweep(&cfg)?;
            for r in &s.summary {
                summary.push(format!(
                    "B={} G muN={} p={} long-time mean={:.4} realization std={:.4}",
                    r.b_gauss, r.mu_n, r.polarization, r.long_time_mean, r.realization_std
                ));
            }
            out.csv("field_sweep.csv", &s.rows)?;
            out.csv("field_sweep_summary.csv", &s.summary)?;
        }
        Scenario::Stats => {
            let s = coupling_statistics(&cfg)?;
            summary.push(format!(
                "mean counts over {} realizations: a_perp>omega {:.3}, |a_z|>omega {:.3}, both {:.3}",
                s.counts.len(),
                s.mean_perp,
                s.mean_parallel,
                s.mean_both
            ));
            out.csv("coupling_counts.csv", &s.counts)?;
            out.csv("coupling_histogram.csv", &s.histogram)?;
        }
        Scenario::SelfCheck => {
            let rows = self_check(cfg.master_seed, SELF_CHECK_SINGLE, SELF_CHECK_MULTI)?;
            for r in &rows {
                summary.push(format!(
                    "{} {:<30} max deviation {:.3e} (tolerance {:.0e}, {} samples)",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.quantity,
                    r.max_abs_deviation,
                    r.tolerance,
                    r.samples
                ));
            }
            passed = rows.iter().all(|r| r.pass);
            out.csv("self_check.csv", &rows)?;
        }
    }

    let files = out.files;
    let manifest = RunManifest {
        scenario,
        seeds: cfg.seed_list(),
        config: cfg,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        files,
    };
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutcome {
        manifest,
        directory: dir,
        summary,
        passed,
    })
}

/// Config stored in a manifest, checked against the requested scenario.
pub fn config_from_manifest(path: &Path, scenario: Scenario) -> Result<ScenarioConfig> {
    let m = RunManifest::load(path)?;
    if m.scenario != scenario {
        return Err(Error::InvalidArgument(format!(
            "manifest was written by scenario '{}', not '{}'",
            m.scenario.name(),
            scenario.name()
        )));
    }
    Ok(m.config)
}
