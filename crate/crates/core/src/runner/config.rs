use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{QubitPair, TimeGrid};
use crate::environment::{gauss, LatticeSpec, PhysicalConstants, RealizationSampler};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Decoherence,
    Fidelity,
    Sbs,
    FieldSweep,
    Stats,
    SelfCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Decoherence => "decoherence",
            Scenario::Fidelity => "fidelity",
            Scenario::Sbs => "sbs",
            Scenario::FieldSweep => "field-sweep",
            Scenario::Stats => "stats",
            Scenario::SelfCheck => "self-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_max_us: f64,
    pub step_us: f64,
}

impl TimeSpec {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.t_max_us, self.step_us)
    }
}

/// Everything a scenario needs. Optional fields fall back to per-scenario
/// defaults, see [`ScenarioConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub field_gauss: f64,
    pub concentration: f64,
    pub lattice_constant_nm: f64,
    pub exclusion_radius_nm: f64,
    /// N, the number of bath spins kept per realization.
    pub spin_count: usize,
    /// fN values of the decoherence scan.
    pub observed_counts: Option<Vec<usize>>,
    /// μN values.
    pub macrofraction_sizes: Option<Vec<usize>>,
    /// M.
    pub macrofraction_count: Option<usize>,
    pub polarizations: Option<Vec<f64>>,
    pub pair: QubitPair,
    pub time: Option<TimeSpec>,
    pub field_sweep_gauss: Option<Vec<f64>>,
    /// Averaging window for long-time fidelity statistics, μs.
    pub long_time_window_us: [f64; 2],
    pub sbs_threshold: f64,
    /// Shortest run of `D < ε` that counts as a sustained window, μs.
    pub sbs_min_window_us: f64,
    /// Explicit per-realization seeds; overrides the master seed when set.
    pub seeds: Option<Vec<u64>>,
    pub master_seed: u64,
    pub ensemble_size: usize,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            field_gauss: 10.0,
            concentration: 0.011,
            lattice_constant_nm: 0.357,
            exclusion_radius_nm: 0.5,
            spin_count: 400,
            observed_counts: None,
            macrofraction_sizes: None,
            macrofraction_count: None,
            polarizations: None,
            pair: QubitPair::default(),
            time: None,
            field_sweep_gauss: None,
            long_time_window_us: [150.0, 300.0],
            sbs_threshold: 0.1,
            sbs_min_window_us: 10.0,
            seeds: None,
            master_seed: 1,
            ensemble_size: 20,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Expands a master seed into `count` per-realization seeds: the first
/// `count` outputs of `next_u64` on a ChaCha8 stream seeded with it.
pub fn expand_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count).map(|_| rng.next_u64()).collect()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file, or the config echoed in a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        match value.get("config") {
            Some(inner) => Ok(serde_json::from_value(inner.clone())?),
            None => Ok(serde_json::from_value(value)?),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => expand_seeds(self.master_seed, self.ensemble_size),
        }
    }

    /// A copy with every optional field filled in for `scenario` and the seed
    /// list made explicit, so that it alone reproduces a run.
    pub fn resolved(&self, scenario: Scenario) -> Self {
        let mut c = self.clone();
        let (sizes, count, pols, time): (&[usize], usize, &[f64], TimeSpec) = match scenario {
            Scenario::Decoherence => (
                &[],
                1,
                &[1.0],
                TimeSpec {
                    t_max_us: 50.0,
                    step_us: 0.1,
                },
            ),
            Scenario::Fidelity => (
                &[5, 10, 20],
                1,
                &[0.1, 0.5, 1.0],
                TimeSpec {
                    t_max_us: 300.0,
                    step_us: 0.25,
                },
            ),
            Scenario::Sbs => (
                &[5, 20],
                2,
                &[0.9],
                TimeSpec {
                    t_max_us: 100.0,
                    step_us: 0.1,
                },
            ),
            Scenario::FieldSweep => (
                &[20],
                1,
                &[1.0],
                TimeSpec {
                    t_max_us: 300.0,
                    step_us: 0.25,
                },
            ),
            Scenario::Stats | Scenario::SelfCheck => (
                &[],
                1,
                &[],
                TimeSpec {
                    t_max_us: 1.0,
                    step_us: 1.0,
                },
            ),
        };
        c.observed_counts.get_or_insert_with(|| vec![10, 20, 30, 40]);
        c.macrofraction_sizes.get_or_insert_with(|| sizes.to_vec());
        c.macrofraction_count.get_or_insert(count);
        c.polarizations.get_or_insert_with(|| pols.to_vec());
        c.time.get_or_insert(time);
        c.field_sweep_gauss.get_or_insert_with(|| vec![10.0, 20.0, 50.0, 100.0]);
        c.seeds = Some(self.seed_list());
        c.ensemble_size = c.seeds.as_ref().map_or(0, Vec::len);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.field_gauss) {
            return Err(invalid(format!("field {} G must be finite and >= 0", self.field_gauss)));
        }
        if self.spin_count == 0 {
            return Err(invalid("spin count must be at least 1"));
        }
        self.lattice_spec().validate()?;
        if let Some(counts) = &self.observed_counts {
            if let Some(&f) = counts.iter().find(|&&f| f > self.spin_count) {
                return Err(invalid(format!("fN = {f} exceeds N = {}", self.spin_count)));
            }
        }
        let m = self.macrofraction_count.unwrap_or(1);
        if m == 0 {
            return Err(invalid("macrofraction count must be at least 1"));
        }
        if let Some(sizes) = &self.macrofraction_sizes {
            for &mu in sizes {
                if mu == 0 {
                    return Err(invalid("macrofraction size must be at least 1"));
                }
                if mu * m > self.spin_count {
                    return Err(invalid(format!(
                        "{m} macrofractions of {mu} exceed N = {}",
                        self.spin_count
                    )));
                }
            }
        }
        if let Some(p) = self
            .polarizations
            .iter()
            .flatten()
            .find(|p| !(p.is_finite() && p.abs() <= 1.0))
        {
            return Err(invalid(format!("polarization {p} outside [-1, 1]")));
        }
        if let Some(t) = &self.time {
            t.grid()?;
        }
        if let Some(b) = self.field_sweep_gauss.iter().flatten().find(|b| !finite_nonneg(**b)) {
            return Err(invalid(format!("sweep field {b} G must be finite and >= 0")));
        }
        let [lo, hi] = self.long_time_window_us;
        if !(finite_nonneg(lo) && hi.is_finite() && hi > lo) {
            return Err(invalid("long-time window must satisfy 0 <= start < end"));
        }
        if !(self.sbs_threshold > 0.0 && self.sbs_threshold <= 1.0) {
            return Err(invalid("SBS threshold must lie in (0, 1]"));
        }
        if !finite_nonneg(self.sbs_min_window_us) {
            return Err(invalid("minimum SBS window must be >= 0"));
        }
        match &self.seeds {
            Some(s) if s.is_empty() => Err(invalid("seed list is empty")),
            None if self.ensemble_size == 0 => Err(invalid("ensemble size must be at least 1")),
            _ => Ok(()),
        }
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        LatticeSpec {
            lattice_constant: self.lattice_constant_nm,
            concentration: self.concentration,
            exclusion_radius: self.exclusion_radius_nm,
            target_count: self.spin_count,
            ..LatticeSpec::default()
        }
    }

    pub fn sampler(&self) -> Result<RealizationSampler> {
        RealizationSampler::new(&self.lattice_spec(), &PhysicalConstants::default())
    }

    pub fn field_tesla(&self) -> f64 {
        gauss(self.field_gauss)
    }

    pub fn larmor(&self) -> f64 {
        PhysicalConstants::default().larmor(self.field_tesla())
    }
}
