//! The ¹³C bath around an NV center: diamond lattice sites, random isotope
//! occupation, dipolar hyperfine couplings, and the split of the bath into
//! observed macrofractions and a traced-out remainder.
//!
//! Units: lengths in nm, angular frequencies in rad/μs, fields in tesla.

mod coupling;
mod lattice;
mod realization;

pub use coupling::{dipolar_tensor, hyperfine_coupling, nv_frame, HyperfineCoupling};
pub use lattice::{diamond_basis, generate_lattice_sites};
pub use realization::{
    partition, sample_realization, EnvironmentRealization, NuclearSpin, RealizationSampler, MAX_REJECTION_ATTEMPTS,
    RNG_ALGORITHM,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

pub type Vector3 = nalgebra::Vector3<f64>;

/// μ₀/4π in T·m/A (CODATA 2018).
const MU0_OVER_4PI: f64 = 1.256_637_062_12e-6 / (4.0 * PI);
/// Reduced Planck constant in J·s.
const HBAR: f64 = 1.054_571_817e-34;

/// Gyromagnetic ratios are stored as linear frequencies per tesla, the way
/// they are usually quoted; everything derived from them is angular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Electron gyromagnetic ratio, GHz/T.
    pub gamma_e: f64,
    /// ¹³C gyromagnetic ratio, MHz/T.
    pub gamma_c13: f64,
    /// NV zero-field splitting, GHz.
    pub delta0: f64,
    /// μ₀ħγ_eγ_C/4π in rad/μs · nm³.
    pub dipolar_prefactor: f64,
}

impl PhysicalConstants {
    pub fn new(gamma_e: f64, gamma_c13: f64, delta0: f64) -> Self {
        Self {
            gamma_e,
            gamma_c13,
            delta0,
            dipolar_prefactor: dipolar_prefactor(gamma_e, gamma_c13),
        }
    }

    /// Nuclear Larmor frequency 2π·γ_C·B in rad/μs.
    pub fn larmor(&self, field_t: f64) -> f64 {
        2.0 * PI * self.gamma_c13 * field_t
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::new(28.07, 10.71, 2.87)
    }
}

fn dipolar_prefactor(gamma_e_ghz_per_t: f64, gamma_c13_mhz_per_t: f64) -> f64 {
    let gamma_e = 2.0 * PI * gamma_e_ghz_per_t * 1e9;
    let gamma_c = 2.0 * PI * gamma_c13_mhz_per_t * 1e6;
    // rad/s · m³  ->  rad/μs · nm³
    MU0_OVER_4PI * HBAR * gamma_e * gamma_c * 1e27 * 1e-6
}

/// Gauss to tesla.
pub fn gauss(b: f64) -> f64 {
    b * 1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Conventional cubic cell edge, nm.
    pub lattice_constant: f64,
    /// ¹³C isotope fraction.
    pub concentration: f64,
    /// Realizations with any nucleus closer than this are rejected, nm.
    pub exclusion_radius: f64,
    /// Number of bath spins kept (the nearest ones).
    pub target_count: usize,
    /// Unit NV symmetry axis in lattice coordinates; the field is parallel to it.
    pub nv_axis: Vector3,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            lattice_constant: 0.357,
            concentration: 0.011,
            exclusion_radius: 0.5,
            target_count: 400,
            nv_axis: Vector3::new(1.0, 1.0, 1.0).normalize(),
        }
    }
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lattice_constant.is_finite() && self.lattice_constant > 0.0) {
            return Err(invalid("lattice constant must be positive"));
        }
        if !(self.concentration > 0.0 && self.concentration <= 1.0) {
            return Err(invalid("concentration must lie in (0, 1]"));
        }
        if !(self.exclusion_radius.is_finite() && self.exclusion_radius >= 0.0) {
            return Err(invalid("exclusion radius must be non-negative"));
        }
        if self.target_count == 0 {
            return Err(invalid("target spin count must be at least 1"));
        }
        let n = self.nv_axis.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(invalid("NV axis must be a unit vector"));
        }
        Ok(())
    }

    /// Carbon sites per nm³ (8 atoms per conventional cell).
    pub fn site_density(&self) -> f64 {
        8.0 / self.lattice_constant.powi(3)
    }

    /// Radius whose shell beyond the exclusion zone is expected to hold the
    /// target count plus an 8σ binomial margin.
    pub fn generation_radius(&self) -> f64 {
        let n = self.target_count as f64;
        let want = n + 8.0 * n.sqrt() + 16.0;
        let per_volume = self.concentration * self.site_density();
        let volume = want / per_volume + 4.0 / 3.0 * PI * self.exclusion_radius.powi(3);
        (3.0 * volume / (4.0 * PI))
            .cbrt()
            .max(self.exclusion_radius + self.lattice_constant)
    }
}
