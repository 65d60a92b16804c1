use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_lattice_sites, hyperfine_coupling, HyperfineCoupling, LatticeSpec, PhysicalConstants, Vector3};
use crate::error::{invalid, Error, Result};

/// Name of the generator used for occupations, recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

/// Upper bound on post-selection redraws before giving up.
pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearSpin {
    /// nm, NV at the origin.
    pub position: Vector3,
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
    pub a_perp: f64,
    /// Larmor frequency, rad/μs.
    pub omega: f64,
    pub polarization: f64,
}

impl NuclearSpin {
    pub fn new(position: Vector3, coupling: HyperfineCoupling, omega: f64, polarization: f64) -> Self {
        Self {
            position,
            a_x: coupling.a_x,
            a_y: coupling.a_y,
            a_z: coupling.a_z,
            a_perp: coupling.perp(),
            omega,
            polarization,
        }
    }

    /// A spin defined by its couplings only (position left at the origin).
    pub fn from_couplings(a_x: f64, a_y: f64, a_z: f64, omega: f64, polarization: f64) -> Self {
        Self::new(
            Vector3::zeros(),
            HyperfineCoupling { a_x, a_y, a_z },
            omega,
            polarization,
        )
    }

    pub fn distance(&self) -> f64 {
        self.position.norm()
    }

    pub fn with_polarization(mut self, p: f64) -> Self {
        self.polarization = p;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// One seeded disorder sample of the bath, optionally partitioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRealization {
    pub seed: u64,
    /// Sorted by distance from the NV center.
    pub spins: Vec<NuclearSpin>,
    /// Observed spin indices grouped into macrofractions.
    pub macrofractions: Vec<Vec<usize>>,
    /// Traced-out spin indices.
    pub unobserved: Vec<usize>,
}

impl EnvironmentRealization {
    /// An unpartitioned environment from explicit spins (all unobserved).
    pub fn from_spins(seed: u64, spins: Vec<NuclearSpin>) -> Self {
        let unobserved = (0..spins.len()).collect();
        Self {
            seed,
            spins,
            macrofractions: Vec::new(),
            unobserved,
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn unobserved_spins(&self) -> impl Iterator<Item = &NuclearSpin> + '_ {
        self.unobserved.iter().map(move |&i| &self.spins[i])
    }

    pub fn macrofraction_spins(&self, index: usize) -> Result<Vec<NuclearSpin>> {
        let mf = self
            .macrofractions
            .get(index)
            .ok_or_else(|| invalid(format!("no macrofraction {index}")))?;
        if mf.is_empty() {
            return Err(invalid(format!("macrofraction {index} is empty")));
        }
        Ok(mf.iter().map(|&i| self.spins[i]).collect())
    }

    pub fn observed_count(&self) -> usize {
        self.macrofractions.iter().map(Vec::len).sum()
    }

    /// Same positions and couplings, new Larmor frequency for every spin.
    pub fn with_omega(&self, omega: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.spins {
            s.omega = omega;
        }
        out
    }
}

/// Caches the lattice enumeration and per-site couplings so that many seeds
/// can be drawn cheaply.
#[derive(Debug, Clone)]
pub struct RealizationSampler {
    spec: LatticeSpec,
    constants: PhysicalConstants,
    radius: f64,
    sites: Vec<Vector3>,
    couplings: Vec<HyperfineCoupling>,
    /// Sites `0..inner` lie inside the exclusion radius.
    inner: usize,
}

impl RealizationSampler {
    pub fn new(spec: &LatticeSpec, constants: &PhysicalConstants) -> Result<Self> {
        Self::with_radius(spec, constants, spec.generation_radius())
    }

    pub fn with_radius(spec: &LatticeSpec, constants: &PhysicalConstants, radius: f64) -> Result<Self> {
        spec.validate()?;
        if radius.is_nan() || radius <= spec.exclusion_radius {
            return Err(invalid(format!(
                "generation radius {radius} nm must exceed the exclusion radius {} nm",
                spec.exclusion_radius
            )));
        }
        let sites = generate_lattice_sites(spec, radius)?;
        let couplings = sites
            .iter()
            .map(|r| hyperfine_coupling(r, constants, &spec.nv_axis))
            .collect::<Result<Vec<_>>>()?;
        let inner = sites.partition_point(|s| s.norm() < spec.exclusion_radius);
        Ok(Self {
            spec: spec.clone(),
            constants: *constants,
            radius,
            sites,
            couplings,
            inner,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Draws occupations site by site in distance order. The exclusion zone
    /// is drawn first; any hit there rejects the whole realization and the
    /// draw restarts from the advanced generator state.
    pub fn sample(&self, field_t: f64, seed: u64) -> Result<EnvironmentRealization> {
        let c = self.spec.concentration;
        if self.inner > 0 && c >= 1.0 {
            return Err(Error::RejectionLimit { attempts: 0 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attempts = 0;
        loop {
            if attempts == MAX_REJECTION_ATTEMPTS {
                return Err(Error::RejectionLimit { attempts });
            }
            attempts += 1;
            let mut hit = false;
            for _ in 0..self.inner {
                // keep consuming so every attempt uses the same number of draws
                hit |= rng.gen::<f64>() < c;
            }
            if !hit {
                break;
            }
        }

        let omega = self.constants.larmor(field_t);
        let want = self.spec.target_count;
        let mut spins = Vec::with_capacity(want);
        for (pos, coupling) in self.sites[self.inner..].iter().zip(&self.couplings[self.inner..]) {
            if rng.gen::<f64>() < c {
                spins.push(NuclearSpin::new(*pos, *coupling, omega, 0.0));
                if spins.len() == want {
                    break;
                }
            }
        }
        if spins.len() < want {
            return Err(Error::InsufficientSites {
                found: spins.len(),
                required: want,
                radius_nm: self.radius,
            });
        }
        Ok(EnvironmentRealization::from_spins(seed, spins))
    }
}

/// Samples one realization with default constants and generation radius.
pub fn sample_realization(spec: &LatticeSpec, field_t: f64, seed: u64) -> Result<EnvironmentRealization> {
    RealizationSampler::new(spec, &PhysicalConstants::default())?.sample(field_t, seed)
}

/// Marks the `observed_count` nearest spins as observed with polarization `p`
/// and deals them round-robin, by descending transverse coupling, into
/// `macrofraction_count` equal macrofractions. Everything else is traced out
/// with zero polarization.
pub fn partition(
    real: &EnvironmentRealization,
    observed_count: usize,
    macrofraction_count: usize,
    p: f64,
) -> Result<EnvironmentRealization> {
    let n = real.spins.len();
    if observed_count > n {
        return Err(invalid(format!("cannot observe {observed_count} of {n} spins")));
    }
    if !(p.is_finite() && p.abs() <= 1.0) {
        return Err(invalid(format!("polarization {p} outside [-1, 1]")));
    }
    if observed_count > 0 && (macrofraction_count == 0 || !observed_count.is_multiple_of(macrofraction_count)) {
        return Err(invalid(format!(
            "{macrofraction_count} macrofractions do not evenly divide {observed_count} observed spins"
        )));
    }

    let mut out = real.clone();
    for (i, s) in out.spins.iter_mut().enumerate() {
        s.polarization = if i < observed_count { p } else { 0.0 };
    }

    let mut by_coupling: Vec<usize> = (0..observed_count).collect();
    by_coupling.sort_by(|&a, &b| real.spins[b].a_perp.total_cmp(&real.spins[a].a_perp).then(a.cmp(&b)));
    out.macrofractions = if observed_count == 0 {
        Vec::new()
    } else {
        let mut groups = vec![Vec::with_capacity(observed_count / macrofraction_count); macrofraction_count];
        for (rank, idx) in by_coupling.into_iter().enumerate() {
            groups[rank % macrofraction_count].push(idx);
        }
        groups
    };
    out.unobserved = (observed_count..n).collect();
    Ok(out)
}
