//! Distinguishability of the bath states conditioned on the qubit level.
//!
//! Every observed spin starts in `(𝟙 + p σ_z)/2` and precesses about the
//! conditional field of the qubit level it is correlated with. The fidelity
//! used throughout is the squared Uhlmann fidelity, which for qubits reduces
//! to `Tr(ρσ) + 2√(det ρ · det σ)` and factorizes over product states.

use serde::{Deserialize, Serialize};

use crate::dynamics::{half_angle, ConditionalPrecession, QubitPair, TimeGrid};
use crate::environment::{EnvironmentRealization, NuclearSpin, Vector3};
use crate::error::{invalid, Error, Result};
use crate::product::real_product;

/// Single-spin density matrix `(𝟙 + b·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub bloch: Vector3,
}

impl BlochState {
    pub fn new(bloch: Vector3) -> Result<Self> {
        if !bloch.iter().all(|x| x.is_finite()) || bloch.norm() > 1.0 + 1e-12 {
            return Err(invalid(format!("Bloch vector {bloch:?} is not a state")));
        }
        Ok(Self { bloch })
    }

    /// Initial bath state with polarization `p` along the field.
    pub fn polarized(p: f64) -> Self {
        Self {
            bloch: Vector3::new(0.0, 0.0, p),
        }
    }

    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.bloch.norm_squared())
    }
}

/// Bath spin state after time `t` with the qubit held in level `m`: the
/// initial Bloch vector rotated about the conditional field by `Ω_m t`.
pub fn conditional_state(spin: &NuclearSpin, m: i8, t: f64) -> BlochState {
    let prec = ConditionalPrecession::new(spin, m);
    let b = Vector3::new(0.0, 0.0, spin.polarization);
    if prec.rate == 0.0 {
        return BlochState { bloch: b };
    }
    let n = prec.axis / prec.rate;
    let (s, c) = (prec.rate * t).sin_cos();
    let rotated = b * c + n.cross(&b) * s + n * (n.dot(&b) * (1.0 - c));
    BlochState { bloch: rotated }
}

/// Qubit fidelity in Bloch form.
pub fn fidelity_2x2(rho: &BlochState, sigma: &BlochState) -> f64 {
    let mixed = |b: &Vector3| (1.0 - b.norm_squared()).max(0.0);
    let f = 0.5 * (1.0 + rho.bloch.dot(&sigma.bloch)) + 0.5 * (mixed(&rho.bloch) * mixed(&sigma.bloch)).sqrt();
    f.clamp(0.0, 1.0)
}

/// Fidelity between the two conditional states of one spin, evaluated by
/// rotating Bloch vectors.
pub fn fidelity_bloch(spin: &NuclearSpin, pair: QubitPair, t: f64) -> f64 {
    fidelity_2x2(
        &conditional_state(spin, pair.m(), t),
        &conditional_state(spin, pair.m_prime(), t),
    )
}

/// Single-spin conditional-state fidelity.
///
/// When one level is `0` the closed form `1 − p² a_⊥² sin²(Ω t/2)/Ω²` is
/// used, with Ω the rate of the other level. Otherwise the Bloch rotation
/// is evaluated directly.
pub fn fidelity_single_closed(spin: &NuclearSpin, pair: QubitPair, t: f64) -> f64 {
    if !pair.involves_zero() {
        return fidelity_bloch(spin, pair, t);
    }
    let m = if pair.m() == 0 { pair.m_prime() } else { pair.m() };
    let (_, s) = ConditionalPrecession::new(spin, m).half_angle(t);
    let p = spin.polarization;
    1.0 - (spin.a_perp * p * s).powi(2)
}

/// The general-(m, m′) single-spin expression exactly as printed in the
/// literature, with ω_m taken as the conditional precession rate. It is not
/// symmetric under m ↔ m′ and only agrees with [`fidelity_bloch`] for pairs
/// of the form (0, ±1); kept for comparison.
pub fn fidelity_single_printed(spin: &NuclearSpin, pair: QubitPair, t: f64) -> f64 {
    let (m, mp) = (f64::from(pair.m()), f64::from(pair.m_prime()));
    let wm = ConditionalPrecession::new(spin, pair.m()).rate;
    let wmp = ConditionalPrecession::new(spin, pair.m_prime()).rate;
    let (_, sm) = half_angle(wm, t);
    let (_, smp) = half_angle(wmp, t);
    let ap2 = spin.a_perp * spin.a_perp;
    let (w, az, p) = (spin.omega, spin.a_z, spin.polarization);
    let first = ap2 * (m * m * sm * sm - mp * mp * smp * smp);
    let second = 2.0
        * m
        * mp
        * (ap2 * (m * az + w) * (mp * az + w) / (wm * wmp) * sm * smp
            + ap2 / (wm * wmp) * (wm * t).sin() * (wmp * t).sin());
    let third = 2.0 * m * m * mp * mp * ap2 * ap2 * sm * sm * smp * smp;
    1.0 + p * p * (first + second + third)
}

/// Fidelity of one macrofraction on a time grid, for one qubit pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub macrofraction: usize,
    pub pair: QubitPair,
    pub values: Vec<f64>,
}

/// One CSV-ready sample of a [`FidelityCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub t_us: f64,
    pub value: f64,
    pub macrofraction: usize,
    pub m: i8,
    pub m_prime: i8,
}

impl FidelityCurve {
    pub fn records(&self, grid: &TimeGrid) -> Vec<FidelityRecord> {
        grid.values()
            .iter()
            .zip(&self.values)
            .map(|(&t_us, &value)| FidelityRecord {
                t_us,
                value,
                macrofraction: self.macrofraction,
                m: self.pair.m(),
                m_prime: self.pair.m_prime(),
            })
            .collect()
    }
}

/// Product of single-spin fidelities over a spin set at one instant.
pub fn fidelity_of(spins: &[NuclearSpin], pair: QubitPair, t: f64) -> f64 {
    real_product(spins.iter().map(|s| fidelity_single_closed(s, pair, t)), spins.len())
}

pub fn fidelity_macrofraction(
    env: &EnvironmentRealization,
    macrofraction: usize,
    pair: QubitPair,
    grid: &TimeGrid,
) -> Result<FidelityCurve> {
    let spins = env.macrofraction_spins(macrofraction)?;
    Ok(FidelityCurve {
        macrofraction,
        pair,
        values: grid.values().iter().map(|&t| fidelity_of(&spins, pair, t)).collect(),
    })
}

/// Orthogonalization time from `τ_μ⁻² = ¼ Σ_k p_k² a_⊥,k²`; infinite when
/// nothing in the macrofraction is both polarized and transversely coupled.
pub fn tau_mu(env: &EnvironmentRealization, macrofraction: usize) -> Result<f64> {
    let spins = env.macrofraction_spins(macrofraction)?;
    let rate: f64 = 0.25 * spins.iter().map(|s| (s.polarization * s.a_perp).powi(2)).sum::<f64>();
    Ok(if rate > 0.0 { rate.sqrt().recip() } else { f64::INFINITY })
}

/// Gaussian short-time form `exp[−(t/τ_μ)²]` (pair (0, 1)).
pub fn fidelity_short_time(env: &EnvironmentRealization, macrofraction: usize, t: f64) -> Result<f64> {
    let tau = tau_mu(env, macrofraction)?;
    Ok((-(t / tau).powi(2)).exp())
}

/// `exp[−Σ_k (a_⊥²/Ω²) p² sin²(Ω t/2)]`, valid when every term is small.
pub fn fidelity_exponential_approx(env: &EnvironmentRealization, macrofraction: usize, t: f64) -> Result<f64> {
    let spins = env.macrofraction_spins(macrofraction)?;
    let exponent: f64 = spins
        .iter()
        .map(|s| {
            let (_, sn) = ConditionalPrecession::new(s, 1).half_angle(t);
            (s.a_perp * s.polarization * sn).powi(2)
        })
        .sum();
    Ok((-exponent).exp())
}

/// Long-time weak-coupling estimate for a macrofraction in a uniform field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTimePlateau {
    /// `exp[−Σ a_⊥² p² / 2ω²]`
    pub plateau: f64,
    /// `Σ p² a_⊥² / ω²`; the plateau is close to zero only when this is ≫ 1.
    pub polarization_measure: f64,
    /// `2ω/σ²` with σ the sample standard deviation of a_⊥; `None` below two spins.
    pub onset_time: Option<f64>,
}

pub fn fidelity_long_time_plateau(
    env: &EnvironmentRealization,
    macrofraction: usize,
    omega: f64,
) -> Result<LongTimePlateau> {
    if omega.is_nan() || omega <= 0.0 {
        return Err(invalid("plateau estimate needs a positive Larmor frequency"));
    }
    let spins = env.macrofraction_spins(macrofraction)?;
    let sum: f64 = spins.iter().map(|s| (s.a_perp * s.polarization).powi(2)).sum();
    let n = spins.len() as f64;
    let onset_time = (spins.len() >= 2).then(|| {
        let mean = spins.iter().map(|s| s.a_perp).sum::<f64>() / n;
        let var = spins.iter().map(|s| (s.a_perp - mean).powi(2)).sum::<f64>() / (n - 1.0);
        2.0 * omega / var
    });
    Ok(LongTimePlateau {
        plateau: (-sum / (2.0 * omega * omega)).exp(),
        polarization_measure: sum / (omega * omega),
        onset_time,
    })
}

/// Strong-coupling form `∏[1 − p²(a_⊥²/|A|²)(1 − 2ω a_z/|A|²) sin²(t|A|/2)]`,
/// for `|a_z| ≫ ω` and `t ≪ √(1 + a_⊥²/a_z²)/ω`.
pub fn fidelity_strong_coupling(env: &EnvironmentRealization, macrofraction: usize, t: f64) -> Result<f64> {
    let spins = env.macrofraction_spins(macrofraction)?;
    let factors = spins.iter().map(|s| {
        let a2 = s.a_perp * s.a_perp + s.a_z * s.a_z;
        if a2 == 0.0 {
            return 1.0;
        }
        let a = a2.sqrt();
        let amp = s.polarization.powi(2) * s.a_perp * s.a_perp / a2 * (1.0 - 2.0 * s.omega * s.a_z / a2);
        1.0 - amp * (0.5 * t * a).sin().powi(2)
    });
    Ok(factors.product())
}

/// `(T₂*/τ_μ)² = 2 Σ_μ p² a_⊥² / Σ_unobserved (a_z² + a_⊥²)`.
pub fn timescale_ratio(env: &EnvironmentRealization, macrofraction: usize) -> Result<f64> {
    let spins = env.macrofraction_spins(macrofraction)?;
    if env.unobserved.is_empty() {
        return Err(Error::Undefined("no unobserved spins".into()));
    }
    let num: f64 = spins.iter().map(|s| (s.polarization * s.a_perp).powi(2)).sum();
    let den: f64 = env
        .unobserved_spins()
        .map(|s| s.a_z * s.a_z + s.a_perp * s.a_perp)
        .sum();
    Ok(2.0 * num / den)
}
