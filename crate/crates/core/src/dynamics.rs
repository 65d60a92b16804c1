//! Qubit decoherence from the traced-out part of the bath.
//!
//! A bath spin sees the conditional field `h_m = (m·a_x, m·a_y, ω + m·a_z)`
//! while the qubit sits in level `m`, so its conditional propagator is a
//! spin-½ rotation `exp(−i t h_m·σ/2)`. The single-spin decoherence factor is
//! `γ_{mm'} = Tr(U_m ρ U_{m'}†)` and the qubit coherence is the product over
//! the unobserved spins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::environment::{EnvironmentRealization, NuclearSpin, Vector3};
use crate::error::{invalid, Error, Result};
use crate::product::complex_product;

/// Pair of NV levels `(m, m')` spanning the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i8, i8)", into = "(i8, i8)")]
pub struct QubitPair {
    m: i8,
    m_prime: i8,
}

impl QubitPair {
    pub fn new(m: i8, m_prime: i8) -> Result<Self> {
        let ok = |x: i8| (-1..=1).contains(&x);
        if !ok(m) || !ok(m_prime) {
            return Err(invalid(format!(
                "qubit levels must be in {{-1, 0, 1}}, got ({m}, {m_prime})"
            )));
        }
        if m == m_prime {
            return Err(invalid("qubit levels must differ"));
        }
        Ok(Self { m, m_prime })
    }

    pub fn m(&self) -> i8 {
        self.m
    }

    pub fn m_prime(&self) -> i8 {
        self.m_prime
    }

    pub fn swapped(&self) -> Self {
        Self {
            m: self.m_prime,
            m_prime: self.m,
        }
    }

    pub fn involves_zero(&self) -> bool {
        self.m == 0 || self.m_prime == 0
    }
}

impl Default for QubitPair {
    fn default() -> Self {
        Self { m: 0, m_prime: 1 }
    }
}

impl TryFrom<(i8, i8)> for QubitPair {
    type Error = Error;
    fn try_from((m, mp): (i8, i8)) -> Result<Self> {
        Self::new(m, mp)
    }
}

impl From<QubitPair> for (i8, i8) {
    fn from(p: QubitPair) -> Self {
        (p.m, p.m_prime)
    }
}

/// Field seen by a bath spin while the qubit is in level `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPrecession {
    /// rad/μs
    pub axis: Vector3,
    /// |axis|, rad/μs
    pub rate: f64,
}

impl ConditionalPrecession {
    pub fn new(spin: &NuclearSpin, m: i8) -> Self {
        let m = f64::from(m);
        let axis = Vector3::new(m * spin.a_x, m * spin.a_y, spin.omega + m * spin.a_z);
        let rate = (m * spin.a_perp).hypot(spin.omega + m * spin.a_z);
        Self { axis, rate }
    }

    /// `(cos(Ω t/2), sin(Ω t/2)/Ω)`; the second entry stays finite as Ω → 0.
    pub fn half_angle(&self, t: f64) -> (f64, f64) {
        half_angle(self.rate, t)
    }
}

pub(crate) fn half_angle(rate: f64, t: f64) -> (f64, f64) {
    let x = 0.5 * rate * t;
    if rate * t.abs() < 1e-6 {
        (x.cos(), 0.5 * t * (1.0 - x * x / 6.0))
    } else {
        (x.cos(), x.sin() / rate)
    }
}

/// Strictly increasing sample times in μs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_values: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        if let Some(first) = t_values.first() {
            if !(first.is_finite() && *first >= 0.0) {
                return Err(invalid("time grid must start at t >= 0"));
            }
        }
        if t_values.windows(2).any(|w| !w[1].is_finite() || w[1] <= w[0]) {
            return Err(invalid("time grid must be strictly increasing and finite"));
        }
        Ok(Self { t_values })
    }

    /// `0, step, 2·step, …` up to and including `t_max` (within rounding).
    pub fn uniform(t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(invalid("uniform grid needs step > 0 and t_max >= 0"));
        }
        let n = (t_max / step + 1e-9).floor() as usize;
        Self::new((0..=n).map(|i| i as f64 * step).collect())
    }

    /// Uniform grid on `[0, t_max]` with step `min(max_step, π/(4·max Ω))`
    /// over every spin and both qubit levels.
    pub fn resolving(env: &EnvironmentRealization, pair: QubitPair, t_max: f64, max_step: f64) -> Result<Self> {
        let fastest = env
            .spins
            .iter()
            .flat_map(|s| [pair.m(), pair.m_prime()].map(|m| ConditionalPrecession::new(s, m).rate))
            .fold(0.0, f64::max);
        let step = if fastest > 0.0 {
            max_step.min(PI / (4.0 * fastest))
        } else {
            max_step
        };
        Self::uniform(t_max, step)
    }

    pub fn values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }
}

/// Single-spin decoherence factor `Tr(U_m ρ U_{m'}†)` in closed form.
pub fn gamma_single(spin: &NuclearSpin, pair: QubitPair, t: f64) -> Complex64 {
    let (m, mp) = (pair.m(), pair.m_prime());
    let (c, s) = ConditionalPrecession::new(spin, m).half_angle(t);
    let (cp, sp) = ConditionalPrecession::new(spin, mp).half_angle(t);
    let (mf, mpf) = (f64::from(m), f64::from(mp));
    let lz = spin.omega + mf * spin.a_z;
    let lzp = spin.omega + mpf * spin.a_z;
    let overlap = mf * mpf * spin.a_perp * spin.a_perp + lz * lzp;
    let re = c * cp + overlap * s * sp;
    let im = spin.polarization * (lzp * c * sp - lz * cp * s);
    Complex64::new(re, im)
}

/// `|γ_k(t)|²` for the (0, 1) qubit, three-term closed form.
pub fn gamma_modulus_sq(spin: &NuclearSpin, t: f64) -> f64 {
    let w = spin.omega;
    let lz = spin.a_z + w;
    let q = 1.0 - spin.polarization * spin.polarization;
    let (c1, s1) = ConditionalPrecession::new(spin, 1).half_angle(t);
    let (sw, cw) = (0.5 * w * t).sin_cos();
    // lz/Ω·sin(Ωt/2) = lz·s1 and sin(Ωt) = 2·sin(Ωt/2)·cos(Ωt/2)
    (1.0 - q * sw * sw) * c1 * c1 + (lz * s1).powi(2) * (1.0 - q * cw * cw) + lz * s1 * c1 * q * (w * t).sin()
}

/// Decoherence factor of one spin set at one instant.
pub fn gamma_of<'a, I>(spins: I, count: usize, pair: QubitPair, t: f64) -> Complex64
where
    I: IntoIterator<Item = &'a NuclearSpin>,
{
    complex_product(spins.into_iter().map(|s| gamma_single(s, pair, t)), count)
}

/// `γ(t)` from the unobserved spins on every grid point; all ones if none.
pub fn gamma_product(env: &EnvironmentRealization, pair: QubitPair, grid: &TimeGrid) -> Vec<Complex64> {
    let n = env.unobserved.len();
    grid.values()
        .iter()
        .map(|&t| gamma_of(env.unobserved_spins(), n, pair, t))
        .collect()
}

fn unobserved_nonempty(env: &EnvironmentRealization) -> Result<()> {
    if env.unobserved.is_empty() {
        return Err(Error::Undefined("no unobserved spins".into()));
    }
    Ok(())
}

/// T₂* from `(T₂*)² = 8 / Σ_k (a_z² + a_⊥²)` over the unobserved spins.
pub fn t2_star(env: &EnvironmentRealization) -> Result<f64> {
    unobserved_nonempty(env)?;
    let sum: f64 = env
        .unobserved_spins()
        .map(|s| s.a_z * s.a_z + s.a_perp * s.a_perp)
        .sum();
    Ok((8.0 / sum).sqrt())
}

/// Deterministic phase `φ(t) = (t/2)·Σ_k p_k a_z,k` over the unobserved spins.
pub fn phase_shift(env: &EnvironmentRealization, t: f64) -> Result<f64> {
    unobserved_nonempty(env)?;
    Ok(0.5 * t * env.unobserved_spins().map(|s| s.polarization * s.a_z).sum::<f64>())
}

/// Gaussian short-time form `exp[−(t/T₂*)² + iφ(t)]`, meaningful for Ω_k t ≪ 1.
///
/// The phase enters with a plus sign so that this agrees with
/// `γ = Tr(U_0 ρ U_1†)` as computed by [`gamma_single`].
pub fn gamma_short_time(env: &EnvironmentRealization, t: f64) -> Result<Complex64> {
    let t2 = t2_star(env)?;
    let phi = phase_shift(env, t)?;
    Ok(Complex64::from_polar((-(t / t2).powi(2)).exp(), phi))
}

/// One CSV-ready sample of the decoherence factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceRecord {
    pub t_us: f64,
    pub re: f64,
    pub im: f64,
    pub abs2: f64,
}

pub fn decoherence_records(grid: &TimeGrid, gamma: &[Complex64]) -> Vec<DecoherenceRecord> {
    grid.values()
        .iter()
        .zip(gamma)
        .map(|(&t_us, g)| DecoherenceRecord {
            t_us,
            re: g.re,
            im: g.im,
            abs2: g.norm_sqr(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spin(a_x: f64, a_y: f64, a_z: f64, omega: f64, p: f64) -> NuclearSpin {
        NuclearSpin::from_couplings(a_x, a_y, a_z, omega, p)
    }

    fn pairs() -> Vec<QubitPair> {
        [(0, 1), (1, 0), (0, -1), (-1, 0), (1, -1), (-1, 1)]
            .into_iter()
            .map(|(a, b)| QubitPair::new(a, b).unwrap())
            .collect()
    }

    #[test]
    fn pair_validation() {
        assert!(QubitPair::new(1, 1).is_err());
        assert!(QubitPair::new(2, 0).is_err());
        assert_eq!(QubitPair::default(), QubitPair::new(0, 1).unwrap());
        let json = serde_json::to_string(&QubitPair::default()).unwrap();
        assert_eq!(json, "[0,1]");
        assert!(serde_json::from_str::<QubitPair>("[1,1]").is_err());
    }

    #[test]
    fn precession_rates() {
        let s = spin(0.3, 0.4, -0.2, 0.07, 1.0);
        assert_eq!(ConditionalPrecession::new(&s, 0).rate, 0.07);
        assert_relative_eq!(
            ConditionalPrecession::new(&s, 1).rate,
            (0.25f64 + (0.07f64 - 0.2).powi(2)).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn identity_at_zero_time() {
        let s = spin(0.3, -0.1, 0.5, 0.07, 0.6);
        for p in pairs() {
            assert_eq!(gamma_single(&s, p, 0.0), Complex64::new(1.0, 0.0));
        }
        assert_eq!(gamma_modulus_sq(&s, 0.0), 1.0);
    }

    #[test]
    fn unpolarized_is_real() {
        let s = spin(0.3, -0.1, 0.5, 0.07, 0.0);
        for t in [0.5, 3.0, 17.0] {
            assert_eq!(gamma_single(&s, QubitPair::default(), t).im, 0.0);
        }
    }

    #[test]
    fn fully_polarized_modulus() {
        let (ap, az, w) = (0.4, -0.3, 0.0673);
        for p in [1.0, -1.0] {
            let s = spin(ap, 0.0, az, w, p);
            let omega = (ap * ap + (az + w) * (az + w)).sqrt();
            for t in [1.0, 4.2, 33.0] {
                let x = omega * t / 2.0;
                let expect = x.cos().powi(2) + ((az + w) / omega).powi(2) * x.sin().powi(2);
                assert_relative_eq!(gamma_modulus_sq(&s, t), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_rate_is_finite() {
        // ω + a_z = 0 and a_⊥ = 0: Ω₁ vanishes
        let s = spin(0.0, 0.0, -0.07, 0.07, 0.5);
        for p in pairs() {
            let g = gamma_single(&s, p, 10.0);
            assert!(g.re.is_finite() && g.im.is_finite());
            assert!(g.norm() <= 1.0 + 1e-12);
        }
        assert!(gamma_modulus_sq(&s, 10.0).is_finite());
        // and B = 0 makes Ω₀ vanish
        let s = spin(0.2, 0.1, 0.3, 0.0, 0.5);
        assert!(gamma_single(&s, QubitPair::default(), 5.0).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn commensurate_revival() {
        // a_⊥ = 0, ω = 1, a_z = 1 → Ω₀ = 1, Ω₁ = 2: both spinors return to +𝟙 at t = 4π
        let s = spin(0.0, 0.0, 1.0, 1.0, 0.3);
        let g = gamma_single(&s, QubitPair::default(), 4.0 * PI);
        assert_relative_eq!(g.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(g.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn no_transverse_coupling() {
        // with a_⊥ = 0 both branches are diagonal: γ = cos(ωt/2)cos(Ωt/2) + sin·sin + i p(...)
        // = cos((Ω−ω)t/2) + i p sin((Ω−ω)t/2) for Ω = ω + a_z
        let (w, az, p) = (0.0673, 0.25, 0.4);
        let s = spin(0.0, 0.0, az, w, p);
        let t = 7.0;
        let g = gamma_single(&s, QubitPair::default(), t);
        assert_relative_eq!(g.re, (az * t / 2.0).cos(), epsilon = 1e-14);
        assert_relative_eq!(g.im, p * (az * t / 2.0).sin(), epsilon = 1e-14);
    }

    #[test]
    fn time_grid_rules() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 1.0]).is_err());
        let g = TimeGrid::uniform(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_relative_eq!(*g.values().last().unwrap(), 1.0, epsilon = 1e-12);
        let env = EnvironmentRealization::from_spins(0, vec![spin(2.0, 0.0, 0.0, 0.07, 0.0)]);
        let g = TimeGrid::resolving(&env, QubitPair::default(), 10.0, 0.1).unwrap();
        let step = g.values()[1];
        assert!(step <= PI / (4.0 * 2.0) + 1e-15);
    }

    #[test]
    fn empty_unobserved_set() {
        let env = EnvironmentRealization {
            seed: 0,
            spins: vec![spin(0.1, 0.0, 0.1, 0.07, 1.0)],
            macrofractions: vec![vec![0]],
            unobserved: vec![],
        };
        let grid = TimeGrid::uniform(5.0, 1.0).unwrap();
        assert!(gamma_product(&env, QubitPair::default(), &grid)
            .iter()
            .all(|g| *g == Complex64::new(1.0, 0.0)));
        assert!(t2_star(&env).is_err());
        assert!(phase_shift(&env, 1.0).is_err());
    }

    #[test]
    fn t2_star_single_spin() {
        let env = EnvironmentRealization::from_spins(0, vec![spin(1.0, 0.0, 1.0, 0.07, 0.0)]);
        assert_relative_eq!(t2_star(&env).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(phase_shift(&env, 3.0).unwrap(), 0.0);
        let g = gamma_short_time(&env, 2.0).unwrap();
        assert_relative_eq!(g.norm(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(gamma_short_time(&env, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn phase_sign_matches_exact_factor() {
        let s = spin(0.05, 0.02, 0.3, 0.0673, 0.8);
        let env = EnvironmentRealization::from_spins(0, vec![s]);
        let t = 0.05;
        let exact = gamma_single(&s, QubitPair::default(), t);
        let approx = gamma_short_time(&env, t).unwrap();
        assert!(exact.im > 0.0);
        assert_relative_eq!(exact.arg(), approx.arg(), max_relative = 1e-2);
    }

    fn any_spin() -> impl Strategy<Value = NuclearSpin> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, 0.0..1.0f64, -1.0..=1.0f64)
            .prop_map(|(x, y, z, w, p)| spin(x, y, z, w, p))
    }

    fn any_pair() -> impl Strategy<Value = QubitPair> {
        (0usize..6).prop_map(|i| pairs()[i])
    }

    proptest! {
        #[test]
        fn contractive(s in any_spin(), pair in any_pair(), t in 0.0..300.0f64) {
            prop_assert!(gamma_single(&s, pair, t).norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn pair_swap_conjugates(s in any_spin(), pair in any_pair(), t in 0.0..300.0f64) {
            let a = gamma_single(&s, pair, t);
            let b = gamma_single(&s, pair.swapped(), t);
            prop_assert!((a - b.conj()).norm() <= 1e-13);
        }

        #[test]
        fn modulus_closed_form(s in any_spin(), t in 0.0..300.0f64) {
            let g = gamma_single(&s, QubitPair::default(), t);
            let m = gamma_modulus_sq(&s, t);
            prop_assert!((g.norm_sqr() - m).abs() <= 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&m));
        }
    }
}
