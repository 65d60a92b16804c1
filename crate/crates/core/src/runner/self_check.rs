//! Closed forms against the brute-force oracle on random inputs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{gamma_single, QubitPair};
use crate::environment::NuclearSpin;
use crate::error::Result;
use crate::fidelity::{conditional_state, fidelity_of, fidelity_single_closed};
use crate::oracle::{
    bloch_from_density, conditional_density, gamma_oracle, uhlmann_fidelity, BathSubset, JointEvolution,
};
use crate::product::complex_product;

pub const SINGLE_SPIN_TOLERANCE: f64 = 1e-12;
pub const MULTI_SPIN_TOLERANCE: f64 = 1e-10;

pub const ALL_PAIRS: [(i8, i8); 6] = [(0, 1), (1, 0), (0, -1), (-1, 0), (1, -1), (-1, 1)];

/// Spin with couplings and Larmor frequency up to a few rad/μs and any
/// polarization, the ranges met at fields of 10–100 G.
pub fn random_spin(rng: &mut impl Rng) -> NuclearSpin {
    NuclearSpin::from_couplings(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(0.0..7.0),
        rng.gen_range(-1.0..=1.0),
    )
}

pub fn random_pair(rng: &mut impl Rng) -> QubitPair {
    let (m, mp) = ALL_PAIRS[rng.gen_range(0..ALL_PAIRS.len())];
    QubitPair::new(m, mp).expect("listed pairs are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRow {
    pub quantity: &'static str,
    pub samples: usize,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tracker {
    samples: usize,
    worst: f64,
}

impl Tracker {
    fn push(&mut self, dev: f64) {
        self.samples += 1;
        // NaN must register as a failure
        self.worst = if dev.is_nan() {
            f64::INFINITY
        } else {
            self.worst.max(dev)
        };
    }

    fn row(&self, quantity: &'static str, tolerance: f64) -> CheckRow {
        CheckRow {
            quantity,
            samples: self.samples,
            max_abs_deviation: self.worst,
            tolerance,
            pass: self.worst <= tolerance,
        }
    }
}

/// `single` random single-spin cases and `multi` random subsets of 2–5 spins.
pub fn self_check(seed: u64, single: usize, multi: usize) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gamma, mut fid, mut state) = (Tracker::default(), Tracker::default(), Tracker::default());
    for _ in 0..single {
        let spin = random_spin(&mut rng);
        let pair = random_pair(&mut rng);
        let t = rng.gen_range(0.0..100.0);
        gamma.push((gamma_single(&spin, pair, t) - gamma_oracle(&spin, pair, t)).norm());
        let exact = uhlmann_fidelity(
            &conditional_density(&spin, pair.m(), t),
            &conditional_density(&spin, pair.m_prime(), t),
        );
        fid.push((fidelity_single_closed(&spin, pair, t) - exact).abs());
        let b = bloch_from_density(&conditional_density(&spin, pair.m(), t));
        state.push((conditional_state(&spin, pair.m(), t).bloch - b).amax());
    }

    let (mut total, mut unobs, mut mf, mut resid) = (
        Tracker::default(),
        Tracker::default(),
        Tracker::default(),
        Tracker::default(),
    );
    for _ in 0..multi {
        let n_unobs = rng.gen_range(1..=2);
        let sizes = [rng.gen_range(1..=2), rng.gen_range(0..=1)];
        let mut draw = |k: usize| (0..k).map(|_| random_spin(&mut rng)).collect::<Vec<_>>();
        let unobserved = draw(n_unobs);
        let macrofractions: Vec<Vec<NuclearSpin>> = sizes.iter().filter(|&&k| k > 0).map(|&k| draw(k)).collect();
        let subset = BathSubset::new(unobserved, macrofractions);
        let pair = random_pair(&mut rng);
        let theta: f64 = rng.gen_range(0.1..1.4);
        let amps = [
            Complex64::new(theta.cos(), 0.0),
            Complex64::from_polar(theta.sin(), rng.gen_range(0.0..std::f64::consts::TAU)),
        ];
        let evolution = JointEvolution::new(&subset, amps, pair)?;
        let t = rng.gen_range(0.0..50.0);
        let obs = evolution.observables(t);

        let closed =
            |spins: &[NuclearSpin]| complex_product(spins.iter().map(|s| gamma_single(s, pair, t)), spins.len());
        total.push((obs.gamma_total - closed(&subset.ordered())).norm());
        unobs.push((obs.gamma_unobserved - closed(&subset.unobserved)).norm());
        resid.push(obs.factorization_residual);
        for (f, spins) in obs.fidelities.iter().zip(&subset.macrofractions) {
            mf.push((f - fidelity_of(spins, pair, t)).abs());
        }
    }

    Ok(vec![
        gamma.row("gamma_single", SINGLE_SPIN_TOLERANCE),
        fid.row("fidelity_single", SINGLE_SPIN_TOLERANCE),
        state.row("conditional_bloch", SINGLE_SPIN_TOLERANCE),
        total.row("gamma_total_multi", MULTI_SPIN_TOLERANCE),
        unobs.row("gamma_unobserved_multi", MULTI_SPIN_TOLERANCE),
        mf.row("fidelity_macrofraction_multi", MULTI_SPIN_TOLERANCE),
        resid.row("factorization_residual", MULTI_SPIN_TOLERANCE),
    ])
}
