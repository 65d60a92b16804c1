use nvsbs::environment::{gauss, generate_lattice_sites, partition};
use nvsbs::runner::ScenarioConfig;
use proptest::prelude::*;

fn in_shell(d: f64, (lo, hi): (f64, f64)) -> bool {
    d > lo && d <= hi
}

#[test]
fn shell_occupation_matches_concentration() {
    let cfg = ScenarioConfig {
        spin_count: 120,
        ..Default::default()
    };
    let sampler = cfg.sampler().unwrap();
    let spec = cfg.lattice_spec();
    // every site in these shells is drawn in every accepted realization
    for shell in [(0.6, 1.0), (1.0, 1.4), (1.4, 1.8)] {
        let sites = generate_lattice_sites(&spec, shell.1)
            .unwrap()
            .iter()
            .filter(|r| in_shell(r.norm(), shell))
            .count();
        let seeds = 1000u64;
        let occupied: usize = (0..seeds)
            .map(|seed| {
                let env = sampler.sample(gauss(10.0), seed).unwrap();
                env.spins.iter().filter(|s| in_shell(s.distance(), shell)).count()
            })
            .sum();
        let trials = (sites as u64 * seeds) as f64;
        let c = cfg.concentration;
        let sigma = (c * (1.0 - c) / trials).sqrt();
        let fraction = occupied as f64 / trials;
        assert!(
            (fraction - c).abs() <= 3.0 * sigma,
            "shell {shell:?}: {occupied} of {trials} sites, fraction {fraction}, c = {c} ± {sigma}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sorted_and_partitioned(seed in any::<u64>(), m in 1usize..4, per in 1usize..10, p in -1.0..=1.0f64) {
        let cfg = ScenarioConfig { spin_count: 60, ..Default::default() };
        let env = cfg.sampler().unwrap().sample(gauss(10.0), seed).unwrap();
        prop_assert!(env.spins.windows(2).all(|w| w[0].distance() <= w[1].distance()));

        let parted = partition(&env, m * per, m, p).unwrap();
        let mut seen: Vec<usize> = parted.macrofractions.iter().flatten().chain(&parted.unobserved).copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..env.spins.len()).collect::<Vec<_>>());
        prop_assert!(parted.macrofractions.iter().all(|g| g.len() == per));
        for (i, s) in parted.spins.iter().enumerate() {
            prop_assert_eq!(s.polarization, if i < m * per { p } else { 0.0 });
        }
    }
}
