use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use crate::dynamics::{gamma_product, QubitPair, TimeGrid};
use crate::environment::{gauss, partition, EnvironmentRealization, PhysicalConstants};
use crate::error::{invalid, Result};
use crate::fidelity::fidelity_macrofraction;

pub const MEAN_SERIES: &str = "mean";

pub fn seed_series(seed: u64) -> String {
    format!("seed-{seed}")
}

/// Mean of per-realization curves. Curves are summed in ascending seed order
/// so the result does not depend on how the seed list is permuted.
pub fn ensemble_mean(curves: &[(u64, Vec<f64>)]) -> Vec<f64> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by_key(|&i| curves[i].0);
    let mut acc = vec![0.0; first.1.len()];
    for i in order {
        for (a, v) in acc.iter_mut().zip(&curves[i].1) {
            *a += v;
        }
    }
    let n = curves.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// One realization per seed at the given field, in seed-list order.
pub fn realizations(cfg: &ScenarioConfig, field_gauss: f64) -> Result<Vec<EnvironmentRealization>> {
    let sampler = cfg.sampler()?;
    cfg.seed_list()
        .par_iter()
        .map(|&seed| sampler.sample(gauss(field_gauss), seed))
        .collect()
}

fn grid(cfg: &ScenarioConfig) -> Result<TimeGrid> {
    cfg.time.ok_or_else(|| invalid("time grid not resolved"))?.grid()
}

fn list<T: Clone>(v: &Option<Vec<T>>, what: &str) -> Result<Vec<T>> {
    v.clone().ok_or_else(|| invalid(format!("{what} not resolved")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceRow {
    pub t_us: f64,
    pub f_n: usize,
    pub series: String,
    pub re: f64,
    pub im: f64,
    pub gamma_abs2: f64,
}

/// `γ(t)` from the unobserved remainder for every fN, per realization and
/// averaged over the ensemble.
pub fn decoherence_scan(cfg: &ScenarioConfig) -> Result<Vec<DecoherenceRow>> {
    let grid = grid(cfg)?;
    let envs = realizations(cfg, cfg.field_gauss)?;
    let mut rows = Vec::new();
    for f_n in list(&cfg.observed_counts, "observed counts")? {
        let curves: Vec<(u64, Vec<num_complex::Complex64>)> = envs
            .par_iter()
            .map(|env| {
                let parted = partition(env, f_n, 1, 1.0)?;
                Ok((env.seed, gamma_product(&parted, cfg.pair, &grid)))
            })
            .collect::<Result<_>>()?;
        let pick = |f: fn(&num_complex::Complex64) -> f64| -> Vec<(u64, Vec<f64>)> {
            curves.iter().map(|(s, g)| (*s, g.iter().map(f).collect())).collect()
        };
        let mean_re = ensemble_mean(&pick(|z| z.re));
        let mean_im = ensemble_mean(&pick(|z| z.im));
        let mean_abs2 = ensemble_mean(&pick(|z| z.norm_sqr()));
        for (seed, g) in &curves {
            let series = seed_series(*seed);
            rows.extend(grid.values().iter().zip(g).map(|(&t_us, z)| DecoherenceRow {
                t_us,
                f_n,
                series: series.clone(),
                re: z.re,
                im: z.im,
                gamma_abs2: z.norm_sqr(),
            }));
        }
        rows.extend(grid.values().iter().enumerate().map(|(i, &t_us)| DecoherenceRow {
            t_us,
            f_n,
            series: MEAN_SERIES.into(),
            re: mean_re[i],
            im: mean_im[i],
            gamma_abs2: mean_abs2[i],
        }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub t_us: f64,
    pub mu_n: usize,
    pub polarization: f64,
    pub series: String,
    pub macrofraction: usize,
    pub m: i8,
    pub m_prime: i8,
    pub value: f64,
}

/// Fidelity curves of every macrofraction for one (μN, p) setting.
fn macrofraction_curves(
    envs: &[EnvironmentRealization],
    mu_n: usize,
    count: usize,
    p: f64,
    pair: QubitPair,
    grid: &TimeGrid,
) -> Result<Vec<(u64, Vec<Vec<f64>>)>> {
    envs.par_iter()
        .map(|env| {
            let parted = partition(env, mu_n * count, count, p)?;
            let curves = (0..count)
                .map(|i| Ok(fidelity_macrofraction(&parted, i, pair, grid)?.values))
                .collect::<Result<Vec<_>>>()?;
            Ok((env.seed, curves))
        })
        .collect()
}

fn fidelity_rows(
    curves: &[(u64, Vec<Vec<f64>>)],
    mu_n: usize,
    p: f64,
    pair: QubitPair,
    grid: &TimeGrid,
) -> Vec<FidelityRow> {
    let count = curves.first().map_or(0, |c| c.1.len());
    let mut rows = Vec::new();
    let mut push = |series: &str, i: usize, values: &[f64]| {
        rows.extend(grid.values().iter().zip(values).map(|(&t_us, &value)| FidelityRow {
            t_us,
            mu_n,
            polarization: p,
            series: series.to_string(),
            macrofraction: i,
            m: pair.m(),
            m_prime: pair.m_prime(),
            value,
        }));
    };
    for (seed, per_mf) in curves {
        for (i, values) in per_mf.iter().enumerate() {
            push(&seed_series(*seed), i, values);
        }
    }
    for i in 0..count {
        let of_i: Vec<(u64, Vec<f64>)> = curves.iter().map(|(s, c)| (*s, c[i].clone())).collect();
        push(MEAN_SERIES, i, &ensemble_mean(&of_i));
    }
    rows
}

pub fn fidelity_scan(cfg: &ScenarioConfig) -> Result<Vec<FidelityRow>> {
    let grid = grid(cfg)?;
    let envs = realizations(cfg, cfg.field_gauss)?;
    let count = cfg.macrofraction_count.unwrap_or(1);
    let mut rows = Vec::new();
    for mu_n in list(&cfg.macrofraction_sizes, "macrofraction sizes")? {
        for p in list(&cfg.polarizations, "polarizations")? {
            let curves = macrofraction_curves(&envs, mu_n, count, p, cfg.pair, &grid)?;
            rows.extend(fidelity_rows(&curves, mu_n, p, cfg.pair, &grid));
        }
    }
    Ok(rows)
}

/// Maximal run of consecutive grid points with `D < ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub start_us: f64,
    pub end_us: f64,
}

impl Window {
    pub fn duration(&self) -> f64 {
        self.end_us - self.start_us
    }
}

pub fn windows_below(t: &[f64], d: &[f64], threshold: f64) -> Vec<Window> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &v) in d.iter().enumerate() {
        match (v < threshold, open) {
            (true, None) => open = Some(i),
            (false, Some(s)) => {
                out.push(Window {
                    start_us: t[s],
                    end_us: t[i - 1],
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push(Window {
            start_us: t[s],
            end_us: t[d.len() - 1],
        });
    }
    out
}

/// Time series of one realization relevant to structure formation.
#[derive(Debug, Clone, PartialEq)]
pub struct SbsTrace {
    pub seed: u64,
    pub gamma_abs: Vec<f64>,
    pub fidelities: Vec<Vec<f64>>,
    /// `max(|γ|, max_i 𝓕_i)`.
    pub distance: Vec<f64>,
}

pub fn sbs_trace(env: &EnvironmentRealization, pair: QubitPair, grid: &TimeGrid) -> Result<SbsTrace> {
    let gamma_abs: Vec<f64> = gamma_product(env, pair, grid).iter().map(|z| z.norm()).collect();
    let fidelities = (0..env.macrofractions.len())
        .map(|i| Ok(fidelity_macrofraction(env, i, pair, grid)?.values))
        .collect::<Result<Vec<_>>>()?;
    let distance = (0..grid.len())
        .map(|k| fidelities.iter().map(|f| f[k]).fold(gamma_abs[k], f64::max))
        .collect();
    Ok(SbsTrace {
        seed: env.seed,
        gamma_abs,
        fidelities,
        distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbsRow {
    pub t_us: f64,
    pub mu_n: usize,
    pub polarization: f64,
    pub series: String,
    pub observable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbsWindowRow {
    pub mu_n: usize,
    pub polarization: f64,
    pub seed: u64,
    /// First grid time with `D < ε`.
    pub first_below_us: Option<f64>,
    /// First window lasting at least the configured minimum.
    pub window_start_us: Option<f64>,
    pub window_end_us: Option<f64>,
    pub longest_window_us: f64,
    pub sustained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbsDiagnostic {
    pub rows: Vec<SbsRow>,
    pub windows: Vec<SbsWindowRow>,
}

pub fn window_summary(
    trace: &SbsTrace,
    grid: &TimeGrid,
    threshold: f64,
    min_window_us: f64,
) -> (Option<f64>, Option<Window>, f64) {
    let windows = windows_below(grid.values(), &trace.distance, threshold);
    let first = windows.first().map(|w| w.start_us);
    let sustained = windows.iter().copied().find(|w| w.duration() >= min_window_us);
    let longest = windows.iter().map(Window::duration).fold(0.0, f64::max);
    (first, sustained, longest)
}

pub fn sbs_diagnostic(cfg: &ScenarioConfig) -> Result<SbsDiagnostic> {
    let grid = grid(cfg)?;
    let envs = realizations(cfg, cfg.field_gauss)?;
    let count = cfg.macrofraction_count.unwrap_or(2);
    let mut rows = Vec::new();
    let mut windows = Vec::new();
    for mu_n in list(&cfg.macrofraction_sizes, "macrofraction sizes")? {
        for p in list(&cfg.polarizations, "polarizations")? {
            let traces: Vec<SbsTrace> = envs
                .par_iter()
                .map(|env| sbs_trace(&partition(env, mu_n * count, count, p)?, cfg.pair, &grid))
                .collect::<Result<_>>()?;
            let mut push = |series: &str, observable: String, values: &[f64]| {
                rows.extend(grid.values().iter().zip(values).map(|(&t_us, &value)| SbsRow {
                    t_us,
                    mu_n,
                    polarization: p,
                    series: series.to_string(),
                    observable: observable.clone(),
                    value,
                }));
            };
            for tr in &traces {
                let series = seed_series(tr.seed);
                push(&series, "gamma_abs".into(), &tr.gamma_abs);
                let abs2: Vec<f64> = tr.gamma_abs.iter().map(|g| g * g).collect();
                push(&series, "gamma_abs2".into(), &abs2);
                for (i, f) in tr.fidelities.iter().enumerate() {
                    push(&series, format!("fidelity_{i}"), f);
                }
                push(&series, "distance".into(), &tr.distance);

                let (first, sustained, longest) = window_summary(tr, &grid, cfg.sbs_threshold, cfg.sbs_min_window_us);
                windows.push(SbsWindowRow {
                    mu_n,
                    polarization: p,
                    seed: tr.seed,
                    first_below_us: first,
                    window_start_us: sustained.map(|w| w.start_us),
                    window_end_us: sustained.map(|w| w.end_us),
                    longest_window_us: longest,
                    sustained: sustained.is_some(),
                });
            }
            let of = |f: &dyn Fn(&SbsTrace) -> Vec<f64>| -> Vec<f64> {
                ensemble_mean(&traces.iter().map(|t| (t.seed, f(t))).collect::<Vec<_>>())
            };
            push(MEAN_SERIES, "gamma_abs".into(), &of(&|t| t.gamma_abs.clone()));
            for i in 0..count {
                push(MEAN_SERIES, format!("fidelity_{i}"), &of(&|t| t.fidelities[i].clone()));
            }
            push(MEAN_SERIES, "distance".into(), &of(&|t| t.distance.clone()));
        }
    }
    Ok(SbsDiagnostic { rows, windows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSweepRow {
    pub t_us: f64,
    pub b_gauss: f64,
    pub mu_n: usize,
    pub polarization: f64,
    pub series: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSummaryRow {
    pub b_gauss: f64,
    pub mu_n: usize,
    pub polarization: f64,
    /// Time average of the ensemble-mean curve over the long-time window.
    pub long_time_mean: f64,
    /// Temporal standard deviation of the ensemble-mean curve there.
    pub ensemble_curve_std: f64,
    /// Temporal standard deviation of each realization, averaged.
    pub realization_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSweep {
    pub rows: Vec<FieldSweepRow>,
    pub summary: Vec<FieldSummaryRow>,
}

/// Population mean and standard deviation of `values` at times in `[lo, hi]`.
pub fn window_stats(t: &[f64], values: &[f64], [lo, hi]: [f64; 2]) -> Result<(f64, f64)> {
    let inside: Vec<f64> = t
        .iter()
        .zip(values)
        .filter(|(t, _)| (lo..=hi).contains(*t))
        .map(|(_, v)| *v)
        .collect();
    if inside.is_empty() {
        return Err(invalid(format!("no grid points inside the window [{lo}, {hi}] μs")));
    }
    let n = inside.len() as f64;
    let mean = inside.iter().sum::<f64>() / n;
    let var = inside.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

pub fn field_sweep(cfg: &ScenarioConfig) -> Result<FieldSweep> {
    let grid = grid(cfg)?;
    let window = cfg.long_time_window_us;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for b in list(&cfg.field_sweep_gauss, "sweep fields")? {
        let envs = realizations(cfg, b)?;
        for mu_n in list(&cfg.macrofraction_sizes, "macrofraction sizes")? {
            for p in list(&cfg.polarizations, "polarizations")? {
                let curves: Vec<(u64, Vec<f64>)> = macrofraction_curves(&envs, mu_n, 1, p, cfg.pair, &grid)?
                    .into_iter()
                    .map(|(s, mut c)| (s, c.swap_remove(0)))
                    .collect();
                let mean = ensemble_mean(&curves);
                let mut push = |series: String, values: &[f64]| {
                    rows.extend(grid.values().iter().zip(values).map(|(&t_us, &value)| FieldSweepRow {
                        t_us,
                        b_gauss: b,
                        mu_n,
                        polarization: p,
                        series: series.clone(),
                        value,
                    }));
                };
                for (seed, c) in &curves {
                    push(seed_series(*seed), c);
                }
                push(MEAN_SERIES.into(), &mean);
                let (long_time_mean, ensemble_curve_std) = window_stats(grid.values(), &mean, window)?;
                let mut stds = Vec::with_capacity(curves.len());
                for (seed, c) in &curves {
                    stds.push((*seed, vec![window_stats(grid.values(), c, window)?.1]));
                }
                summary.push(FieldSummaryRow {
                    b_gauss: b,
                    mu_n,
                    polarization: p,
                    long_time_mean,
                    ensemble_curve_std,
                    realization_std: ensemble_mean(&stds)[0],
                });
            }
        }
    }
    Ok(FieldSweep { rows, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingCountRow {
    pub seed: u64,
    /// Spins with `a_⊥ > ω`.
    pub n_perp: usize,
    /// Spins with `|a_z| > ω`.
    pub n_parallel: usize,
    /// Spins with both.
    pub n_both: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    pub count: usize,
    pub perp: usize,
    pub parallel: usize,
    pub both: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingStatistics {
    pub counts: Vec<CouplingCountRow>,
    pub histogram: Vec<HistogramRow>,
    pub mean_perp: f64,
    pub mean_parallel: f64,
    pub mean_both: f64,
}

pub fn count_strong(env: &EnvironmentRealization, omega: f64) -> CouplingCountRow {
    let perp = |s: &&crate::environment::NuclearSpin| s.a_perp > omega;
    let par = |s: &&crate::environment::NuclearSpin| s.a_z.abs() > omega;
    CouplingCountRow {
        seed: env.seed,
        n_perp: env.spins.iter().filter(perp).count(),
        n_parallel: env.spins.iter().filter(par).count(),
        n_both: env.spins.iter().filter(|s| perp(s) && par(s)).count(),
    }
}

pub fn coupling_statistics(cfg: &ScenarioConfig) -> Result<CouplingStatistics> {
    let omega = PhysicalConstants::default().larmor(gauss(cfg.field_gauss));
    let counts: Vec<CouplingCountRow> = realizations(cfg, cfg.field_gauss)?
        .iter()
        .map(|env| count_strong(env, omega))
        .collect();
    let top = counts.iter().map(|c| c.n_perp.max(c.n_parallel)).max().unwrap_or(0);
    let histogram = (0..=top)
        .map(|k| HistogramRow {
            count: k,
            perp: counts.iter().filter(|c| c.n_perp == k).count(),
            parallel: counts.iter().filter(|c| c.n_parallel == k).count(),
            both: counts.iter().filter(|c| c.n_both == k).count(),
        })
        .collect();
    let n = counts.len() as f64;
    let mean = |f: fn(&CouplingCountRow) -> usize| counts.iter().map(|c| f(c) as f64).sum::<f64>() / n;
    Ok(CouplingStatistics {
        mean_perp: mean(|c| c.n_perp),
        mean_parallel: mean(|c| c.n_parallel),
        mean_both: mean(|c| c.n_both),
        counts,
        histogram,
    })
}
