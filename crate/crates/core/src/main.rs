use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nvsbs::runner::{config_from_manifest, run_scenario, Scenario, ScenarioConfig, MANIFEST_FILE};

#[derive(Parser)]
#[command(
    name = "nvsbs",
    version,
    about = "NV-center decoherence and broadcast-structure simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decoherence factor from the unobserved bath for several fN.
    Decoherence(Common),
    /// Macrofraction fidelity for several sizes and polarizations.
    Fidelity(Common),
    /// Joint decoherence and distinguishability with window detection.
    Sbs(Common),
    /// Long-time fidelity plateau against magnetic field.
    FieldSweep(Common),
    /// Counts of spins more strongly coupled than the Larmor frequency.
    Stats(Common),
    /// Closed forms against brute-force matrix computations.
    SelfCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; replaces any explicit seed list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Field in gauss; for field-sweep, the single field to sweep.
    #[arg(long)]
    b_gauss: Option<f64>,
    #[arg(long)]
    polarization: Option<f64>,
    /// μN.
    #[arg(long)]
    macrofraction_size: Option<usize>,
    /// Number of realizations.
    #[arg(long)]
    ensemble: Option<usize>,
}

impl Command {
    fn split(self) -> (Scenario, Common) {
        match self {
            Command::Decoherence(c) => (Scenario::Decoherence, c),
            Command::Fidelity(c) => (Scenario::Fidelity, c),
            Command::Sbs(c) => (Scenario::Sbs, c),
            Command::FieldSweep(c) => (Scenario::FieldSweep, c),
            Command::Stats(c) => (Scenario::Stats, c),
            Command::SelfCheck(c) => (Scenario::SelfCheck, c),
        }
    }
}

fn build_config(scenario: Scenario, args: Common) -> nvsbs::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) if path.file_name().is_some_and(|n| n == MANIFEST_FILE) => config_from_manifest(path, scenario)?,
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
        cfg.seeds = None;
    }
    if let Some(n) = args.ensemble {
        cfg.ensemble_size = n;
        cfg.seeds = None;
    }
    if let Some(b) = args.b_gauss {
        cfg.field_gauss = b;
        cfg.field_sweep_gauss = Some(vec![b]);
    }
    if let Some(p) = args.polarization {
        cfg.polarizations = Some(vec![p]);
    }
    if let Some(mu) = args.macrofraction_size {
        cfg.macrofraction_sizes = Some(vec![mu]);
    }
    if let Some(dir) = args.out_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (scenario, args) = Cli::parse().command.split();
    let outcome = build_config(scenario, args).and_then(|cfg| run_scenario(scenario, &cfg));
    match outcome {
        Ok(run) => {
            for line in &run.summary {
                println!("{line}");
            }
            println!(
                "wrote {} files to {}",
                run.manifest.files.len() + 1,
                run.directory.display()
            );
            if run.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("self-check tolerance breached");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
