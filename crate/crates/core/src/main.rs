use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use torus_hodge::config::ExperimentConfig;
use torus_hodge::report::{self, Outcome};
use torus_hodge::Error;

#[derive(Parser)]
#[command(name = "torus-hodge", version, about = "Hodge theory and direct-image curvature on families of complex tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report destination; overrides `output` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the Laplacian spectra as CSV next to the report.
    #[arg(long, global = true)]
    dump_spectrum: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Operator identities, Hodge decomposition and kernel counts on one fiber.
    HodgeCheck,
    /// Curvature of the direct image at the base point.
    Curvature,
    /// Harmonic-space dimension along a segment of base points (CSV).
    ScanRank,
    /// Primitive horizontal lift and the Hodge-Riemann check.
    PrimitiveLift,
    /// Finite-dimensional curvature and Schur-complement battery.
    Bls,
    /// Identity suite and curvature in one document.
    Report,
}

fn spectrum_path(out: Option<&PathBuf>) -> PathBuf {
    match out {
        Some(p) => {
            let mut name = p.file_stem().unwrap_or_default().to_os_string();
            name.push(".spectrum.csv");
            p.with_file_name(name)
        }
        None => PathBuf::from("spectrum.csv"),
    }
}

fn execute(cli: &Cli) -> torus_hodge::Result<Outcome> {
    let path = cli.config.as_ref().ok_or_else(|| Error::ConfigInvalid("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let run = || match cli.command {
        Command::HodgeCheck => report::run_hodge_check(&cfg, cli.dump_spectrum),
        Command::Curvature => report::run_curvature(&cfg),
        Command::ScanRank => report::run_scan_rank(&cfg),
        Command::PrimitiveLift => report::run_primitive_lift(&cfg),
        Command::Bls => report::run_bls(&cfg),
        Command::Report => report::run_report(&cfg, cli.dump_spectrum),
    };
    let outcome = match cli.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let out = cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match &out {
        Some(p) => std::fs::write(p, &outcome.body)?,
        None => print!("{}", outcome.body),
    }
    if let Some(csv) = &outcome.spectrum_csv {
        std::fs::write(spectrum_path(out.as_ref()), csv)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConfigInvalid(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
