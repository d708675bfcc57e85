//! `gapbox` command-line front-end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Parser, Subcommand};
use serde::Serialize;

use output::{CmdResult, Failure, Sink};

#[derive(Parser, Debug, Serialize)]
#[command(name = "gapbox", version, about = "Spectral-gap analysis of bounded-degree graph sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Box-space manifest (JSON list of `{path, label}`)
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,

    /// Target boundary ratio
    #[arg(long, global = true, default_value_t = 0.1)]
    pub alpha: f64,

    /// Assumed Laplacian gap; defaults to the smallest measured gap
    #[arg(long, global = true)]
    pub gap: Option<f64>,

    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Largest piece handled by exhaustive search (at most 24)
    #[arg(long, global = true, default_value_t = 20)]
    pub exact_cap: usize,

    /// Components smaller than this are dropped by `expanderize`
    #[arg(long, global = true, default_value_t = 1)]
    pub min_component: usize,

    /// Worker threads; defaults to the number of cores
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Spectra of Δ, M and Δ_τ for every graph
    Spectrum {
        /// Eigenvalues reported per operator
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Cheeger constants with spectral bounds
    Cheeger,
    /// Partition every graph into pieces and junk
    Decompose,
    /// Rewire the boundary of one piece
    Rewire {
        /// Graph index in the manifest
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Comma-separated vertex list
        #[arg(long, value_delimiter = ',', required = true)]
        piece: Vec<usize>,
        /// Inner-expansion constant; defaults to the one derived from the gap
        #[arg(long)]
        big_c: Option<f64>,
    },
    /// Full pipeline: decompose, rewire, drop junk
    Expanderize {
        /// Run even when alpha violates the rewiring condition
        #[arg(long)]
        allow_infeasible: bool,
        /// Tolerance for the retention verdict
        #[arg(long, default_value_t = 0.1)]
        iso_tol: f64,
    },
    /// Link-spectrum certificates and the Δ_τ gap
    Zuk,
    /// Build a box space from a generator spec
    Generate {
        /// JSON `{family, params, seed}`
        #[arg(long)]
        spec: PathBuf,
    },
    /// Good-set fraction of a permutation action
    Sofic {
        /// JSON action `{m, labels, perms, inverses, relations, fixed_words}`
        #[arg(long, conflicts_with = "cyclic")]
        action: Option<PathBuf>,
        /// Use the regular action of Z/N instead
        #[arg(long)]
        cyclic: Option<usize>,
        /// Word-length radius for the cyclic relations
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Inject one defect into this generator
        #[arg(long)]
        defect: Option<String>,
    },
    /// Retention ratios of a witness between two box spaces
    ApproxIso {
        /// Manifest of the second box space
        #[arg(long)]
        other: PathBuf,
        /// Witness JSON; identity when omitted
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        iso_tol: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Cheeger => "cheeger",
            Command::Decompose => "decompose",
            Command::Rewire { .. } => "rewire",
            Command::Expanderize { .. } => "expanderize",
            Command::Zuk => "zuk",
            Command::Generate { .. } => "generate",
            Command::Sofic { .. } => "sofic",
            Command::ApproxIso { .. } => "approx-iso",
        }
    }
}

fn validate(cli: &Cli) -> CmdResult {
    if !(cli.tol > 0.0) {
        return Err(Failure::validation(format!("--tol must be positive, got {}", cli.tol)));
    }
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(Failure::validation(format!("--alpha must lie in (0, 1), got {}", cli.alpha)));
    }
    if let Some(g) = cli.gap {
        if !(g > 0.0) {
            return Err(Failure::validation(format!("--gap must be positive, got {g}")));
        }
    }
    if cli.exact_cap == 0 || cli.exact_cap > 24 {
        return Err(Failure::validation("--exact-cap must lie in 1..=24"));
    }
    if cli.workers == Some(0) {
        return Err(Failure::validation("--workers must be positive"));
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let started = SystemTime::now();
    validate(cli)?;
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::validation(e.to_string()))?;
    }
    let config = serde_json::to_value(cli).expect("config serializes");
    let sink = Sink::new(&cli.out, &config, cli.seed.unwrap_or(0))?;
    commands::dispatch(cli, &sink)?;
    sink.run_meta(cli.command.name(), started)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gapbox {}: {}", cli.command.name(), f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
