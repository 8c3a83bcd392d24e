//! Command-line front end for the `fockbound` library.
//!
//! Five verbs cover the workflows the library supports: `analyze` one state
//! file, sweep bound curves against amplitude (`fig1` for cat states, `fig2`
//! for photon-added coherent states), map admissible symplectic spectra
//! (`region`), and run the two-mode entanglement grid (`entangle`). Every
//! verb writes CSV; `--svg` adds self-rendered plots. Output is fully
//! deterministic: the same configuration produces byte-identical files.

pub mod commands;
pub mod config;
pub mod error;
pub mod fmt;
pub mod statefile;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{CommonArgs, RunConfig};
use error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "fockbound",
    version,
    about = "Truncated-Fock-space uncertainty bounds and entanglement grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

/// Flags every verb accepts.
#[derive(Debug, Clone, Args)]
pub struct CommonFlags {
    /// Output directory for CSV/SVG files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Fock-space cutoff override (per mode for two-mode grids).
    #[arg(long, value_name = "N")]
    pub cutoff: Option<usize>,
    /// Also render SVG plots next to the CSV output.
    #[arg(long)]
    pub svg: bool,
    /// TOML configuration file (ranges, tolerances, parallelism).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

impl From<CommonFlags> for CommonArgs {
    fn from(f: CommonFlags) -> Self {
        CommonArgs {
            out: f.out,
            cutoff: f.cutoff,
            svg: f.svg,
            config: f.config,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CatKind {
    Even,
    Odd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Measures, bounds, and margins for one state file.
    Analyze {
        /// TOML state description (see the state-file schema in the README).
        state_file: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Bound curves against amplitude for cat states.
    Fig1 {
        /// Cat parity.
        #[arg(long, value_enum)]
        kind: CatKind,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Bound curves against amplitude for photon-added coherent states.
    Fig2 {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Admissible (nu_plus, nu_minus) masks for a list of budgets B.
    Region {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Entanglement-criterion grid over (r, nbar) at fixed cat amplitude.
    Entangle {
        /// Cat amplitude on mode A.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also evaluate the spectral (entropy-based) form of the bound.
        #[arg(long)]
        strong: bool,
        #[command(flatten)]
        common: CommonFlags,
    },
}

/// Dispatches a parsed command line; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Analyze { state_file, common } => {
            let cfg = RunConfig::resolve(&common.into())?;
            commands::analyze(&state_file, &cfg)
        }
        Cmd::Fig1 { kind, common } => {
            let cfg = RunConfig::resolve(&common.into())?;
            let family = match kind {
                CatKind::Even => commands::FigFamily::EvenCat,
                CatKind::Odd => commands::FigFamily::OddCat,
            };
            commands::fig_sweep(family, &cfg)
        }
        Cmd::Fig2 { common } => {
            let cfg = RunConfig::resolve(&common.into())?;
            commands::fig_sweep(commands::FigFamily::Pacs, &cfg)
        }
        Cmd::Region { common } => {
            let cfg = RunConfig::resolve(&common.into())?;
            commands::region(&cfg)
        }
        Cmd::Entangle {
            alpha,
            strong,
            common,
        } => {
            let mut cfg = RunConfig::resolve(&common.into())?;
            if let Some(a) = alpha {
                cfg.entangle_alpha = a;
            }
            if strong {
                cfg.entangle_strong = true;
            }
            commands::entangle(&cfg)
        }
    }
}
