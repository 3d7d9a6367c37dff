use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sle-lcft", version, about = "Logarithmic null vectors, coupled Loewner flows and martingale checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Level-two null vector at weight Δ and its vanishing check.
    Nullvector(Flags),
    /// Drift and diffusion of the τ-dependent map for the SLE-type walk.
    Link(Flags),
    /// Trajectories of the coupled pair (h, ĥ) at the checkpoints.
    Simulate(Flags),
    /// Monte Carlo drift test of the map observable.
    Martingale(Flags),
    /// Monte Carlo of the walk on the truncated module against the exact flow.
    ModuleMc(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Nullvector(_) => "nullvector",
            Command::Link(_) => "link",
            Command::Simulate(_) => "simulate",
            Command::Martingale(_) => "martingale",
            Command::ModuleMc(_) => "module-mc",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Nullvector(f)
            | Command::Link(f)
            | Command::Simulate(f)
            | Command::Martingale(f)
            | Command::ModuleMc(f) => f,
        }
    }
}

/// Shared flags. Every value is optional here; defaults and the config file
/// are applied when resolving.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Key = value file with the same settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Conformal weight as an exact rational "p/q".
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Bulk κ, "p/q" or decimal. Defaults to the bulk of k(Δ).
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// θ-slope κ̂, "p/q" or decimal. Defaults to the slope of k(Δ).
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_hat: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    /// Comma-separated seed points; "re:im" for complex ones.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Comma-separated checkpoint times.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Level cutoff of the module walk.
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// Exclude |M| above this quantile from the averages (counted).
    #[arg(long)]
    pub clip_quantile: Option<f64>,
    /// "stop" or "exclude".
    #[arg(long)]
    pub absorption: Option<String>,
    /// Cutoff |h| below which a point counts as swallowed.
    #[arg(long)]
    pub swallow_eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// "csv" or "json".
    #[arg(long)]
    pub format: Option<String>,
}
