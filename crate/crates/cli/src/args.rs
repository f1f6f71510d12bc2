use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cloudmap::dynamics::SweepParameter;
use cloudmap::failure_sim::LossMode;
use cloudmap::replication::LossMethod;

#[derive(Debug, Parser)]
#[command(name = "cloudmap", version, about = "Owner/user storage map analysis and replica data-loss models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file. Without it the document goes to stdout, or to
    /// `$CLOUDMAP_OUT_DIR/<command>.<ext>` when that variable is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Iterate the two-user map and print every post-transient state.
    Iterate(IterateArgs),
    /// Newton search for fixed points plus linear-stability diagnostics.
    FixedPoints(FixedPointArgs),
    /// Lyapunov spectrum by QR re-orthonormalisation.
    Lyapunov(LyapunovArgs),
    /// Bifurcation scan over one parameter.
    Bifurcate(BifurcateArgs),
    /// Owner and user allocations at selected stages.
    StorageReport(StorageArgs),
    /// Cyclic replica placement for n nodes.
    Placement(PlacementArgs),
    /// Data-loss probability for one (n, p).
    LossExact(LossExactArgs),
    /// Data-loss probability over several node counts.
    LossCurve(LossCurveArgs),
    /// Monte Carlo data-loss estimate.
    LossMc(LossMcArgs),
    /// Brute-force count of non-fatal subsets in one group.
    VerifyCoefficients(EmptyArgs),
    /// Check published numeric claims against computed values.
    DiscrepancyReport(DiscrepancyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Iterate(_) => "iterate",
            Command::FixedPoints(_) => "fixed-points",
            Command::Lyapunov(_) => "lyapunov",
            Command::Bifurcate(_) => "bifurcate",
            Command::StorageReport(_) => "storage-report",
            Command::Placement(_) => "placement",
            Command::LossExact(_) => "loss-exact",
            Command::LossCurve(_) => "loss-curve",
            Command::LossMc(_) => "loss-mc",
            Command::VerifyCoefficients(_) => "verify-coefficients",
            Command::DiscrepancyReport(_) => "discrepancy-report",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::FixedPoints(_)
            | Command::Lyapunov(_)
            | Command::LossExact(_)
            | Command::LossMc(_)
            | Command::VerifyCoefficients(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub xi1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub xi2: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StateArgs {
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub v0: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub x1: f64,
    #[arg(long, default_value_t = -0.01, allow_negative_numbers = true)]
    pub x2: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct IterateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub steps: usize,
    /// Leading states to drop from the output.
    #[arg(long, default_value_t = 0)]
    pub transient: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FixedPointArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Extra Newton seeds as `v,x1,x2`; the origin and the published
    /// non-trivial point are always tried.
    #[arg(long = "seed-point", value_parser = parse_triple, allow_negative_numbers = true)]
    pub seed_points: Vec<[f64; 3]>,
}

#[derive(Debug, Args, Serialize)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 100_000)]
    pub iters: usize,
    /// Largest exponents within this band of zero count as zero.
    #[arg(long, default_value_t = 0.01)]
    pub zero_band: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BifurcateArgs {
    #[arg(long, value_parser = parse_sweep_parameter)]
    pub param: SweepParameter,
    #[arg(long, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Values of the fixed parameters; the swept one may be omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub xi1: Option<f64>,
    #[arg(long)]
    pub xi2: Option<f64>,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 1_000)]
    pub transient: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 100_000)]
    pub lyap_iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct StorageArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Initial owner allocation `α v⁽⁰⁾` in bytes.
    #[arg(long, default_value_t = 1e9)]
    pub owner_bytes: f64,
    /// Initial per-user allocation `ξ_i x_i⁽⁰⁾` in bytes.
    #[arg(long, default_value_t = 1e8)]
    pub user_bytes: f64,
    /// Bytes per model unit.
    #[arg(long, default_value_t = 1e9)]
    pub unit_scale: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,10,20,200,365")]
    pub stages: Vec<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlacementArgs {
    #[arg(long)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct LossExactArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "exact-bigint", value_parser = parse_loss_method)]
    pub method: LossMethod,
    /// Include the per-failure-count breakdown.
    #[arg(long)]
    pub terms: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct LossCurveArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,100,140,200")]
    pub nodes: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LossMcArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "group", value_parser = parse_loss_mode)]
    pub mode: LossMode,
}

#[derive(Debug, Args, Serialize)]
pub struct EmptyArgs {}

#[derive(Debug, Args, Serialize)]
pub struct DiscrepancyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub lyap_iters: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected `v,x1,x2`, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
    }
    Ok(out)
}

fn parse_sweep_parameter(s: &str) -> Result<SweepParameter, String> {
    s.parse().map_err(|e: cloudmap::Error| e.to_string())
}

fn parse_loss_method(s: &str) -> Result<LossMethod, String> {
    s.parse().map_err(|e: cloudmap::Error| e.to_string())
}

fn parse_loss_mode(s: &str) -> Result<LossMode, String> {
    s.parse().map_err(|e: cloudmap::Error| e.to_string())
}
