//! Command-line syntax. Flags that are given override the JSON config.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use fep_core::exact::{A1Variant, Domain};
use fep_core::experiments::Start;

#[derive(Debug, Parser)]
#[command(name = "fep", version, about = "Facilitated exclusion: simulation, couplings and exact analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config; a manifest from an earlier run also works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default `$FEP_OUT_ROOT/<command>` or `fep-out/<command>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariant suite on small systems.
    Verify(VerifyArgs),
    /// Exhaustive analysis through generator matrices.
    #[command(subcommand)]
    Exact(ExactCmd),
    /// Single trajectories.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Hitting times of the ergodic component.
    Hit(HitArgs),
    /// Scaling studies over a grid of sizes.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Plot-ready CSV and SVG from a results directory.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Monte Carlo replicates for the sampled checks.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Generic system flags, mapped onto the family's own field names.
#[derive(Debug, Args)]
pub struct SystemArgs {
    /// fep-seg, fep-circle, sep, obep, zrp-seg, zrp-circle, zrp-constant-rate
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExactCmd {
    /// Worst-case total variation curve and `T(ε)`.
    Tv(TvArgs),
    /// Kernel and closed-form stationary laws.
    Stationary(DomainArgs),
    /// Spectral gap of a reversible generator.
    Gap(DomainArgs),
    /// First Fourier mode of the symmetric circle process.
    Eigen(EigenArgs),
    /// Window marginals of the uniform law on the ergodic component.
    Equivalence(EquivalenceArgs),
    /// Rare-set hitting for the constant-rate zero-range process.
    AldousBrown(AldousBrownArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TvArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub system: SystemArgs,
    #[arg(long, value_enum)]
    pub domain: Option<DomainFlag>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of curve points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Last curve time (default `3 T(ε)`).
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DomainArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub system: SystemArgs,
    #[arg(long, value_enum)]
    pub domain: Option<DomainFlag>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainFlag {
    Full,
    Ergodic,
}

impl From<DomainFlag> for Domain {
    fn from(d: DomainFlag) -> Self {
        match d {
            DomainFlag::Full => Domain::Full,
            DomainFlag::Ergodic => Domain::Ergodic,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<A1Variant>,
    /// Track the label offset of particles crossing site 0.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lifted: Option<bool>,
}

fn parse_variant(s: &str) -> Result<A1Variant, String> {
    match s {
        "hole-after" => Ok(A1Variant::HoleAfter),
        "particle-after" => Ok(A1Variant::ParticleAfter),
        _ => Err(format!("expected hole-after or particle-after, got {s}")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EquivalenceArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub max_ell: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct AldousBrownArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid end in units of `π(E^c) / capacity`.
    #[arg(long)]
    pub span: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Segment FEP as a lattice path.
    Path(PathArgs),
    /// Symmetric circle FEP.
    Circle(CircleArgs),
    /// Open-boundary exclusion.
    Obep(ObepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// minus, plus, vee, wedge, h-sample or a 0/1 string
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CircleArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// block or a 0/1 string
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ObepArgs {
    /// Initial 0/1 string.
    #[arg(long)]
    pub z0: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct HitArgs {
    #[arg(long, value_parser = parse_start)]
    pub start: Option<Start>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_start(s: &str) -> Result<Start, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("expected minus, plus, h-sample or circle-block, got {s}"))
}

#[derive(Debug, Subcommand)]
pub enum SweepCmd {
    /// Symmetric coupling time over `N² log(N-k)`.
    SfepRatio(RatioArgs),
    /// Slope of log hitting time against `N-k`.
    AfepSlope(SlopeArgs),
    /// Circle hitting time over `N² log N`.
    CircleRatio(RatioArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    /// Density; `k = ⌈ρN⌉`.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SlopeArgs {
    #[arg(long)]
    pub p: Option<f64>,
    /// Values of `N-k`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<usize>>,
    /// `N = 2(N-k) + m`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Directory holding a manifest and results.
    pub results: PathBuf,
}
