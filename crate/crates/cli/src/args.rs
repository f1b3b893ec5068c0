//! Flag definitions. Every leaf command's arguments serialize to the flat
//! JSON object that `--echo-config` prints and `--config` reads back; JSON
//! keys are the long flag names.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "pabi",
    version,
    about = "Divergence bounds, mixing times and privacy curves for noisy iterations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rényi divergence bound for a noisy iteration with quadratic moduli.
    Bound(BoundArgs),
    /// Optimal interpolation levels and shifts.
    Shifts(ShiftsArgs),
    /// Langevin mixing times.
    #[command(subcommand)]
    Mixing(MixingCommand),
    /// Noisy SGD privacy accounting.
    #[command(subcommand)]
    Privacy(PrivacyCommand),
    /// Same as `privacy sweep`.
    Sweep(SweepArgs),
    /// Monte Carlo runs of projected noisy iterations.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Subcommand)]
pub enum MixingCommand {
    /// Smallest admissible 1/eta for a weakly smooth potential.
    Theta(ThetaArgs),
    WeaklySmooth(WeaklySmoothArgs),
    Dissipative(DissipativeArgs),
}

#[derive(Debug, Subcommand)]
pub enum PrivacyCommand {
    /// Rényi-DP epsilon of noisy SGD.
    Epsilon(EpsilonArgs),
    /// `ln(2 Tbar + V)` over a stepsize grid and several smoothness exponents.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Final iterates of independent chains.
    Run(RunArgs),
    /// Empirical TV between chains from opposite corners after ceil(D^2/eta) steps.
    ValidateMixing(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output format; scalar commands print a bare number when omitted.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration as JSON on stderr.
    #[arg(long)]
    #[serde(skip)]
    pub echo_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// Per-step moduli and noise through the optimal shifts.
    General,
    /// Constant parameters, exact harmonic or contraction series.
    Exact,
    /// Constant parameters, logarithmic upper estimate of the series.
    Log,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    /// Rényi order (1 gives KL).
    #[arg(long, value_parser = parse_f64)]
    pub alpha: f64,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long = "T", value_parser = parse_count)]
    #[serde(rename = "T")]
    pub horizon: u64,
    /// Noise scale, one value or one per step.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_f64)]
    pub sigma: Vec<f64>,
    /// Contraction factor of the modulus sqrt(c d^2 + h), one value or one per step.
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_f64)]
    pub c: Vec<f64>,
    /// Offset of the modulus, one value or one per step.
    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = parse_f64)]
    pub h: Vec<f64>,
    #[arg(long, value_enum, default_value = "general")]
    pub form: BoundForm,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMethod {
    Closed,
    Oracle,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShiftsArgs {
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long = "T", value_parser = parse_count)]
    #[serde(rename = "T")]
    pub horizon: u64,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_f64)]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_f64)]
    pub c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = parse_f64)]
    pub h: Vec<f64>,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: ShiftMethod,
    /// Oracle restarts.
    #[arg(long, default_value = "16", value_parser = parse_count)]
    pub restarts: u64,
    #[arg(long, default_value = "0", value_parser = parse_count)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThetaArgs {
    #[arg(long, value_parser = parse_f64)]
    pub p: f64,
    #[arg(long = "M", value_parser = parse_f64)]
    #[serde(rename = "M")]
    pub smoothness: f64,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeaklySmoothArgs {
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eta: f64,
    #[arg(long, value_parser = parse_f64)]
    pub p: f64,
    #[arg(long = "M", value_parser = parse_f64)]
    #[serde(rename = "M")]
    pub smoothness: f64,
    /// Target TV distance.
    #[arg(long, value_parser = parse_f64)]
    pub eps: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DissipativeArgs {
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eta: f64,
    #[arg(long, value_parser = parse_f64)]
    pub lambda: f64,
    #[arg(long, value_parser = parse_f64)]
    pub kappa: f64,
    /// Smoothness of the potential.
    #[arg(long, value_parser = parse_f64)]
    pub beta: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eps: f64,
    /// Build the result from the KL bound, a TV conversion and boosting.
    #[arg(long)]
    pub composed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EpsilonArgs {
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    /// Expected batch size.
    #[arg(long, value_parser = parse_f64)]
    pub b: f64,
    #[arg(long = "L", value_parser = parse_f64)]
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[arg(long = "M", value_parser = parse_f64)]
    #[serde(rename = "M")]
    pub smoothness: f64,
    #[arg(long, value_parser = parse_f64)]
    pub p: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eta: f64,
    /// Noise multiplier.
    #[arg(long, value_parser = parse_f64)]
    pub sigma: f64,
    #[arg(long, value_parser = parse_f64)]
    pub alpha: f64,
    #[arg(long = "T", value_parser = parse_count)]
    #[serde(rename = "T")]
    pub horizon: u64,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long = "L", value_parser = parse_f64)]
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[arg(long = "M", value_parser = parse_f64)]
    #[serde(rename = "M")]
    pub smoothness: f64,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    /// Smoothness exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_f64)]
    pub p: Vec<f64>,
    /// `geometric:start,end,count`, `linear:start,end,count`,
    /// `list:v1,v2,...` or `figure` (100 evenly spaced points after 1/n up
    /// to n^(-1/5)).
    #[arg(long)]
    pub eta_grid: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Zero,
    /// L |x|_1.
    Abs,
    /// M/(1+p) sum |x_i|^(1+p).
    Power,
    /// beta/2 |x|^2.
    Quadratic,
    /// Quadratic plus a bounded sinusoidal perturbation.
    Dissipative,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PotentialArgs {
    #[arg(long, value_enum)]
    pub potential: PotentialKind,
    #[arg(long = "L", value_parser = parse_f64)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long = "M", value_parser = parse_f64)]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Box,
    Ball,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value = "1", value_parser = parse_count)]
    pub dim: u64,
    #[arg(long, value_enum, default_value = "box")]
    pub domain: DomainKind,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eta: f64,
    /// Per-step noise standard deviation; sqrt(2 eta) when omitted.
    #[arg(long, value_parser = parse_f64)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[arg(long = "T", value_parser = parse_count)]
    #[serde(rename = "T")]
    pub horizon: u64,
    #[arg(long, value_parser = parse_count)]
    pub chains: u64,
    #[arg(long, default_value = "0", value_parser = parse_count)]
    pub seed: u64,
    /// `low`, `high` (opposite extreme points), `uniform`, or coordinates `x[,y]`.
    #[arg(long, default_value = "low", allow_hyphen_values = true)]
    pub init: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[arg(long = "D", value_parser = parse_f64)]
    #[serde(rename = "D")]
    pub diameter: f64,
    #[arg(long, value_parser = parse_f64)]
    pub eta: f64,
    #[arg(long, value_parser = parse_count)]
    pub chains: u64,
    #[arg(long, default_value = "0", value_parser = parse_count)]
    pub seed: u64,
    /// Histogram bins per dimension.
    #[arg(long, default_value = "20", value_parser = parse_count)]
    pub bins: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

/// Decimal or scientific notation.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_nan() {
        return Err(format!("`{s}` is not a number"));
    }
    Ok(x)
}

/// Non-negative integer, also written in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 18_446_744_073_709_551_616.0 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}
