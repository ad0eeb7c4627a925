use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "nlrd", version, about = "Pathwise experiments for nonlocal reaction-diffusion equations with smoothed white noise")]
pub struct Cli {
    /// Seed of the Wiener path.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Worker threads; 0 uses every available core, 1 runs serially.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Directory for CSV, JSON and manifest outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Model config (TOML). Defaults to the built-in additive model.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Empirical check of the noise hypotheses along a sampled path.
    NoiseCheck(NoiseCheckArgs),
    /// Evaluates the model assumptions and prints the check table.
    Validate(ValidateArgs),
    /// Solves one trajectory.
    Simulate(SimulateArgs),
    /// Gap table between smoothed-noise, deterministic and white solutions.
    Converge(ConvergeArgs),
    /// Dumps an auxiliary stationary process.
    Aux(AuxArgs),
    /// Gap table between auxiliary processes and their white limit.
    AuxLimit(AuxLimitArgs),
    /// Absorbing radius and a direct containment check.
    Absorb(AbsorbArgs),
    /// Samples a pullback attractor.
    Attractor(AttractorArgs),
    /// Hausdorff semidistances between sampled attractors.
    Semidist(SemidistArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::NoiseCheck(_) => "noise-check",
            Command::Validate(_) => "validate",
            Command::Simulate(_) => "simulate",
            Command::Converge(_) => "converge",
            Command::Aux(_) => "aux",
            Command::AuxLimit(_) => "aux-limit",
            Command::Absorb(_) => "absorb",
            Command::Attractor(_) => "attractor",
            Command::Semidist(_) => "semidist",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Ou,
    Mollifier,
    Diffq,
    White,
    None,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Ou,
    Mollifier,
    Diffq,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlavorArg {
    Additive,
    Multiplicative,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Imex,
    Heun,
}

/// Time and space resolution shared by the solver subcommands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Resolution {
    /// Time step; must be a multiple of --dt-grid.
    #[arg(long)]
    pub dt: Option<f64>,

    /// Wiener path grid step.
    #[arg(long)]
    pub dt_grid: Option<f64>,

    /// Number of sine modes (the collocation grid has four times as many points).
    #[arg(long)]
    pub modes: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NoiseCheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: KindArg,

    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    pub deltas: Vec<f64>,

    /// Gaps are measured over |t| <= horizon.
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,

    #[arg(long, default_value_t = 2.5e-4)]
    pub dt_grid: f64,

    /// A gap sequence passes when gap[k+1] <= slack * gap[k].
    #[arg(long, default_value_t = 1.1)]
    pub slack: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    /// Bound on sup |u|_{H1}; enables the smallness rows that need it.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseArg,

    #[arg(long, default_value_t = 0.0625)]
    pub delta: f64,

    /// Overrides the config's epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,

    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,

    #[command(flatten)]
    pub resolution: Resolution,

    #[arg(long, value_enum, default_value = "imex")]
    pub scheme: SchemeArg,

    /// Initial condition amplitude along the first mode.
    #[arg(long, default_value_t = 1.0)]
    pub ic_amplitude: f64,

    /// Keep every k-th step (the last step is always written).
    #[arg(long, default_value_t = 1)]
    pub every: usize,

    /// Output file name inside --out-dir.
    #[arg(long, default_value = "simulate.csv")]
    pub out: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConvergeArgs {
    #[arg(long, value_enum, default_value = "diffq")]
    pub noise: NoiseArg,

    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625,0.03125,0.015625")]
    pub deltas: Vec<f64>,

    /// Paired with --deltas when the lengths match, otherwise the full grid.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub epsilons: Vec<f64>,

    /// Pair deltas and epsilons element-wise instead of taking the grid.
    #[arg(long)]
    pub paired: bool,

    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,

    #[command(flatten)]
    pub resolution: Resolution,

    #[arg(long, default_value_t = 1.0)]
    pub ic_amplitude: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AuxArgs {
    #[arg(long, value_enum, default_value = "white")]
    pub noise: NoiseArg,

    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Defaults to the config's coupling.
    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,

    #[arg(long, default_value_t = -1.0)]
    pub t0: f64,

    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,

    #[arg(long, default_value_t = 2.5e-4)]
    pub dt_grid: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AuxLimitArgs {
    #[arg(long, value_enum, default_value = "diffq")]
    pub noise: NoiseArg,

    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    pub deltas: Vec<f64>,

    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,

    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,

    #[arg(long, default_value_t = 2.5e-4)]
    pub dt_grid: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AbsorbArgs {
    /// A smoothed noise, or white for the white-noise radius and solve.
    #[arg(long, value_enum, default_value = "diffq")]
    pub noise: NoiseArg,

    #[arg(long, default_value_t = 0.0625)]
    pub delta: f64,

    #[arg(long)]
    pub epsilon: Option<f64>,

    /// L2 norm bound of the initial conditions.
    #[arg(long, default_value_t = 10.0)]
    pub ball: f64,

    #[arg(long, default_value_t = 20.0)]
    pub pullback: f64,

    #[arg(long, default_value_t = 16)]
    pub n_ics: usize,

    #[arg(long, default_value_t = 0.05)]
    pub slack: f64,

    #[command(flatten)]
    pub resolution: Resolution,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PullbackArgs {
    /// Increasing pullback times.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub times: Vec<f64>,

    #[arg(long, default_value_t = 32)]
    pub n_ics: usize,

    #[arg(long, default_value_t = 2.0)]
    pub ic_radius: f64,

    /// Largest accepted matched-IC displacement between the last two times.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AttractorArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseArg,

    #[arg(long, default_value_t = 0.0625)]
    pub delta: f64,

    #[arg(long)]
    pub epsilon: Option<f64>,

    #[command(flatten)]
    pub pullback: PullbackArgs,

    #[command(flatten)]
    pub resolution: Resolution,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SemidistArgs {
    #[arg(long, value_enum, default_value = "diffq")]
    pub noise: NoiseArg,

    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625,0.03125,0.015625")]
    pub deltas: Vec<f64>,

    /// Paired with --deltas; defaults to epsilon = delta.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,

    #[command(flatten)]
    pub pullback: PullbackArgs,

    #[command(flatten)]
    pub resolution: Resolution,
}
