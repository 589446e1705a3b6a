use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use spinfreeze::freezing::DEFAULT_THRESHOLD;
use spinfreeze::phase::DEFAULT_DEGENERACY_GAP;
use spinfreeze::trajectory::DEFAULT_MAX_JUMP_PROB;
use spinfreeze::ModelParams;

use crate::{expr, CliError};

fn number(s: &str) -> Result<f64, String> {
    expr::eval(s)
}

/// Angle in radians; `pi` is accepted, so `pi/4` lands exactly on the
/// symmetry line.
fn angle(s: &str) -> Result<f64, String> {
    expr::eval(s)
}

#[derive(Debug, Parser)]
#[command(name = "spinfreeze", version, about = "Driven-dissipative collective spin simulator", args_override_self = true)]
pub struct Cli {
    /// Flat key=value file; keys are long flag names, command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    #[command(flatten)]
    Run(Command),
    /// Re-run a manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Liouvillian spectrum and its large-drive analytic counterpart.
    Spectrum(SpectrumArgs),
    /// Quantum-jump trajectories with freezing verdicts.
    Trajectory(TrajectoryArgs),
    /// Jump-count distribution, analytic and sampled.
    Counting(CountingArgs),
    /// Scaled cumulant generating function and activity versus s.
    Sensemble(SensembleArgs),
    /// Steady-state observables over an (omega, theta) grid.
    PhaseDiagram(PhaseDiagramArgs),
    /// Eigenspace probabilities conditioned on the jump count.
    FreezingMap(FreezingMapArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Trajectory(_) => "trajectory",
            Command::Counting(_) => "counting",
            Command::Sensemble(_) => "sensemble",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::FreezingMap(_) => "freezing-map",
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Command::Spectrum(a) => a.model.size.gamma,
            Command::Trajectory(a) => a.model.size.gamma,
            Command::Counting(a) => a.model.size.gamma,
            Command::Sensemble(a) => a.size.gamma,
            Command::PhaseDiagram(a) => a.size.gamma,
            Command::FreezingMap(a) => a.model.size.gamma,
        }
    }
}

pub const SUBCOMMANDS: &[&str] =
    &["spectrum", "trajectory", "counting", "sensemble", "phase-diagram", "freezing-map", "replay"];

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
#[command(group(ArgGroup::new("size").required(true).args(["j", "n"])))]
pub struct SizeArgs {
    /// Total angular momentum (half-integer).
    #[arg(long = "J", value_parser = number, conflicts_with = "n")]
    pub j: Option<f64>,

    /// Number of spins, N = 2J.
    #[arg(long = "N")]
    pub n: Option<u32>,

    #[arg(long, value_parser = number, default_value = "1")]
    pub gamma: f64,
}

impl SizeArgs {
    pub fn j(&self) -> f64 {
        match (self.j, self.n) {
            (Some(j), _) => j,
            (None, Some(n)) => n as f64 / 2.0,
            (None, None) => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct ModelArgs {
    #[command(flatten)]
    pub size: SizeArgs,

    #[arg(long, value_parser = number, default_value = "1")]
    pub omega: f64,

    /// Squeezing angle in [0, pi/2].
    #[arg(long, value_parser = angle, default_value = "pi/4")]
    pub theta: f64,
}

impl ModelArgs {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.size.j(), self.omega, self.size.gamma, self.theta)?)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Eigenvalues with modulus below this count as stationary [default: 1e-8 Gamma].
    #[arg(long, value_parser = number)]
    pub null_tol: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Initial state: sx:m1,m2 | sx:m1*w1,m2*w2 | sz:-J | uniform-diag.
    #[arg(long)]
    pub initial: String,

    #[arg(long, default_value_t = 1)]
    pub ntraj: usize,

    /// Final time [default: 50 J / Gamma].
    #[arg(long = "t-final", value_parser = number)]
    pub t_final: Option<f64>,

    /// Time step [default: 0.9 of the largest step honouring --max-jump-prob].
    #[arg(long, value_parser = number)]
    pub dt: Option<f64>,

    #[arg(long, value_parser = number, default_value_t = DEFAULT_MAX_JUMP_PROB)]
    pub max_jump_prob: f64,

    /// Approximate number of snapshots per trajectory.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,

    /// Eigenspace population above which a trajectory counts as frozen.
    #[arg(long, value_parser = number, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,

    /// Also write every jump time.
    #[arg(long)]
    pub jumps: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CountingMode {
    Analytic,
    Mc,
    Both,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CountingArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value = "uniform-diag")]
    pub initial: String,

    /// Counting window of the analytic distribution.
    #[arg(long = "T", value_parser = number, default_value = "3000")]
    pub window: f64,

    #[arg(long, value_enum, default_value = "both")]
    pub mode: CountingMode,

    /// Counting window of the sampled histogram.
    #[arg(long = "mc-T", value_parser = number, default_value = "100")]
    pub mc_window: f64,

    #[arg(long, default_value_t = 2000)]
    pub ntraj: usize,

    #[arg(long, value_parser = number)]
    pub dt: Option<f64>,

    #[arg(long, value_parser = number, default_value_t = DEFAULT_MAX_JUMP_PROB)]
    pub max_jump_prob: f64,

    /// Minimum topographic prominence of a reported peak. Modes of large |m|
    /// are broad and low, hence the small default.
    #[arg(long, value_parser = number, default_value = "1e-6")]
    pub prominence: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SensembleArgs {
    #[command(flatten)]
    pub size: SizeArgs,

    #[arg(long, value_parser = number, default_value = "1")]
    pub omega: f64,

    /// Angles as lo:hi:step pieces or single values, comma separated; pi is
    /// accepted.
    #[arg(long, default_value = "0.6:1:0.01")]
    pub theta_grid: String,

    #[arg(long, value_parser = number, default_value = "-1", allow_hyphen_values = true)]
    pub smin: f64,

    #[arg(long, value_parser = number, default_value = "1", allow_hyphen_values = true)]
    pub smax: f64,

    #[arg(long, value_parser = number, default_value = "0.01")]
    pub ds: f64,

    /// Points of the activity grid for the rate function.
    #[arg(long, default_value_t = 201)]
    pub k_points: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    pub size: SizeArgs,

    /// lo:hi:step pieces or single values, comma separated.
    #[arg(long, default_value = "0:2:0.05")]
    pub omega_grid: String,

    /// lo:hi:step pieces or single values, comma separated; pi is accepted.
    #[arg(long, default_value = "0:1.55:0.05")]
    pub theta_grid: String,

    /// State projected onto the steady manifold where the steady state is
    /// not unique [default: sz:-J].
    #[arg(long)]
    pub initial: Option<String>,

    /// Gap below which a point is evolved instead of solved, in units of Gamma.
    #[arg(long, value_parser = number, default_value_t = DEFAULT_DEGENERACY_GAP)]
    pub degeneracy_gap: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct FreezingMapArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value = "uniform-diag")]
    pub initial: String,

    /// Elapsed time [default: 100 J / Gamma].
    #[arg(long, value_parser = number)]
    pub t: Option<f64>,

    /// Jump counts, lo:hi:step.
    #[arg(long, default_value = "0:5000:10")]
    pub n_grid: String,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest file or the directory holding it.
    pub manifest: PathBuf,
}
