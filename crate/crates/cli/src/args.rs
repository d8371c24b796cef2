//! Command-line arguments. Vector-valued options take a JSON array file or
//! an inline comma-separated list.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "oscsync", version, about = "Synchronization analysis and simulation of coupled phase oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one model and print its frequency-synchronization verdict.
    Simulate(SimulateArgs),
    /// Evaluate the analytic synchronization conditions.
    Check(CheckArgs),
    /// Solve for a synchronized equilibrium or classify a given one.
    Equilibrium(EquilibriumArgs),
    /// Monte Carlo comparison of the Kuramoto critical-coupling bounds.
    Fig7(Fig7Args),
    /// Saddle-node sweep of the two-oscillator difference flow.
    Bifurcation2(BifurcationArgs),
    /// Planar vehicles steered by coupled headings.
    Vehicles(VehicleArgs),
    /// Power network with generator and load buses.
    Powergrid(PowergridArgs),
    /// Phase balancing on a circulant graph.
    Balance(BalanceArgs),
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    /// RK4 step size.
    #[arg(long)]
    pub step: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Record every k-th step.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Frequency spread below which the network counts as synchronized.
    #[arg(long)]
    pub sync_tol: Option<f64>,
    /// Trailing window for the synchronization test.
    #[arg(long)]
    pub sync_window: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `oscillator`, `kuramoto` or a model JSON file.
    #[arg(long)]
    pub model: String,
    /// Kuramoto coupling strength.
    #[arg(long = "K", visible_alias = "coupling", allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Initial phases; all zero when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<String>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Directory for trajectory.csv and verdict.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: String,
    /// Cohesiveness level for the necessary conditions.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub gamma: f64,
    /// Cohesiveness level at which to report the convergence rate.
    #[arg(long)]
    pub rate_gamma: Option<f64>,
    /// Also run the Kuramoto checks at this coupling.
    #[arg(long)]
    pub coupling: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: String,
    /// Classify these phases instead of solving.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Fixed-point damping in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML or JSON experiment configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
}

#[derive(Debug, Args)]
pub struct Fig7Args {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Oscillator counts: `2,10,50`, `lo:hi:log[:count]` or `lo:hi:lin:count`.
    #[arg(long = "n")]
    pub n_grid: Option<String>,
    /// `uniform:LOW:HIGH`, `bipolar:C` or `explicit:W1,W2,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub distribution: Option<String>,
    /// Also search the coupling by simulation for n up to this value.
    #[arg(long)]
    pub empirical_max_n: Option<usize>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct BifurcationArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Coupling ratios κ.
    #[arg(long, allow_hyphen_values = true)]
    pub kappas: Option<String>,
    /// Initial differences δ(0).
    #[arg(long, allow_hyphen_values = true)]
    pub delta0: Option<String>,
}

#[derive(Debug, Args)]
pub struct VehicleArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Heading coupling gain; +1 synchronizes, −1 balances.
    #[arg(long, allow_hyphen_values = true)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct PowergridArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Model JSON of kind `power`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<String>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Graph JSON; the unit-weight complete graph on `--n` nodes when absent.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Start near the splay state with this uniform noise half-width.
    #[arg(long)]
    pub near_splay: Option<f64>,
    /// Final order parameter below which a run counts as balanced.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub svg: bool,
}
