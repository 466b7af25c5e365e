use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cmc", version, about = "Coupled Markov chain credit rating model", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the transition matrix from a rating panel
    EstimateP(EstimatePArgs),
    /// Estimate Q and the tendency law by maximum likelihood
    Estimate(EstimateArgs),
    /// Simulate rating scenarios from estimated parameters
    Simulate(SimulateArgs),
    /// Sample the feasible set of tendency laws
    SampleFeasible(SampleFeasibleArgs),
    /// Generate a synthetic rating panel
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Pso,
    Ea,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pso => "pso",
            Method::Ea => "ea",
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file with defaults for any long flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EstimatePArgs {
    #[arg(long)]
    pub panel: PathBuf,
    /// Number of non-default classes (default: highest rating in the panel minus one)
    #[arg(long)]
    pub classes: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 40)]
    pub k_directions: usize,
    /// Points per sampling round (default: the initial population size)
    #[arg(long)]
    pub l_samples: Option<usize>,
    /// Random linear functionals used to find vertices
    #[arg(long, default_value_t = 50)]
    pub functionals: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub panel: PathBuf,
    /// Transition matrix CSV (default: estimated from the panel)
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub classes: Option<usize>,
    /// Number of sectors (default: highest sector in the panel)
    #[arg(long)]
    pub sectors: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Pso)]
    pub method: Method,
    #[arg(long, default_value_t = 150)]
    pub iters: usize,
    #[arg(long, default_value_t = 200)]
    pub swarm_size: usize,
    #[arg(long, default_value_t = 0.5)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.5)]
    pub c2: f64,
    /// Swarm stops once the variance of particle values falls below this
    #[arg(long, default_value_t = 1e-6)]
    pub var_threshold: f64,
    #[arg(long, default_value_t = 100)]
    pub max_bounces: usize,
    #[arg(long, default_value_t = 30)]
    pub elite: usize,
    #[arg(long, default_value_t = 50)]
    pub crossover: usize,
    #[arg(long, default_value_t = 100)]
    pub mutants: usize,
    #[arg(long, default_value_t = 50)]
    pub random: usize,
    #[arg(long, default_value_t = 750)]
    pub initial_population: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Independent runs for the stability report
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Result JSON written by `estimate`
    #[arg(long)]
    pub params: PathBuf,
    /// Panel whose latest rating per company is the initial state
    #[arg(long)]
    pub panel: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub periods: usize,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SampleFeasibleArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub sectors: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub companies: usize,
    /// Observed periods per company
    #[arg(long, default_value_t = 11)]
    pub periods: usize,
    #[command(flatten)]
    pub common: Common,
}
