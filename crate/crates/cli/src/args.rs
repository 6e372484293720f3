use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mkflow",
    version,
    about = "Markov kernel dilations and stochastic flows"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "MKFLOW_THREADS")]
    pub threads: Option<usize>,
    /// Leave the timestamp out of the report so reruns are byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average a product system over its environment.
    Reduce(SystemInput),
    /// Deterministic dilation on states × functions.
    Dilate(DilateArgs),
    /// Dilation by a bijection of states × (states × functions).
    DilateInvertible(DilateInvertibleArgs),
    /// Iterate a system, or run repeated interactions from a state.
    Iterate(IterateArgs),
    /// Homomorphism defect sup L(f²) − (Lf)² over |f| ≤ 1.
    Defect(KernelInput),
    /// deterministic-invertible, deterministic-noninvertible or random.
    Classify(KernelInput),
    /// Invertibility as a Markov kernel.
    Invertible(KernelInput),
    /// Euler–Maruyama trajectory, optionally with a check.
    SdeFlow(SdeArgs),
    /// Monte Carlo estimate of P_t h(x).
    SdeSemigroup(SdeArgs),
    /// Run one SDE consistency check (requires --check).
    SdeCheck(SdeArgs),
}

#[derive(Debug, Args)]
pub struct KernelInput {
    /// Kernel as JSON (or CSV by extension), or a report containing one.
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SystemInput {
    /// Product system as JSON, or a report containing one.
    #[arg(long)]
    pub system: PathBuf,
}

#[derive(Debug, Args)]
pub struct DilateArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    /// Largest environment allowed.
    #[arg(long, default_value_t = 1_000_000)]
    pub env_cap: u128,
}

#[derive(Debug, Args)]
pub struct DilateInvertibleArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    /// 0-based index of the distinguished state.
    #[arg(long, default_value_t = 0)]
    pub x0: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub env_cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainMode {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    /// Kernel to dilate first.
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Emit the m-fold iterate of the system.
    #[arg(long, conflicts_with_all = ["x", "n"], required_unless_present = "n")]
    pub m: Option<usize>,
    /// 0-based starting state for repeated interactions.
    #[arg(long, requires = "n")]
    pub x: Option<usize>,
    /// Number of interaction steps.
    #[arg(long, requires = "x")]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = ChainMode::Exact)]
    pub mode: ChainMode,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub env_cap: u128,
    /// Largest number of environment tuples enumerated in exact mode.
    #[arg(long, default_value_t = 10_000_000)]
    pub exact_cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SdeCheckKind {
    Cocycle,
    ShiftedIntegral,
    Semigroup,
    Chapman,
    Generator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegrandKind {
    One,
    Path,
    Elementary,
}

#[derive(Debug, Args)]
pub struct SdeArgs {
    /// Registry model: ou, linear, gbm-1d, double-well-1d.
    #[arg(long)]
    pub model: String,
    /// Model parameters as a JSON object, or `@path` to read them from a file.
    #[arg(long, default_value = "{}")]
    pub params: String,
    /// Starting point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Test function: x[:i], x2[:i], cos:θ, sin:θ, box:lo;hi.
    #[arg(long, default_value = "x")]
    pub observable: String,
    #[arg(long, value_enum)]
    pub check: Option<SdeCheckKind>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Split time for the cocycle and shifted-integral checks (default t/2);
    /// inner time s for the Chapman–Kolmogorov check (default t).
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 1_000)]
    pub outer: usize,
    #[arg(long, default_value_t = 10)]
    pub inner: usize,
    /// Decreasing horizons for the generator check.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05])]
    pub horizons: Vec<f64>,
    #[arg(long, value_enum, default_value_t = IntegrandKind::Elementary)]
    pub integrand: IntegrandKind,
    /// Drop non-finite paths instead of aborting.
    #[arg(long)]
    pub allow_explosions: bool,
}
