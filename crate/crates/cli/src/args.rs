use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tauber", version, about = "Exponential Tauberian equivalences, checked numerically")]
pub struct Cli {
    /// Read defaults from a `key = value` file; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the admission conditions and print the derived quantities.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
    /// Laplace-method predictions of ln f on a grid.
    #[command(args_override_self = true)]
    Predict(GridRunArgs),
    /// Evaluate the transform on a grid and check the asymptotic law.
    #[command(args_override_self = true)]
    Verify(GridRunArgs),
    /// Recover (a, b) from (d, exponent), or from a fitted sweep.
    #[command(args_override_self = true)]
    Invert(InvertArgs),
    /// Map a classical statement onto (a, b, c) and check its coefficient.
    #[command(args_override_self = true)]
    Classical(ValidateArgs),
    /// Evaluate the transform on a grid without checks.
    #[command(args_override_self = true)]
    Sweep(GridRunArgs),
    /// Estimate a growth index from (x, U(x)) samples.
    #[command(name = "ck-index", args_override_self = true)]
    CkIndex(CkArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalKind {
    Kohlbecker,
    #[value(name = "debruijn", alias = "de-bruijn")]
    DeBruijn,
    Kasahara,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub offset: Option<f64>,

    #[arg(long, value_enum)]
    pub classical: Option<ClassicalKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Classical coefficient B.
    #[arg(long = "B", allow_negative_numbers = true)]
    pub big_b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,

    /// Two-column (location, mass) measure file used as P.
    #[arg(long, value_name = "PATH")]
    pub measure: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long = "psi-min", default_value_t = 10.0)]
    pub psi_min: f64,
    #[arg(long = "psi-max", default_value_t = 1000.0)]
    pub psi_max: f64,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Quadrature tolerance on each ln f.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the structured report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Also write the sample table as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// What to print on stdout when no report path is given.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GridRunArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct InvertArgs {
    /// Transform-side coefficient; with --e and --c inverts in closed form.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Transform-side exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub e: Option<f64>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CkArgs {
    /// Whitespace-separated (x, U(x)) rows.
    #[arg(long, value_name = "PATH")]
    pub samples: PathBuf,
    /// Rows hold (ln x, ln U(x)) instead.
    #[arg(long = "log-input")]
    pub log_input: bool,
    /// Candidate index for the class-M check.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long = "epsilon", default_values_t = vec![0.5])]
    pub epsilons: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
