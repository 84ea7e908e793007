use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Voting power in weighted voting games with fixed or random weights.
#[derive(Debug, Parser)]
#[command(name = "wvpower", version, about, propagate_version = true)]
pub struct Cli {
    /// key=value file overriding built-in defaults (samples, seed, format,
    /// threads, grid-start, grid-end, grid-points, tolerance, window).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel kernels.
    #[arg(long, global = true, env = "WVPOWER_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw weight vectors uniformly from the simplex.
    SampleWeights(SampleWeightsArgs),
    /// Expected k-th largest weight, k = 1..n.
    ExpectedWeights(ExpectedWeightsArgs),
    /// Density or distribution function of the k-th largest weight.
    WeightDensity(WeightDensityArgs),
    /// Exact moments of uniform simplex weights.
    Moments(MomentsArgs),
    /// Penrose-Banzhaf and Coleman indices of one game.
    Indices(IndicesArgs),
    /// Exact indices of fixed weights as step functions of the quota.
    FixedCurve(FixedCurveArgs),
    /// Monte Carlo expected ordered Penrose-Banzhaf indices over a quota grid.
    PowerCurve(PowerCurveArgs),
    /// Expected Coleman index over a quota grid.
    ColemanCurve(ColemanCurveArgs),
    /// Discover distinct games reached by random weights and quotas.
    Classes(ClassesArgs),
    /// Piecewise polynomial fit of curves read from a CSV file.
    SplineFit(SplineFitArgs),
    /// Closed-form results for small games and the Coleman characteristic
    /// function.
    Analytic(AnalyticArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Also write an SVG line chart.
    #[arg(long)]
    pub plot: bool,

    /// SVG path; defaults to the output path with an .svg extension, or
    /// `<command>.svg`.
    #[arg(long, value_name = "PATH")]
    pub plot_path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Number of sampled weight vectors [default: 65536].
    #[arg(long)]
    pub samples: Option<u64>,

    /// Random seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// A single quota instead of a grid.
    #[arg(long, conflicts_with_all = ["quotas", "grid_start", "grid_end", "grid_points"])]
    pub quota: Option<f64>,

    /// Explicit comma-separated quotas.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["grid_start", "grid_end", "grid_points"])]
    pub quotas: Option<Vec<f64>>,

    /// First grid quota [default: 0.505].
    #[arg(long)]
    pub grid_start: Option<f64>,

    /// Last grid quota before 1 [default: 0.995].
    #[arg(long)]
    pub grid_end: Option<f64>,

    /// Equispaced grid points between start and end [default: 99].
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Do not append q = 1 to the grid.
    #[arg(long)]
    pub without_one: bool,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Comma-separated weights summing to 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          conflicts_with_all = ["weights_file", "weights_int"])]
    pub weights: Option<Vec<f64>>,

    /// File of weights: every numeric field, in order.
    #[arg(long, value_name = "PATH", conflicts_with = "weights_int")]
    pub weights_file: Option<PathBuf>,

    /// Integer weights for exact comparisons; use with --quota-frac.
    #[arg(long, value_delimiter = ',', requires = "quota_frac")]
    pub weights_int: Option<Vec<u64>>,

    /// Rescale real weights to sum to 1.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct SampleWeightsArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of vectors.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sort each vector in decreasing order.
    #[arg(long)]
    pub ordered: bool,
    /// Emit the Renyi partial sums of each (unordered) vector instead.
    #[arg(long, conflicts_with = "ordered")]
    pub renyi: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExpectedWeightsArgs {
    #[arg(long)]
    pub n: usize,
    /// Add the exact value as a fraction.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WeightDensityArgs {
    #[arg(long)]
    pub n: usize,
    /// Rank; all ranks when absent (adds a rank column).
    #[arg(long)]
    pub k: Option<usize>,
    /// Evaluation points, equispaced on [0, x-max].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub x_max: f64,
    /// Distribution function instead of density.
    #[arg(long)]
    pub cdf: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: usize,
    /// Exponents of a product moment, one per player (missing ones are 0).
    #[arg(long, value_delimiter = ',')]
    pub exponents: Option<Vec<u32>>,
    /// Order of the power-sum moment E(sum W_i^m).
    #[arg(long)]
    pub power_sum: Option<u32>,
    /// Mean and variance of sum W_i^2.
    #[arg(long)]
    pub sum_sq: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kernel {
    Auto,
    Naive,
    Mitm,
}

#[derive(Debug, Args)]
pub struct IndicesArgs {
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, required_unless_present = "quota_frac")]
    pub quota: Option<f64>,
    /// Exact quota as a fraction, e.g. 11/20.
    #[arg(long, conflicts_with = "quota")]
    pub quota_frac: Option<String>,
    #[arg(long, value_enum, default_value_t = Kernel::Auto)]
    pub kernel: Kernel,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalArg {
    Beta,
    Psi,
    Coleman,
}

#[derive(Debug, Args)]
pub struct FixedCurveArgs {
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Ignored; exact weights need no quota here.
    #[arg(long, hide = true)]
    pub quota_frac: Option<String>,
    #[arg(long, value_enum, default_value_t = FunctionalArg::Beta)]
    pub functional: FunctionalArg,
    /// Evaluate on a quota grid (curve schema) instead of listing pieces.
    #[arg(long)]
    pub on_grid: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Beta,
    Psi,
}

#[derive(Debug, Args)]
pub struct PowerCurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = StatisticArg::Beta)]
    pub statistic: StatisticArg,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Report local extrema of each smoothed curve on standard error.
    #[arg(long)]
    pub extrema: bool,
    /// Moving-average window for --extrema [default: 5].
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColemanMethodArg {
    Inversion,
    Normal,
    HoeffdingBound,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct ColemanCurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ColemanMethodArg::Inversion)]
    pub method: ColemanMethodArg,
    /// Absolute tolerance of the inversion integral [default: 1e-9].
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub extrema: bool,
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SplineFitArgs {
    /// Curve CSV with columns quota, series-name, mean.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Fit only this series.
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub max_degree: usize,
    /// Fixed interior breakpoints; automatic selection when absent.
    #[arg(long, value_delimiter = ',')]
    pub breakpoints: Option<Vec<f64>>,
    /// Cost per breakpoint in automatic selection.
    #[arg(long, conflicts_with = "breakpoints")]
    pub penalty: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(subcommand)]
    pub kind: AnalyticKind,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticKind {
    /// Exact expected ordered Penrose-Banzhaf indices for 2 or 3 players.
    Beta {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coefficients of the 3-player expected index polynomials.
    Coefficients {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stationary points of the 3-player expected indices.
    Extrema {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Probabilities of the game classes for 2 or 3 players.
    ClassTable {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Normal-approximation quota over exact quota at Coleman level y.
    ErrorRatio {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Characteristic function of the centred Coleman variable.
    Charfn {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}
