use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "mlqc", version, about = "Statistical quality control for ML-embedded systems")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Significance level for p-value decisions.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empirical CDF values and quantiles of one column.
    Ecdf(EcdfArgs),
    /// Control intervals for a performance statistic.
    #[command(subcommand)]
    Interval(IntervalCommand),
    /// Drift between a reference and a current dataset.
    #[command(subcommand)]
    Drift(DriftCommand),
    /// Error-slice discovery.
    #[command(subcommand)]
    Slices(SlicesCommand),
    /// Control limit k for binomial defect counts.
    SpcK(SpcArgs),
    /// Human-review policies and decision rules.
    #[command(subcommand)]
    Policy(PolicyCommand),
    /// Hybrid decision-tree reliability.
    #[command(subcommand)]
    Tree(TreeCommand),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON column type overrides.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub current: PathBuf,
    /// JSON column type overrides, applied to both files.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EcdfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub column: String,
    /// Points at which to evaluate F_e.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub at: Vec<f64>,
    /// Quantile levels in (0, 1].
    #[arg(long, value_delimiter = ',')]
    pub quantile: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum IntervalCommand {
    /// Trim the sorted scores directly.
    Trimmed {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 0.025)]
        trim: f64,
    },
    /// Trim bootstrap replicates of a statistic.
    Bootstrap {
        #[command(flatten)]
        data: DataArgs,
        /// Numeric column; omit when using --prediction and --label.
        #[arg(long, required_unless_present = "prediction")]
        column: Option<String>,
        #[arg(long, value_enum, default_value_t = StatisticArg::Mean)]
        statistic: StatisticArg,
        /// Prediction column for an accuracy interval.
        #[arg(long, requires = "label")]
        prediction: Option<String>,
        #[arg(long, requires = "prediction")]
        label: Option<String>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0.025)]
        trim: f64,
    },
    /// Normal approximation around the sample mean.
    Clt {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Mean,
    Proportion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NumericTest {
    Ks,
    T,
    Mw,
    Wass,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CategoricalMetric {
    Chi2,
    W,
    H,
    Delta,
    Hellinger,
    Jsd,
    Yates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityMetric {
    Delta,
    Hellinger,
    Jsd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TermSet {
    Linear,
    Quadratic,
}

#[derive(Debug, Subcommand)]
pub enum DriftCommand {
    /// Two-sample tests on numeric columns.
    Numeric {
        #[command(flatten)]
        pair: PairArgs,
        /// Columns to test; defaults to every numeric column in both files.
        #[arg(long, value_delimiter = ',')]
        column: Vec<String>,
        #[arg(long, value_enum)]
        test: NumericTest,
        /// Effect-size threshold for --test d.
        #[arg(long, default_value_t = mlqc::drift::DEFAULT_EFFECT_THRESHOLD)]
        threshold: f64,
        /// Permutations for --test wass.
        #[arg(long, default_value_t = 999)]
        permutations: usize,
    },
    /// Distribution shift of categorical columns.
    Categorical {
        #[command(flatten)]
        pair: PairArgs,
        /// Columns to test; defaults to every categorical column in both files.
        #[arg(long, value_delimiter = ',')]
        column: Vec<String>,
        #[arg(long, value_enum)]
        metric: CategoricalMetric,
        /// Category counted as a success for --metric h and yates.
        #[arg(long)]
        positive: Option<String>,
        /// Effect or distance threshold; hellinger and jsd report no decision without it.
        #[arg(long)]
        threshold: Option<f64>,
        /// Logarithm base for jsd.
        #[arg(long, default_value_t = 2.0)]
        base: f64,
    },
    /// Support drift of given slices with Holm correction.
    Slices {
        #[command(flatten)]
        pair: PairArgs,
        /// JSON list of slices, each a list of predicates.
        #[arg(long)]
        slices: PathBuf,
    },
    /// Shift in density-slice types.
    Density {
        #[command(flatten)]
        pair: PairArgs,
        /// JSON density-slice set; otherwise an equal-width grid over --features.
        #[arg(long, required_unless_present = "features")]
        slices: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        #[arg(long, default_value_t = 4)]
        bins: usize,
        /// Fractional support below which a populated cell is very sparse.
        #[arg(long, default_value_t = 0.1)]
        sparsity: f64,
        #[arg(long, value_enum, default_value_t = DensityMetric::Delta)]
        metric: DensityMetric,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Out-of-sample decay of polynomial feature relations.
    Relations {
        #[command(flatten)]
        pair: PairArgs,
        /// Fit this target only; otherwise search every numeric triple.
        #[arg(long, requires = "regressors")]
        target: Option<String>,
        /// Two regressor columns, comma separated.
        #[arg(long, value_delimiter = ',')]
        regressors: Vec<String>,
        #[arg(long, value_enum, default_value_t = TermSet::Quadratic)]
        terms: TermSet,
        /// Reference R^2 a searched relation must reach.
        #[arg(long, default_value_t = 0.9)]
        min_r2: f64,
        /// Keep at most this many searched relations.
        #[arg(long, default_value_t = 5)]
        top: usize,
        #[arg(long, default_value_t = mlqc::slicing::DEFAULT_DEGRADATION_THRESHOLD)]
        threshold: f64,
        /// Bootstrap replicates for a degradation band; none when omitted.
        #[arg(long)]
        band_replicates: Option<usize>,
    },
    /// Sliding-window re-testing of one numeric column.
    Sequence {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        column: String,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        step: usize,
        #[arg(long, value_enum)]
        test: NumericTest,
        #[arg(long, default_value_t = 999)]
        permutations: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum SlicesCommand {
    /// Slices whose error rate exceeds the overall rate.
    Mine {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        prediction: String,
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 2)]
        max_predicates: usize,
        #[arg(long, default_value_t = 0.01)]
        min_support: f64,
        #[arg(long, default_value_t = 1.5)]
        lift: f64,
    },
}

#[derive(Debug, Args)]
pub struct SpcArgs {
    /// Batch size.
    #[arg(long)]
    pub n: u64,
    /// Defect probability.
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Cases per period.
    #[arg(long, default_value_t = 1000.0)]
    pub volume: f64,
    #[arg(long, default_value_t = 1.0)]
    pub unit_cost: f64,
}

#[derive(Debug, Subcommand)]
pub enum PolicyCommand {
    /// Best review fractions under a budget.
    Optimize {
        /// JSON list of components.
        #[arg(long)]
        components: PathBuf,
        #[arg(long)]
        budget: f64,
        #[command(flatten)]
        cost: CostArgs,
    },
    /// Accuracy and cost of given review fractions.
    Evaluate {
        #[arg(long)]
        components: PathBuf,
        #[arg(long, value_delimiter = ',')]
        review: Vec<f64>,
        #[command(flatten)]
        cost: CostArgs,
    },
    /// Minmax and Bayes actions for a loss matrix.
    Decide {
        #[arg(long)]
        loss: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathPolicyArg {
    Worst,
    Random,
    Fixed,
}

#[derive(Debug, Subcommand)]
pub enum TreeCommand {
    /// Worst path and path probabilities.
    Analyze {
        #[arg(long)]
        tree: PathBuf,
        /// Node ids of a root-to-leaf path to evaluate.
        #[arg(long, value_delimiter = ',')]
        path: Vec<usize>,
    },
    /// Monte Carlo check of a path policy.
    Simulate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = PathPolicyArg::Worst)]
        policy: PathPolicyArg,
        #[arg(long, value_delimiter = ',', required_if_eq("policy", "fixed"))]
        path: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0.025)]
        trim: f64,
    },
}
