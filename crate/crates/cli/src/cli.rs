use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rankmanova", version, about = "Rank-based nonparametric MANOVA with bootstrap inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test hypotheses on a delimited data file.
    Test(TestArgs),
    /// Type-I error table of a simulation scenario.
    Simulate(SimulateArgs),
    /// Power curve over shifts of the last group.
    Power(PowerArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineArg {
    Wild,
    Classical,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnginesArg {
    Wild,
    Classical,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MultiplierArg {
    #[default]
    Rademacher,
    Normal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjustmentArg {
    Auto,
    Closed,
    Holm,
    Bonferroni,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReadingArg {
    /// Listed group scales are variances.
    Variance,
    /// Listed group scales are standard deviations.
    Sd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionArg {
    Normal,
    Lognormal,
    Ordinal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceArg {
    S1,
    S2,
}

/// Shared bootstrap settings.
#[derive(Args, Debug, Clone)]
pub struct BootstrapArgs {
    #[arg(long, value_enum, default_value = "wild")]
    pub engine: EngineArg,
    /// Bootstrap replicates.
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 999)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Wild bootstrap multiplier distribution.
    #[arg(long, value_enum, default_value = "rademacher")]
    pub multipliers: MultiplierArg,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    /// Comma- or tab-delimited file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// One or two categorical columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub factors: Vec<String>,
    /// Numeric outcome columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub outcomes: Vec<String>,
    /// one-way, A, B, AB or file:<path>; comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hypothesis: Vec<String>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// components, pairs or hierarchical:<components-first|pairs-first>.
    #[arg(long)]
    pub posthoc: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub adjustment: AdjustmentArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Report the eigenvalues of Sigma^{1/2} T Sigma^{1/2} per hypothesis.
    #[arg(long)]
    pub diagnostics: bool,
}

/// Settings common to the simulation subcommands.
#[derive(Args, Debug, Clone)]
pub struct StudyArgs {
    /// Monte-Carlo runs per cell.
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Bootstrap replicates per run.
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 500)]
    pub b: usize,
    /// Number of outcome components.
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "wild")]
    pub engine: EnginesArg,
    #[arg(long, value_enum, default_value = "rademacher")]
    pub multipliers: MultiplierArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// table1-{normal|lognormal}-{S1|S2}, table2-<s1>-<s2> or table3-ordinal-{S1|S2}.
    #[arg(long)]
    pub scenario: String,
    /// Sample-size increments added to every group.
    #[arg(long = "m-grid", value_delimiter = ',', default_value = "0,10,30,50")]
    pub m_grid: Vec<usize>,
    #[arg(long = "sigma-reading", value_enum, default_value = "variance")]
    pub sigma_reading: ReadingArg,
    #[command(flatten)]
    pub study: StudyArgs,
}

#[derive(Args, Debug)]
pub struct PowerArgs {
    #[arg(long, value_enum, default_value = "normal")]
    pub distribution: DistributionArg,
    #[arg(long, value_enum, default_value = "s1")]
    pub covariance: CovarianceArg,
    /// Group sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "20,10")]
    pub sizes: Vec<usize>,
    /// Shifts of the last group.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2,3")]
    pub deltas: Vec<f64>,
    #[command(flatten)]
    pub study: StudyArgs,
}
