use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use proscript::aggregation::EdgePolicy;
use proscript::metrics::{Convention, EdgeRepMode, EventMatching, MetricSelection, NodeMatch};

/// Build, validate and score partially ordered scripts.
#[derive(Debug, Parser)]
#[command(name = "proscript", version)]
pub struct Cli {
    /// Worker threads for corpus-level work.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a JSONL corpus: structure and annotator agreement.
    Validate(ValidateArgs),
    /// Score predictions against gold scripts.
    Eval(EvalArgs),
    /// Turn a pairwise score matrix into a DOT script.
    Aggregate(AggregateArgs),
    /// Score a seeded random baseline against a gold corpus.
    Baseline(BaselineArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
    /// Convert between JSONL corpora and DOT files.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Standard,
    PaperLiteral,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Standard => Convention::Standard,
            ConventionArg::PaperLiteral => Convention::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Edges,
    Ged,
    Both,
}

impl From<MetricArg> for MetricSelection {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Edges => MetricSelection::Edges,
            MetricArg::Ged => MetricSelection::Ged,
            MetricArg::Both => MetricSelection::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatchingArg {
    ById,
    ByLabel,
    ByLabelStrict,
}

impl From<MatchingArg> for EventMatching {
    fn from(m: MatchingArg) -> Self {
        match m {
            MatchingArg::ById => EventMatching::ById,
            MatchingArg::ByLabel => EventMatching::ByLabel,
            MatchingArg::ByLabelStrict => EventMatching::ByLabelStrict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NodeMatchArg {
    Exact,
    Normalized,
}

impl From<NodeMatchArg> for NodeMatch {
    fn from(m: NodeMatchArg) -> Self {
        match m {
            NodeMatchArg::Exact => NodeMatch::Exact,
            NodeMatchArg::Normalized => NodeMatch::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgeRepArg {
    Off,
    EndpointRep,
}

impl From<EdgeRepArg> for EdgeRepMode {
    fn from(m: EdgeRepArg) -> Self {
        match m {
            EdgeRepArg::Off => EdgeRepMode::Off,
            EdgeRepArg::EndpointRep => EdgeRepMode::EndpointRep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    ArgmaxPair,
    Threshold,
}

impl From<PolicyArg> for EdgePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::ArgmaxPair => EdgePolicy::ArgmaxPair,
            PolicyArg::Threshold => EdgePolicy::Threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselinePolicyArg {
    RandomChain,
    RandomDag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvertFormat {
    Jsonl,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Rocstories,
    Descript,
    Virtualhome,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Dev,
    Test,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub corpus: PathBuf,
    /// Minimum annotator F1 (0-100) to keep a record.
    #[arg(long, default_value_t = 65.0)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Standard)]
    pub convention: ConventionArg,
}

/// Options shared by every command that computes edit distances.
#[derive(Debug, Args)]
pub struct GedArgs {
    /// Largest combined node count solved exactly.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    pub ged_node_limit: u32,
    /// Beam width used above the node limit instead of failing.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub approx_beam: Option<u32>,
    #[arg(long, value_enum, default_value_t = NodeMatchArg::Normalized)]
    pub node_match: NodeMatchArg,
    #[arg(long, value_enum, default_value_t = EdgeRepArg::Off)]
    pub edge_rep: EdgeRepArg,
    /// Compare graphs with their virtual root and scenario leaf.
    #[arg(long)]
    pub include_virtual: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of `<id>.dot` files or a JSONL corpus.
    #[arg(long)]
    pub pred: PathBuf,
    /// Gold corpus; repeated ids give several golds for one prediction.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Both)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::Standard)]
    pub convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = MatchingArg::ByLabel)]
    pub matching: MatchingArg,
    #[command(flatten)]
    pub ged: GedArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// JSON object `{"events": [...], "p": [[...], ...]}`.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::ArgmaxPair)]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Scenario used when the scores file carries none.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value_t = BaselinePolicyArg::RandomChain)]
    pub policy: BaselinePolicyArg,
    /// Second-parent probability for `random-dag`.
    #[arg(long, default_value_t = 0.3)]
    pub p_branch: f64,
    #[arg(long, env = "PROSCRIPT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MetricArg::Edges)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::Standard)]
    pub convention: ConventionArg,
    #[command(flatten)]
    pub ged: GedArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = StatsFormat::Json)]
    pub format: StatsFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: ConvertFormat,
    #[arg(long, value_enum)]
    pub to: ConvertFormat,
    /// JSONL file, or a DOT file or directory of DOT files.
    #[arg(long, short)]
    pub input: PathBuf,
    /// JSONL file, or the directory receiving `<id>.dot` files.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Scenario for DOT input lacking a scenario comment.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, value_enum, default_value_t = SourceArg::Other)]
    pub source: SourceArg,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Recover from sloppy DOT instead of rejecting it.
    #[arg(long)]
    pub lenient: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
