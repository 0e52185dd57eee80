use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;

#[derive(Debug, Parser)]
#[command(name = "causalprior", version, about = "Candidate causal graphs for discrete tabular data: elicit, discover, score, intervene")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a raw CSV against the scheme and write state labels.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = ",")]
        delimiter: char,
    },
    /// Synthesize a cohort matching the published marginals.
    Cohort {
        #[arg(long, default_value_t = 326)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw rows from a network file by ancestral sampling.
    Sample {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ask a language model for a graph.
    Elicit(ElicitArgs),
    /// Correct the latest draft of a session turn by turn; `:done` ends.
    Refine {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Also write the latest draft here as graph JSON.
        #[arg(long)]
        out_graph: Option<PathBuf>,
    },
    /// Learn a graph from data.
    Discover(DiscoverArgs),
    /// BDeu totals for one or more graphs at each ESS.
    Score(ScoreArgs),
    /// BDeu totals side by side for several graphs.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        graphs: Vec<PathBuf>,
        #[command(flatten)]
        scoring: ScoringFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit CPDs for a graph and write the network.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Dirichlet prior equivalent sample size.
        #[arg(long, default_value_t = 1.0)]
        ess: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average treatment effects under do().
    Ate(AteArgs),
    /// Convert graph JSON to DOT.
    ExportDot {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Pairwise,
    Single,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Symmetric,
    Ordered,
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "symmetric")]
    pub mode: ModeArg,
    /// Constraint clause appended to the single prompt; repeatable.
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,
    #[arg(long)]
    pub context: Option<String>,
    /// Answer prompts from a recorded transcript instead of the network.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Completion used for prompts missing from the replay file.
    #[arg(long, requires = "replay")]
    pub fallback: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Session file (exchanges and drafts) for later refinement.
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Exchanges as JSON lines.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Pc,
    Notears,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub max_cond_size: Option<usize>,
    /// g2 or chi2.
    #[arg(long)]
    pub ci_test: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub h_tol: Option<f64>,
    #[arg(long)]
    pub w_threshold: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    /// NOTEARS weight matrix before thresholding, as CSV.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoringFlags {
    #[arg(long, value_delimiter = ',')]
    pub ess: Option<Vec<f64>>,
    /// canonical or paper.
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, required = true)]
    pub graph: Vec<PathBuf>,
    #[command(flatten)]
    pub scoring: ScoringFlags,
    /// Score table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-family report of the first graph at the first ESS, as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AteArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Treatment by mutation table of effects on long survival.
    #[arg(long, conflicts_with_all = ["treatment", "outcome"])]
    pub grid: bool,
    #[arg(long, value_delimiter = ',', requires = "grid")]
    pub treatments: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', requires = "grid")]
    pub mutations: Option<Vec<String>>,
    #[arg(long, requires_all = ["treated", "control", "outcome", "values"])]
    pub treatment: Option<String>,
    #[arg(long)]
    pub treated: Option<String>,
    #[arg(long)]
    pub control: Option<String>,
    #[arg(long)]
    pub outcome: Option<String>,
    /// Value of each outcome state, in state order.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Evidence as VAR=STATE; repeatable.
    #[arg(long)]
    pub given: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
