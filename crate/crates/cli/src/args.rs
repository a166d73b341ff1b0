use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use mtsg::learners::{LearnerKind, RfParams, SvrParams};
use mtsg::mtr::{FilterRule, Method};

fn method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: mtsg::Error| e.to_string())
}

fn learner(s: &str) -> Result<LearnerKind, String> {
    s.parse().map_err(|e: mtsg::Error| e.to_string())
}

fn filter(s: &str) -> Result<FilterRule, String> {
    s.parse().map_err(|e: mtsg::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "mtsg", version, about = "Multi-target regression toolkit")]
pub struct Cli {
    /// Log more detail (-v info, -vv debug)
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kennard–Stone train/test split of a dataset
    Split(SplitArgs),
    /// Train a multi-target model and save it as a bundle directory
    Train(TrainArgs),
    /// Predict targets for a CSV file with a saved bundle
    Predict(PredictArgs),
    /// Evaluate a saved bundle and write report files
    Evaluate(EvaluateArgs),
    /// Run the method grid on a public benchmark dataset
    Benchmark(BenchmarkArgs),
    /// Render comparison tables from a results directory
    Compare(CompareArgs),
    /// Run an experiment described by a TOML config file
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV file with a header row
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Target column names, comma separated
    #[arg(long, value_delimiter = ',', required = true, value_name = "NAMES")]
    pub targets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fraction of rows assigned to training
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub fraction: f64,
    /// Output split CSV (columns index,role)
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LearnerArgs {
    /// Trees per random forest
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    /// Features tried per forest split [default: ceil(f/3)]
    #[arg(long)]
    pub mtry: Option<usize>,
    /// Forest nodes with at most this many rows become leaves
    #[arg(long, default_value_t = 5)]
    pub min_node_size: usize,
    /// SVR box constraint
    #[arg(long, default_value_t = 1.0)]
    pub svr_c: f64,
    /// SVR epsilon-tube half width
    #[arg(long, default_value_t = 0.1)]
    pub svr_epsilon: f64,
    /// RBF kernel width [default: 1/f]
    #[arg(long)]
    pub svr_gamma: Option<f64>,
}

impl LearnerArgs {
    pub fn rf(&self) -> RfParams {
        RfParams {
            n_trees: self.trees,
            mtry: self.mtry,
            min_node_size: self.min_node_size,
            seed: 0,
        }
    }

    pub fn svr(&self) -> SvrParams {
        SvrParams {
            c: self.svr_c,
            epsilon: self.svr_epsilon,
            gamma: self.svr_gamma,
            ..SvrParams::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// Number of ERC chains (capped at d!)
    #[arg(long, default_value_t = 10)]
    pub chains: usize,
    /// Number of stacked DRS layers
    #[arg(long, default_value_t = 5)]
    pub layers: usize,
    /// Children per MOTC tree node
    #[arg(long, default_value_t = 2)]
    pub max_children: usize,
    /// Depth of MOTC trees
    #[arg(long, default_value_t = 2)]
    pub max_depth: usize,
    /// Relevance filter: mean-threshold or keep-all
    #[arg(long, default_value = "mean-threshold", value_parser = filter)]
    pub filter: FilterRule,
    /// Trees in the relevance-filter forest
    #[arg(long, default_value_t = 500)]
    pub filter_trees: usize,
    /// Use out-of-fold Level-0 predictions instead of in-sample ones
    #[arg(long)]
    pub oof: bool,
    /// Folds for --oof
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Split CSV from `mtsg split`; computed with --fraction when absent
    #[arg(long, value_name = "CSV")]
    pub split: Option<PathBuf>,
    /// Training fraction when no split file is given
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub fraction: f64,
    /// Method: st, sst, erc, motc, drs, mtas or mtsg
    #[arg(long, value_parser = method)]
    pub method: Method,
    /// Base learner (Level-1 learner for mtas/mtsg): rf, svr_l or svr_r
    #[arg(long, default_value = "rf", value_parser = learner)]
    pub learner: LearnerKind,
    /// Level-0 pool for mtas/mtsg, comma separated
    #[arg(long, value_delimiter = ',', default_value = "rf,svr_l,svr_r", value_parser = learner)]
    pub pool: Vec<LearnerKind>,
    #[command(flatten)]
    pub learner_params: LearnerArgs,
    #[command(flatten)]
    pub method_params: MethodArgs,
    /// Master seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output bundle directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Bundle directory from `mtsg train`
    #[arg(long, value_name = "DIR")]
    pub model: PathBuf,
    /// CSV file containing the bundle's feature columns
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Output CSV of predictions
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Bundle directory from `mtsg train`
    #[arg(long, value_name = "DIR")]
    pub model: PathBuf,
    /// CSV file with the bundle's feature and target columns
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Split CSV; only its test rows are evaluated when given
    #[arg(long, value_name = "CSV")]
    pub split: Option<PathBuf>,
    /// Output directory for report.csv and report.toml
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Suite name: atp1d, atp7d, edm, sf1, sf2, jura, enb, slump, andro or scpf
    #[arg(long)]
    pub suite: String,
    /// Local copy of the suite's CSV file
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Target columns [default: the suite's last d columns]
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub targets: Option<Vec<String>>,
    /// Training fraction
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub fraction: f64,
    #[command(flatten)]
    pub learner_params: LearnerArgs,
    #[command(flatten)]
    pub method_params: MethodArgs,
    /// Master seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output results directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Results directory written by `run` or `benchmark`
    #[arg(long, value_name = "DIR")]
    pub records: PathBuf,
    /// Output directory [default: the records directory]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (TOML)
    #[arg(long, value_name = "TOML")]
    pub config: PathBuf,
    /// Override the configured output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override the configured master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the configured training fraction
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Force out-of-fold Level-0 predictions
    #[arg(long)]
    pub oof: bool,
}
