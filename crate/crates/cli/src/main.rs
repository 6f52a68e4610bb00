//! `finegraph` command-line tool.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use finegraph_core::kernels::{EdgeCounting, KernelKind};
use finegraph_core::projection::BfsBracket;
use finegraph_core::GeneratorFamily;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "finegraph", version, about = "Graph kernel simulation, projection and network modelling")]
struct Cli {
    /// TOML file with [gen], [machine], [pagerank], [bfs], [measure],
    /// [system] and [net] sections. Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print failures as a JSON object on stderr.
    #[arg(long, global = true)]
    error_json: bool,
    /// Host worker threads.
    #[arg(long, global = true, env = "FINEGRAPH_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph (binary unless the extension is .txt, .el or .edges).
    Gen(GenArgs),
    /// Simulate one kernel on the lane machine.
    Run(RunArgs),
    /// Available edge parallelism per step.
    Profile(ProfileArgs),
    /// Fit the per-lane work-rate curve to samples.
    Fit(FitArgs),
    /// Measure workload quantities over several scales and extrapolate them.
    Characterize(CharacterizeArgs),
    /// Project runtime and GTEPS over node counts and scales.
    Project(ProjectArgs),
    /// Simulate interconnect congestion.
    Netsim(NetsimArgs),
    /// Merge run, projection and network outputs into summary tables.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Option<GeneratorFamily>,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub er_avg_degree: Option<f64>,
    #[arg(long)]
    pub rmat_avg_degree: Option<f64>,
    #[arg(long)]
    pub ff_p_burn: Option<f64>,
    /// Keep only vertices with at least one edge.
    #[arg(long)]
    pub connected_only: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub kernel: KernelKind,
    #[arg(long)]
    pub graph: PathBuf,
    /// MachineConfig TOML; replaces the [machine] section of --config.
    #[arg(long)]
    pub machine: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<u32>,
    #[arg(long)]
    pub lanes_per_node: Option<u32>,
    /// Total lanes, packed into nodes of up to 2048.
    #[arg(long, conflicts_with_all = ["nodes", "lanes_per_node"])]
    pub lanes: Option<u32>,
    /// Split vertices with more neighbors than this.
    #[arg(long)]
    pub split_size: Option<u64>,
    #[arg(long)]
    pub source: Option<u32>,
    #[arg(long)]
    pub switch_fraction: Option<f64>,
    #[arg(long)]
    pub counting: Option<EdgeCounting>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Family label for work-rate samples; read from the graph's manifest
    /// when omitted.
    #[arg(long)]
    pub family: Option<String>,
    /// Compare against the sequential reference and fail on mismatch.
    #[arg(long)]
    pub verify: bool,
    /// Leave distance and score vectors out of the result JSON.
    #[arg(long)]
    pub no_vectors: bool,
    /// Result JSON.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Per-phase CSV.
    #[arg(long)]
    pub phases: Option<PathBuf>,
    /// Work-rate sample CSV to append a row to.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// push_bfs (any BFS kernel), push_pr or dd_pr.
    #[arg(long)]
    pub algorithm: KernelKind,
    #[arg(long)]
    pub source: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Use only samples of this kernel.
    #[arg(long)]
    pub algorithm: Option<KernelKind>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CharacterizeArgs {
    #[arg(long)]
    pub family: GeneratorFamily,
    #[arg(long)]
    pub kernel: KernelKind,
    /// Comma-separated scales, e.g. 8,9,10,11.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Graphs per scale, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seeds: u32,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the raw measurements as JSON.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
}

#[derive(Args)]
pub struct ProjectArgs {
    /// Output of `fit` (or a bare WorkRateModel JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output of `characterize`.
    #[arg(long)]
    pub workload: PathBuf,
    /// Workload of the original algorithm, for effective GTEPS.
    #[arg(long)]
    pub original: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384])]
    pub nodes: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [28, 29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39, 40])]
    pub scales: Vec<u32>,
    #[arg(long)]
    pub bracket: Option<BfsBracket>,
    #[arg(long)]
    pub split_size: Option<u64>,
    #[arg(long)]
    pub lanes_per_node: Option<u32>,
    #[arg(long)]
    pub dram_roundtrip_ns: Option<f64>,
    #[arg(long)]
    pub dram_bytes_per_node: Option<f64>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct NetsimArgs {
    /// Topology file of `R u v` and `N n r1 r2` lines; a synthetic
    /// topology is built when omitted.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub radix: Option<u32>,
    #[arg(long, default_value_t = 64)]
    pub routers: u32,
    #[arg(long, default_value_t = 256)]
    pub compute_nodes: u32,
    #[arg(long, default_value_t = 1)]
    pub topology_seed: u64,
    #[arg(long)]
    pub duration_ns: Option<u32>,
    /// `max` or a fraction of node bandwidth.
    #[arg(long)]
    pub injection: Option<String>,
    #[arg(long)]
    pub link_bandwidth: Option<f64>,
    #[arg(long)]
    pub node_bandwidth: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hop_cap: Option<u32>,
    /// Run until every injected message is delivered.
    #[arg(long)]
    pub drain: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Result JSON files of `run`.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    /// Projection CSV files.
    #[arg(long, num_args = 1..)]
    pub projections: Vec<PathBuf>,
    /// netstats.json files of `netsim`.
    #[arg(long, num_args = 1..)]
    pub netstats: Vec<PathBuf>,
    /// Markdown output; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// A command finished but one of its checks failed.
#[derive(Debug)]
pub struct InvariantViolation(pub String);

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

/// `(kind, exit code)` of a failure.
fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    if e.downcast_ref::<InvariantViolation>().is_some() {
        return ("invariant", 6);
    }
    match e.downcast_ref::<finegraph_core::Error>() {
        Some(ce) => {
            let code = match ce {
                finegraph_core::Error::Parameter(_)
                | finegraph_core::Error::Capacity(_)
                | finegraph_core::Error::Toml(_) => 3,
                finegraph_core::Error::Format(_)
                | finegraph_core::Error::Io(_)
                | finegraph_core::Error::Json(_)
                | finegraph_core::Error::Csv(_) => 4,
                finegraph_core::Error::Simulation { .. }
                | finegraph_core::Error::Fit(_)
                | finegraph_core::Error::InsufficientData(_)
                | finegraph_core::Error::Topology(_) => 5,
            };
            (ce.kind(), code)
        }
        None => ("other", 1),
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| finegraph_core::Error::Parameter(format!("thread pool: {e}")))?;
    }
    let file = config::FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Gen(a) => commands::gen(a, &file),
        Command::Run(a) => commands::run(a, &file),
        Command::Profile(a) => commands::profile(a, &file),
        Command::Fit(a) => commands::fit(a),
        Command::Characterize(a) => commands::characterize(a, &file),
        Command::Project(a) => commands::project(a, &file),
        Command::Netsim(a) => commands::netsim(a, &file),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = classify(&e);
            if cli.error_json {
                let doc = serde_json::json!({
                    "error": { "kind": kind, "message": format!("{e:#}"), "exit_code": code }
                });
                eprintln!("{doc}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let p: anyhow::Error = finegraph_core::Error::Parameter("x".into()).into();
        assert_eq!(classify(&p), ("parameter", 3));
        let f: anyhow::Error = finegraph_core::Error::Format("x".into()).into();
        assert_eq!(classify(&f), ("format", 4));
        let i: anyhow::Error = InvariantViolation("x".into()).into();
        assert_eq!(classify(&i), ("invariant", 6));
        let c = anyhow::Error::from(finegraph_core::Error::Fit("x".into())).context("fitting");
        assert_eq!(classify(&c), ("fit", 5));
    }
}
