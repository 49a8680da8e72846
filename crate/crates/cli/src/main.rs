//! `smoothprior` command line: denoise data matrices on a graph, or run
//! experiment specs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smoothprior::bernoulli::{bernoulli_denoise, dropout_tau, no_trust_denoise, BernoulliConfig, SparseMode};
use smoothprior::experiments::{run_experiment, select_columns, ExperimentSpec, RunOptions};
use smoothprior::gaussian::{denoise_gaussian, estimate_tau};
use smoothprior::graph::{build_grid_graph, build_knn_graph};
use smoothprior::io::{read_edge_list, read_matrix, write_matrix, Matrix, MatrixFormat};
use smoothprior::uniform::{ccp_denoise, projected_gradient_denoise, CcpOptions, ProjectedGradientOptions};
use smoothprior::{par, DenoiseResult, Graph, VertexSet};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("SMOOTHPRIOR_BUILD_TARGET"),
    ", ",
    env!("SMOOTHPRIOR_BUILD_PROFILE"),
    ", ",
    env!("SMOOTHPRIOR_BUILD_FEATURES"),
    ")"
);

#[derive(Parser)]
#[command(name = "smoothprior", version = VERSION, about = "Graph-signal denoising under a spectral smoothness prior")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise every selected column of a matrix file.
    Denoise(DenoiseArgs),
    /// Run an experiment spec and write its tables.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Gaussian,
    Uniform,
    Bernoulli,
    NoTrust,
    Interpolate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Ccp,
    Pg,
}

#[derive(Args)]
struct ThreadArgs {
    /// Worker threads (default: all cores).
    #[arg(long, env = "SMOOTHPRIOR_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct DenoiseArgs {
    method: Method,
    /// `grid HxW`, `knn K` or `edge-list FILE`. Images default to their own grid.
    #[arg(long, num_args = 2, value_names = ["KIND", "VALUE"])]
    graph: Option<Vec<String>>,
    /// Point coordinates for `knn` (one point per row); defaults to the input rows.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    input: PathBuf,
    /// `a..b`, `a..=b`, `a` or `all`.
    #[arg(long)]
    columns: Option<String>,
    #[arg(long, conflicts_with = "estimate_tau")]
    tau: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Dropout probability; sets τ through κ.
    #[arg(long, conflicts_with = "tau")]
    p: Option<f64>,
    #[arg(long, default_value = "l1")]
    mode: String,
    /// `zeros` or a mask file whose nonzero entries mark suspect vertices.
    #[arg(long)]
    zeta: Option<String>,
    /// Estimate τ per column by the method of moments.
    #[arg(long)]
    estimate_tau: bool,
    #[arg(long, value_enum, default_value = "ccp")]
    solver: Solver,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; delimited text goes to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    threads: ThreadArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Write zero runtimes so repeated runs produce identical files.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    threads: ThreadArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<smoothprior::Error> for Failure {
    fn from(e: smoothprior::Error) -> Self {
        Self { code: if e.is_numerical() { 3 } else { 2 }, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Denoise(args) => set_threads(&args.threads).and_then(|_| cmd_denoise(&args)),
        Command::Experiment(args) => set_threads(&args.threads).and_then(|_| cmd_experiment(&args)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn set_threads(args: &ThreadArgs) -> CliResult<()> {
    let Some(n) = args.threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot start {n} threads: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("built without the parallel feature; ignoring --threads {n}");
    Ok(())
}

fn build_graph(args: &DenoiseArgs, input: &Matrix, format: &MatrixFormat) -> CliResult<Graph> {
    let Some(spec) = &args.graph else {
        return match format {
            MatrixFormat::Pgm { height, width, .. } => Ok(build_grid_graph(*height, *width)?),
            _ => Err(Failure::usage("--graph is required for delimited input")),
        };
    };
    let (kind, value) = (spec[0].as_str(), spec[1].as_str());
    match kind {
        "grid" => {
            let (h, w) = value
                .split_once(['x', 'X'])
                .and_then(|(h, w)| Some((h.trim().parse::<usize>().ok()?, w.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| Failure::usage(format!("grid size `{value}` is not HxW")))?;
            Ok(build_grid_graph(h, w)?)
        }
        "knn" => {
            let k: usize = value.parse().map_err(|_| Failure::usage(format!("knn needs an integer K, got `{value}`")))?;
            let points = match &args.points {
                Some(path) => read_matrix(path)?.0,
                None => input.clone(),
            };
            Ok(build_knn_graph(points.as_slice(), points.cols(), k)?)
        }
        "edge-list" => Ok(read_edge_list(value, Some(input.rows()))?),
        other => Err(Failure::usage(format!("unknown graph kind `{other}` (expected grid, knn or edge-list)"))),
    }
}

/// One suspect set per selected column.
fn read_zeta(arg: Option<&str>, input: &Matrix, cols: &[usize]) -> CliResult<Vec<VertexSet>> {
    match arg {
        None | Some("zeros") => Ok(cols.iter().map(|&c| VertexSet::zeros_of(&input.column(c))).collect()),
        Some(path) => {
            let (mask, _) = read_matrix(Path::new(path))?;
            if mask.rows() != input.rows() {
                return Err(Failure::usage(format!(
                    "{path}: mask has {} rows, input has {}",
                    mask.rows(),
                    input.rows()
                )));
            }
            let set = |c: usize| VertexSet::from_mask(&mask.column(c).iter().map(|&v| v != 0.0).collect::<Vec<_>>());
            if mask.cols() == 1 {
                Ok(vec![set(0); cols.len()])
            } else if mask.cols() == input.cols() {
                Ok(cols.iter().map(|&c| set(c)).collect())
            } else {
                Err(Failure::usage(format!(
                    "{path}: mask needs 1 or {} columns, found {}",
                    input.cols(),
                    mask.cols()
                )))
            }
        }
    }
}

fn dropout_strength(args: &DenoiseArgs) -> CliResult<f64> {
    match (args.tau, args.p) {
        (Some(t), _) => Ok(t),
        (None, Some(p)) => Ok(dropout_tau(p, args.kappa.unwrap_or(1.0))?),
        (None, None) => Err(Failure::usage("this method needs --tau or --p")),
    }
}

fn cmd_denoise(args: &DenoiseArgs) -> CliResult<()> {
    let start = Instant::now();
    if args.estimate_tau && args.method != Method::Gaussian {
        return Err(Failure::usage("--estimate-tau only applies to the gaussian method"));
    }
    let (input, format) = read_matrix(&args.input)?;
    let cols = select_columns(args.columns.as_deref(), input.cols())?;
    let graph = build_graph(args, &input, &format)?;
    if graph.n() != input.rows() {
        return Err(Failure::usage(format!(
            "graph has {} vertices but {} has {} rows",
            graph.n(),
            args.input.display(),
            input.rows()
        )));
    }
    log::debug!("graph with {} vertices and {} edges", graph.n(), graph.m());
    let mode: SparseMode = args.mode.parse()?;
    let kappa = args.kappa.unwrap_or(1.0);

    let mut estimated: Option<Vec<f64>> = None;
    let results: Vec<smoothprior::Result<DenoiseResult>> = match args.method {
        Method::Gaussian => {
            let taus: Vec<f64> = match args.tau {
                Some(t) => vec![t; cols.len()],
                None => {
                    let taus = par::map_range(cols.len(), |i| estimate_tau(&input.column(cols[i]), &graph))
                        .into_iter()
                        .collect::<smoothprior::Result<Vec<f64>>>()?;
                    estimated = Some(taus.clone());
                    taus
                }
            };
            par::map_range(cols.len(), |i| denoise_gaussian(&input.column(cols[i]), &graph, taus[i]))
        }
        Method::Uniform => par::map_range(cols.len(), |i| {
            let g = input.column(cols[i]);
            let outcome = match args.solver {
                Solver::Ccp => ccp_denoise(&g, &graph, &CcpOptions { kappa, seed: args.seed, ..Default::default() }),
                Solver::Pg => projected_gradient_denoise(&g, &graph, &ProjectedGradientOptions { kappa, ..Default::default() }),
            };
            outcome.map(|o| o.result)
        }),
        Method::Bernoulli | Method::Interpolate => {
            let zetas = read_zeta(args.zeta.as_deref(), &input, &cols)?;
            let tau = if args.method == Method::Interpolate { 0.0 } else { dropout_strength(args)? };
            par::map_range(cols.len(), |i| {
                let cfg = BernoulliConfig::with_tau(zetas[i].clone(), tau, mode)?;
                bernoulli_denoise(&input.column(cols[i]), &graph, &cfg)
            })
        }
        Method::NoTrust => {
            let tau = dropout_strength(args)?;
            par::map_range(cols.len(), |i| no_trust_denoise(&input.column(cols[i]), &graph, tau, mode))
        }
    };
    let results = results.into_iter().collect::<smoothprior::Result<Vec<_>>>()?;

    let columns: Vec<Vec<f64>> = results.iter().map(|r| r.signal.clone()).collect();
    let matrix = Matrix::from_columns(&columns)?;
    let out_format = match &format {
        MatrixFormat::Delimited { delimiter, header } => MatrixFormat::Delimited {
            delimiter: *delimiter,
            header: header.as_ref().map(|h| cols.iter().map(|&c| h[c].clone()).collect()),
        },
        other => other.clone(),
    };
    match &args.output {
        Some(path) => write_matrix(path, &matrix, &out_format)?,
        None => match &out_format {
            MatrixFormat::Delimited { delimiter, header } => {
                print!("{}", smoothprior::io::format_delimited(&matrix, *delimiter, header.as_deref()))
            }
            MatrixFormat::Pgm { .. } => return Err(Failure::usage("image output needs --output")),
        },
    }

    let iterations: usize = results.iter().map(|r| r.iterations).sum();
    let unconverged = results.iter().filter(|r| !r.converged).count();
    let mut summary = format!("{}: {} column(s), {} vertices", method_name(args.method), cols.len(), graph.n());
    if let Some(taus) = estimated {
        let list: Vec<String> = taus.iter().map(|t| format!("{t:.6e}")).collect();
        summary.push_str(&format!(", tau_hat [{}]", list.join(", ")));
    }
    summary.push_str(&format!(", {iterations} iterations"));
    if unconverged > 0 {
        summary.push_str(&format!(", {unconverged} not converged"));
    }
    summary.push_str(&format!(", {:.3}s", start.elapsed().as_secs_f64()));
    eprintln!("{summary}");
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Gaussian => "gaussian",
        Method::Uniform => "uniform",
        Method::Bernoulli => "bernoulli",
        Method::NoTrust => "no-trust",
        Method::Interpolate => "interpolate",
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let start = Instant::now();
    let spec = ExperimentSpec::from_file(&args.spec)?;
    let output = run_experiment(&spec, &RunOptions { seed: args.seed, record_timing: !args.no_timing })?;
    output.write_dir(&args.out)?;
    let errors = output.table.rows.iter().filter(|r| r.metric == "error").count();
    eprintln!(
        "{}: {} rows ({} errors), {} trace file(s) in {}, {:.3}s",
        spec.name,
        output.table.rows.len(),
        errors,
        output.traces.len(),
        args.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
