use std::path::Path;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;

use super::clusters::{generate_clusters, ClusterData, ClusterParams};
use super::metrics::{median, pearson_correlation, relative_error};
use super::noise::{add_noise, NoiseSpec};
use super::spec::{
    Aggregate, DropoutStrength, ExperimentSpec, GraphSource, MethodCall, Metric, SignalKind, TauChoice, ZetaChoice,
};
use crate::baselines::{band_filter, local_average, magic_filter, nuclear_norm_denoise, GridShape, Keep};
use crate::bernoulli::{bernoulli_denoise, no_trust_denoise, BernoulliConfig};
use crate::gaussian::{denoise_gaussian, estimate_tau, estimate_tau_multi};
use crate::graph::{build_grid_graph, build_knn_graph};
use crate::io::{format_f64, read_edge_list, read_matrix};
use crate::rng::{derive_seed, label, stream};
use crate::spectral::{eigendecompose, sample_prior_matrix_free, SpectralBasis};
use crate::uniform::{ccp_denoise, projected_gradient_denoise, uniform_loss, LossTrace};
use crate::{par, Error, Graph, Result, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides the spec's seed.
    pub seed: Option<u64>,
    /// When false, every runtime and trace timestamp is written as zero so
    /// that output files depend only on the spec and seed.
    pub record_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: None, record_timing: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: String,
    pub param_json: String,
    pub noise_kind: String,
    pub noise_level: f64,
    pub metric: String,
    pub value: f64,
    pub runtime_s: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentTable {
    pub rows: Vec<TableRow>,
}

pub const TABLE_HEADER: [&str; 8] = ["method", "param_json", "noise_kind", "noise_level", "metric", "value", "runtime_s", "seed"];
pub const TRACE_HEADER: [&str; 4] = ["method", "iteration", "loss", "elapsed_s"];

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

impl ExperimentTable {
    pub fn to_csv_string(&self) -> String {
        csv_string(
            &TABLE_HEADER,
            self.rows.iter().map(|r| {
                vec![
                    r.method.clone(),
                    r.param_json.clone(),
                    r.noise_kind.clone(),
                    format_f64(r.noise_level),
                    r.metric.clone(),
                    format_f64(r.value),
                    format_f64(r.runtime_s),
                    r.seed.to_string(),
                ]
            }),
        )
    }

    /// Rows of one method and metric.
    pub fn select<'a>(&'a self, method: &'a str, metric: &'a str) -> impl Iterator<Item = &'a TableRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method && r.metric == metric)
    }
}

/// Loss curve of one iterative cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    /// File stem: method, grid point, noise level and signal indices.
    pub name: String,
    pub method: String,
    pub trace: LossTrace,
}

impl TraceTable {
    pub fn to_csv_string(&self) -> String {
        csv_string(
            &TRACE_HEADER,
            self.trace.losses.iter().zip(&self.trace.elapsed_s).enumerate().map(|(i, (l, t))| {
                vec![self.method.clone(), i.to_string(), format_f64(*l), format_f64(*t)]
            }),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub table: ExperimentTable,
    pub traces: Vec<TraceTable>,
}

impl ExperimentOutput {
    /// Writes `table.csv` and `traces/<name>.csv` under `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let table = dir.join("table.csv");
        std::fs::write(&table, self.table.to_csv_string()).map_err(|e| Error::io(&table, e))?;
        if !self.traces.is_empty() {
            let tdir = dir.join("traces");
            std::fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
            for t in &self.traces {
                let path = tdir.join(format!("{}.csv", t.name));
                std::fs::write(&path, t.to_csv_string()).map_err(|e| Error::io(&path, e))?;
            }
        }
        Ok(())
    }
}

/// Everything shared by the cells of one experiment.
pub struct Workspace {
    pub graph: Graph,
    pub grid: Option<GridShape>,
    pub truths: Vec<Vec<f64>>,
    /// `noisy[level][signal]`.
    pub noisy: Vec<Vec<Vec<f64>>>,
    pub noise_seeds: Vec<Vec<u64>>,
    basis: Option<std::result::Result<SpectralBasis, String>>,
    pooled_tau: Vec<Option<std::result::Result<f64, String>>>,
}

fn build_graph(spec: &ExperimentSpec, seed: u64, signals: usize) -> Result<(Graph, Option<GridShape>, Option<ClusterData>)> {
    Ok(match &spec.graph {
        GraphSource::Grid { height, width } => {
            (build_grid_graph(*height, *width)?, Some(GridShape::new(*height, *width)?), None)
        }
        GraphSource::Knn { file, k } => {
            let (m, _) = read_matrix(file)?;
            (build_knn_graph(m.as_slice(), m.cols(), *k)?, None, None)
        }
        GraphSource::Clusters { clusters, per_cluster, spread, separation, k } => {
            let data = generate_clusters(&ClusterParams {
                clusters: *clusters,
                per_cluster: *per_cluster,
                spread: *spread,
                separation: *separation,
                signals,
                seed: derive_seed(seed, &[label("clusters")]),
                ..Default::default()
            })?;
            (build_knn_graph(&data.points, data.dim, *k)?, None, Some(data))
        }
        GraphSource::RandomKnn { points, dim, k } => {
            let mut rng = stream(seed, &[label("random-points")]);
            let pts: Vec<f64> = (0..points * dim).map(|_| rng.random::<f64>()).collect();
            (build_knn_graph(&pts, *dim, *k)?, None, None)
        }
        GraphSource::EdgeList { file } => (read_edge_list(file, None)?, None, None),
    })
}

fn parse_columns(range: Option<&str>, total: usize) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::InvalidArgument(format!("column selection `{s}` is not `a..b`, `a..=b`, `a` or `all`"));
    let Some(s) = range.map(str::trim) else { return Ok((0..total).collect()) };
    let cols: Vec<usize> = if s == "all" {
        (0..total).collect()
    } else if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad(s))?, b.trim().parse().map_err(|_| bad(s))?);
        (a..=b).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        let a: usize = if a.trim().is_empty() { 0 } else { a.trim().parse().map_err(|_| bad(s))? };
        let b: usize = if b.trim().is_empty() { total } else { b.trim().parse().map_err(|_| bad(s))? };
        (a..b).collect()
    } else {
        vec![s.parse().map_err(|_| bad(s))?]
    };
    if let Some(&c) = cols.iter().find(|&&c| c >= total) {
        return Err(Error::InvalidArgument(format!("column {c} out of range: the file has {total} columns")));
    }
    if cols.is_empty() {
        return Err(Error::InvalidArgument(format!("column selection `{s}` is empty")));
    }
    Ok(cols)
}

/// Column range syntax shared with the command line.
pub fn select_columns(range: Option<&str>, total: usize) -> Result<Vec<usize>> {
    parse_columns(range, total)
}

fn signal_count(kind: &SignalKind) -> usize {
    match kind {
        SignalKind::Prior { count, .. } | SignalKind::ClusterLow { count } | SignalKind::ClusterHigh { count } => *count,
        SignalKind::File { .. } => 0,
    }
}

impl Workspace {
    pub fn build(spec: &ExperimentSpec, seed: u64) -> Result<Self> {
        let (graph, grid, clusters) = build_graph(spec, seed, signal_count(&spec.signal.kind))?;
        let n = graph.n();
        let raw: Vec<Vec<f64>> = match &spec.signal.kind {
            SignalKind::Prior { kappa, count, mean } => par::map_range(*count, |s| {
                let mut rng = stream(seed, &[label("signal"), s as u64]);
                sample_prior_matrix_free(&graph, *kappa, mean * (n as f64).sqrt(), &mut rng)
            })
            .into_iter()
            .collect::<Result<_>>()?,
            SignalKind::File { path, columns } => {
                let (m, _) = read_matrix(path)?;
                if m.rows() != n {
                    return Err(Error::InvalidArgument(format!(
                        "{} has {} rows but the graph has {n} vertices",
                        path.display(),
                        m.rows()
                    )));
                }
                parse_columns(columns.as_deref(), m.cols())?.into_iter().map(|c| m.column(c)).collect()
            }
            SignalKind::ClusterLow { .. } | SignalKind::ClusterHigh { .. } => {
                let data = clusters.ok_or_else(|| {
                    Error::InvalidArgument("cluster signals need a `clusters` graph".into())
                })?;
                if matches!(spec.signal.kind, SignalKind::ClusterLow { .. }) {
                    data.low
                } else {
                    data.high
                }
            }
        };
        let src = &spec.signal;
        let truths: Vec<Vec<f64>> = raw
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|v| {
                        let y = src.scale * v + src.offset;
                        src.clamp_min.map_or(y, |c| y.max(c))
                    })
                    .collect()
            })
            .collect();

        let levels = &spec.noise.levels;
        let noise_seeds: Vec<Vec<u64>> = (0..levels.len())
            .map(|l| (0..truths.len()).map(|s| derive_seed(seed, &[label("noise"), l as u64, s as u64])).collect())
            .collect();
        let noisy = levels
            .iter()
            .enumerate()
            .map(|(l, &level)| {
                truths
                    .iter()
                    .enumerate()
                    .map(|(s, f)| add_noise(f, &NoiseSpec::new(spec.noise.kind_at(level), noise_seeds[l][s])))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let calls = || spec.methods.iter().flat_map(|m| m.points.iter().map(|p| &p.call));
        let basis = calls()
            .any(|c| matches!(c, MethodCall::BandLow { .. } | MethodCall::BandHigh { .. }))
            .then(|| eigendecompose(&graph).map_err(|e| e.to_string()));
        let pooled = calls().any(|c| matches!(c, MethodCall::GaussianMap { tau: TauChoice::EstimatePooled }));
        let pooled_tau = noisy
            .iter()
            .map(|signals| pooled.then(|| estimate_tau_multi(signals, &graph).map_err(|e| e.to_string())))
            .collect();
        Ok(Self { graph, grid, truths, noisy, noise_seeds, basis, pooled_tau })
    }
}

/// Output of one method on one signal.
pub struct Estimate {
    pub signal: Vec<f64>,
    pub iterations: usize,
    pub trace: Option<LossTrace>,
}

impl Estimate {
    fn plain(signal: Vec<f64>) -> Self {
        Self { signal, iterations: 0, trace: None }
    }
}

pub fn run_call(call: &MethodCall, ws: &Workspace, level: usize, level_value: f64, g: &[f64]) -> Result<Estimate> {
    let graph = &ws.graph;
    let basis = || -> Result<&SpectralBasis> {
        match &ws.basis {
            Some(Ok(b)) => Ok(b),
            Some(Err(e)) => Err(Error::NumericalFailure(e.clone())),
            None => Err(Error::InvalidArgument("no eigenbasis prepared".into())),
        }
    };
    Ok(match call {
        MethodCall::Noisy => Estimate::plain(g.to_vec()),
        MethodCall::GaussianMap { tau } => {
            let tau = match tau {
                TauChoice::Fixed(t) => *t,
                TauChoice::Estimate => estimate_tau(g, graph)?,
                TauChoice::EstimatePooled => match &ws.pooled_tau[level] {
                    Some(Ok(t)) => *t,
                    Some(Err(e)) => return Err(Error::NumericalFailure(e.clone())),
                    None => return Err(Error::InvalidArgument("no pooled estimate prepared".into())),
                },
            };
            let r = denoise_gaussian(g, graph, tau)?;
            Estimate { signal: r.signal, iterations: r.iterations, trace: None }
        }
        MethodCall::LocalAverage { t } => Estimate::plain(local_average(g, graph, *t)?),
        MethodCall::Magic { t } => Estimate::plain(magic_filter(g, graph, *t)?),
        MethodCall::BandLow { k } => Estimate::plain(band_filter(g, basis()?, *k, Keep::Low)?),
        MethodCall::BandHigh { k } => Estimate::plain(band_filter(g, basis()?, *k, Keep::High)?),
        MethodCall::NuclearNorm { tau } => {
            let shape = ws
                .grid
                .ok_or_else(|| Error::InvalidArgument("nuclear-norm needs a grid graph".into()))?;
            Estimate::plain(nuclear_norm_denoise(g, shape, *tau)?)
        }
        MethodCall::Bernoulli { strength, mode, zeta } => {
            let zeta = match zeta {
                ZetaChoice::Zeros => VertexSet::zeros_of(g),
                ZetaChoice::All => VertexSet::full(g.len()),
            };
            let cfg = match *strength {
                DropoutStrength::Tau(t) => BernoulliConfig::with_tau(zeta, t, *mode)?,
                DropoutStrength::P { p, kappa } => BernoulliConfig::with_dropout(zeta, p, kappa, *mode)?,
                DropoutStrength::Level { kappa } => BernoulliConfig::with_dropout(zeta, level_value, kappa, *mode)?,
            };
            let r = bernoulli_denoise(g, graph, &cfg)?;
            Estimate { signal: r.signal, iterations: r.iterations, trace: None }
        }
        MethodCall::NoTrust { tau, mode } => {
            let r = no_trust_denoise(g, graph, *tau, *mode)?;
            Estimate { signal: r.signal, iterations: r.iterations, trace: None }
        }
        MethodCall::Ccp(opts) => {
            let out = ccp_denoise(g, graph, opts)?;
            Estimate { signal: out.result.signal, iterations: out.result.iterations, trace: Some(out.trace) }
        }
        MethodCall::ProjectedGradient(opts) => {
            let out = projected_gradient_denoise(g, graph, opts)?;
            Estimate { signal: out.result.signal, iterations: out.result.iterations, trace: Some(out.trace) }
        }
    })
}

fn metric_value(metric: Metric, truth: &[f64], est: &Estimate, call: &MethodCall, graph: &Graph) -> Result<f64> {
    let kappa = || {
        call.kappa()
            .ok_or_else(|| Error::InvalidArgument(format!("metric {} needs a method with kappa", metric.name())))
    };
    match metric {
        Metric::RelativeError => relative_error(truth, &est.signal),
        Metric::Correlation => pearson_correlation(truth, &est.signal),
        Metric::UniformLoss => uniform_loss(&est.signal, graph, kappa()?),
        Metric::LossGap => {
            let k = kappa()?;
            Ok(uniform_loss(&est.signal, graph, k)? - uniform_loss(truth, graph, k)?)
        }
        Metric::Iterations => Ok(est.iterations as f64),
    }
}

fn with_error(param_json: &str, message: &str) -> String {
    let mut v: serde_json::Map<String, Value> = serde_json::from_str(param_json).unwrap_or_default();
    v.insert("error".into(), Value::String(message.to_string()));
    serde_json::to_string(&v).expect("JSON map serializes")
}

struct CellOutcome {
    /// Per metric: value or error message.
    values: std::result::Result<Vec<std::result::Result<f64, String>>, String>,
    runtime: f64,
    trace: Option<LossTrace>,
}

pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    let seed = opts.seed.unwrap_or(spec.seed);
    let ws = Workspace::build(spec, seed)?;
    let n_levels = spec.noise.levels.len();
    let n_signals = ws.truths.len();

    let points: Vec<(usize, usize)> = spec
        .methods
        .iter()
        .enumerate()
        .flat_map(|(m, ms)| (0..ms.points.len()).map(move |p| (m, p)))
        .collect();
    let per_point = n_levels * n_signals;
    let cells = points.len() * per_point;

    let outcomes: Vec<CellOutcome> = par::map_range(cells, |c| {
        let (m, p) = points[c / per_point];
        let l = (c % per_point) / n_signals;
        let s = c % n_signals;
        let call = &spec.methods[m].points[p].call;
        let start = Instant::now();
        let est = run_call(call, &ws, l, spec.noise.levels[l], &ws.noisy[l][s]);
        let runtime = if opts.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
        match est {
            Err(e) => CellOutcome { values: Err(e.to_string()), runtime, trace: None },
            Ok(mut est) => {
                let values = spec
                    .metrics
                    .iter()
                    .map(|&metric| metric_value(metric, &ws.truths[s], &est, call, &ws.graph).map_err(|e| e.to_string()))
                    .collect();
                let mut trace = est.trace.take();
                if let (Some(t), false) = (trace.as_mut(), opts.record_timing) {
                    t.elapsed_s.iter_mut().for_each(|v| *v = 0.0);
                    t.wall_time_s = 0.0;
                }
                CellOutcome { values: Ok(values), runtime, trace }
            }
        }
    });

    let mut table = ExperimentTable::default();
    let mut traces = Vec::new();
    for (pi, &(m, p)) in points.iter().enumerate() {
        let method = &spec.methods[m];
        let point = &method.points[p];
        for l in 0..n_levels {
            let level = spec.noise.levels[l];
            let kind = spec.noise.kind_at(level);
            let row = |metric: &str, value: f64, runtime: f64, seed: u64, param_json: String| TableRow {
                method: method.name.clone(),
                param_json,
                noise_kind: kind.name().to_string(),
                noise_level: kind.level(),
                metric: metric.to_string(),
                value,
                runtime_s: runtime,
                seed,
            };
            let base = pi * per_point + l * n_signals;
            let group = &outcomes[base..base + n_signals];
            for (s, o) in group.iter().enumerate() {
                if let Some(t) = &o.trace {
                    traces.push(TraceTable { name: format!("{}-{p}-{l}-{s}", method.name), method: method.name.clone(), trace: t.clone() });
                }
            }
            match spec.aggregate {
                Aggregate::None => {
                    for (s, o) in group.iter().enumerate() {
                        let cell_seed = ws.noise_seeds[l][s];
                        match &o.values {
                            Err(e) => table.rows.push(row("error", f64::NAN, o.runtime, cell_seed, with_error(&point.param_json, e))),
                            Ok(values) => {
                                for (metric, v) in spec.metrics.iter().zip(values) {
                                    let (value, pj) = match v {
                                        Ok(v) => (*v, point.param_json.clone()),
                                        Err(e) => (f64::NAN, with_error(&point.param_json, e)),
                                    };
                                    table.rows.push(row(metric.name(), value, o.runtime, cell_seed, pj));
                                }
                            }
                        }
                    }
                }
                Aggregate::Mean | Aggregate::Median => {
                    for o in group {
                        if let Err(e) = &o.values {
                            table.rows.push(row("error", f64::NAN, o.runtime, seed, with_error(&point.param_json, e)));
                        }
                    }
                    let runtime = group.iter().map(|o| o.runtime).sum::<f64>() / n_signals.max(1) as f64;
                    for (k, metric) in spec.metrics.iter().enumerate() {
                        let vals: Vec<f64> = group
                            .iter()
                            .filter_map(|o| o.values.as_ref().ok().and_then(|v| v[k].as_ref().ok().copied()))
                            .filter(|v| v.is_finite())
                            .collect();
                        let value = if spec.aggregate == Aggregate::Mean {
                            if vals.is_empty() {
                                f64::NAN
                            } else {
                                vals.iter().sum::<f64>() / vals.len() as f64
                            }
                        } else {
                            median(&vals).unwrap_or(f64::NAN)
                        };
                        table.rows.push(row(metric.name(), value, runtime, seed, point.param_json.clone()));
                    }
                }
            }
        }
    }
    Ok(ExperimentOutput { table, traces })
}
