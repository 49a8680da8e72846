//! Experiment specification files (TOML).
//!
//! ```toml
//! name = "table3"
//! seed = 0
//! aggregate = "mean"            # none | mean | median
//! metrics = ["correlation"]
//!
//! [graph]
//! kind = "clusters"             # grid | knn | clusters | random-knn | edge-list
//! clusters = 5
//! per_cluster = 200
//! k = 10
//!
//! [signal]
//! kind = "cluster-low"          # prior | file | cluster-low | cluster-high
//! count = 10
//!
//! [noise]
//! kind = "bernoulli-dropout"    # gaussian | uniform-scale | bernoulli-dropout | salt-pepper
//! levels = [0.9]
//!
//! [[methods]]
//! name = "magic"
//! t = [1, 5, 10]                # arrays are grid axes
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use super::noise::NoiseKind;
use crate::bernoulli::SparseMode;
use crate::uniform::{CcpOptions, ProjectedGradientOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    None,
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    RelativeError,
    Correlation,
    /// Uniform-noise loss of the estimate at the method's `kappa`.
    UniformLoss,
    /// Uniform-noise loss of the estimate minus that of the ground truth.
    LossGap,
    Iterations,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RelativeError => "relative-error",
            Self::Correlation => "correlation",
            Self::UniformLoss => "uniform-loss",
            Self::LossGap => "loss-gap",
            Self::Iterations => "iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Grid {
        height: usize,
        width: usize,
    },
    /// Points file, one point per row.
    Knn {
        file: PathBuf,
        k: usize,
    },
    Clusters {
        #[serde(default = "defaults::clusters")]
        clusters: usize,
        #[serde(default = "defaults::per_cluster")]
        per_cluster: usize,
        #[serde(default = "defaults::spread")]
        spread: f64,
        #[serde(default = "defaults::separation")]
        separation: f64,
        #[serde(default = "defaults::k")]
        k: usize,
    },
    /// Uniform points in the unit cube.
    RandomKnn {
        points: usize,
        #[serde(default = "defaults::dim")]
        dim: usize,
        #[serde(default = "defaults::k")]
        k: usize,
    },
    EdgeList {
        file: PathBuf,
    },
}

mod defaults {
    pub fn clusters() -> usize {
        5
    }
    pub fn per_cluster() -> usize {
        200
    }
    pub fn spread() -> f64 {
        1.0
    }
    pub fn separation() -> f64 {
        4.5
    }
    pub fn k() -> usize {
        10
    }
    pub fn dim() -> usize {
        2
    }
    pub fn count() -> usize {
        1
    }
    pub fn scale() -> f64 {
        1.0
    }
    pub fn levels() -> Vec<f64> {
        vec![0.0]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalKind {
    /// Samples of the smoothness prior with the given mean value.
    Prior {
        kappa: f64,
        #[serde(default = "defaults::count")]
        count: usize,
        #[serde(default)]
        mean: f64,
    },
    /// Columns of a matrix file; `columns` is `"a..b"`, `"a..=b"`, `"a"` or absent for all.
    File {
        path: PathBuf,
        #[serde(default)]
        columns: Option<String>,
    },
    ClusterLow {
        #[serde(default = "defaults::count")]
        count: usize,
    },
    ClusterHigh {
        #[serde(default = "defaults::count")]
        count: usize,
    },
}

/// Signal source followed by `v ↦ max(scale·v + offset, clamp_min)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SignalSource {
    #[serde(flatten)]
    pub kind: SignalKind,
    #[serde(default = "defaults::scale")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub clamp_min: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseName {
    Gaussian,
    UniformScale,
    BernoulliDropout,
    SaltPepper,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseName,
    /// σ for gaussian, p for dropout and salt-and-pepper; ignored for uniform scaling.
    #[serde(default = "defaults::levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub fill: f64,
    #[serde(default)]
    pub lo: f64,
    #[serde(default)]
    pub hi: f64,
}

impl NoiseConfig {
    pub fn kind_at(&self, level: f64) -> NoiseKind {
        match self.kind {
            NoiseName::Gaussian => NoiseKind::Gaussian { sigma: level },
            NoiseName::UniformScale => NoiseKind::UniformScale,
            NoiseName::BernoulliDropout => NoiseKind::BernoulliDropout { p: level, fill: self.fill },
            NoiseName::SaltPepper => NoiseKind::SaltPepper { p: level, lo: self.lo, hi: self.hi },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauChoice {
    Fixed(f64),
    /// Moment estimate from the signal itself.
    Estimate,
    /// Moment estimate pooled over every signal at the same noise level.
    EstimatePooled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DropoutStrength {
    Tau(f64),
    P { p: f64, kappa: f64 },
    /// Use the experiment's noise level as `p`.
    Level { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaChoice {
    Zeros,
    All,
}

/// One fully specified method invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodCall {
    Noisy,
    GaussianMap { tau: TauChoice },
    LocalAverage { t: usize },
    Magic { t: usize },
    BandLow { k: usize },
    BandHigh { k: usize },
    NuclearNorm { tau: f64 },
    Bernoulli { strength: DropoutStrength, mode: SparseMode, zeta: ZetaChoice },
    NoTrust { tau: f64, mode: SparseMode },
    Ccp(CcpOptions),
    ProjectedGradient(ProjectedGradientOptions),
}

impl MethodCall {
    /// `κ` of the uniform-noise loss, for methods that have one.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            Self::Ccp(o) => Some(o.kappa),
            Self::ProjectedGradient(o) => Some(o.kappa),
            _ => None,
        }
    }
}

pub const METHOD_NAMES: &[&str] = &[
    "noisy",
    "gaussian-map",
    "local-average",
    "magic",
    "band-low",
    "band-high",
    "nuclear-norm",
    "bernoulli",
    "no-trust",
    "ccp",
    "projected-gradient",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MethodPoint {
    /// Canonical JSON of the parameters of this grid point.
    pub param_json: String,
    pub call: MethodCall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub points: Vec<MethodPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub aggregate: Aggregate,
    pub graph: GraphSource,
    pub signal: SignalSource,
    pub noise: NoiseConfig,
    pub metrics: Vec<Metric>,
    pub methods: Vec<MethodSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    aggregate: Aggregate,
    graph: GraphSource,
    signal: SignalSource,
    noise: NoiseConfig,
    #[serde(default)]
    metrics: Vec<Metric>,
    #[serde(default)]
    methods: Vec<toml::Table>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Line of the first `name = "<name>"` assignment, for error messages.
fn find_name_line(text: &str, name: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim();
            l.starts_with("name") && (l.contains(&format!("\"{name}\"")) || l.contains(&format!("'{name}'")))
        })
        .map_or(0, |i| i + 1)
}

impl ExperimentSpec {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    /// Relative file paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            Error::Parse { line, column, message: e.message().to_string() }
        })?;
        let mut methods = Vec::with_capacity(raw.methods.len());
        for table in raw.methods {
            let line_for = |name: &str| find_name_line(text, name);
            let name = match table.get("name") {
                Some(toml::Value::String(s)) => s.clone(),
                _ => {
                    return Err(Error::Parse { line: 0, column: 0, message: "every [[methods]] entry needs a string `name`".into() })
                }
            };
            if !METHOD_NAMES.contains(&name.as_str()) {
                return Err(Error::Parse {
                    line: line_for(&name),
                    column: 1,
                    message: format!("unknown method `{name}` (known: {})", METHOD_NAMES.join(", ")),
                });
            }
            let mut params = BTreeMap::new();
            for (k, v) in table.iter().filter(|(k, _)| k.as_str() != "name") {
                let json = serde_json::to_value(v).map_err(|e| Error::Parse {
                    line: line_for(&name),
                    column: 1,
                    message: format!("method `{name}`, parameter `{k}`: {e}"),
                })?;
                params.insert(k.clone(), json);
            }
            let points = expand_grid(&params)
                .into_iter()
                .map(|point| {
                    let call = build_call(&name, &point).map_err(|message| Error::Parse {
                        line: line_for(&name),
                        column: 1,
                        message: format!("method `{name}`: {message}"),
                    })?;
                    let param_json = serde_json::to_string(&point).expect("JSON map serializes");
                    Ok(MethodPoint { param_json, call })
                })
                .collect::<Result<Vec<_>>>()?;
            methods.push(MethodSpec { name, points });
        }

        let mut graph = raw.graph;
        let mut signal = raw.signal;
        if let Some(dir) = base_dir {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            match &mut graph {
                GraphSource::Knn { file, .. } | GraphSource::EdgeList { file } => fix(file),
                _ => {}
            }
            if let SignalKind::File { path, .. } = &mut signal.kind {
                fix(path);
            }
        }
        for &level in &raw.noise.levels {
            raw.noise.kind_at(level).validate()?;
        }
        Ok(Self {
            name: raw.name.unwrap_or_else(|| "experiment".into()),
            seed: raw.seed,
            aggregate: raw.aggregate,
            graph,
            signal,
            noise: raw.noise,
            metrics: raw.metrics,
            methods,
        })
    }
}

/// Cartesian product over array-valued parameters; last key varies fastest.
fn expand_grid(params: &BTreeMap<String, Value>) -> Vec<BTreeMap<String, Value>> {
    let mut points = vec![BTreeMap::new()];
    for (key, value) in params {
        let options = match value {
            Value::Array(items) => items.clone(),
            other => vec![other.clone()],
        };
        points = points
            .into_iter()
            .flat_map(|p| {
                options.iter().map(move |o| {
                    let mut q = p.clone();
                    q.insert(key.clone(), o.clone());
                    q
                })
            })
            .collect();
    }
    points
}

struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    allowed: &'static [&'static str],
}

impl Params<'_> {
    fn check(&self) -> std::result::Result<(), String> {
        match self.map.keys().find(|k| !self.allowed.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown parameter `{k}` (allowed: {})", self.allowed.join(", "))),
            None => Ok(()),
        }
    }

    fn f64_or(&self, key: &str, default: Option<f64>) -> std::result::Result<f64, String> {
        match self.map.get(key) {
            Some(v) => v.as_f64().ok_or_else(|| format!("`{key}` must be a number, got {v}")),
            None => default.ok_or_else(|| format!("missing parameter `{key}`")),
        }
    }

    fn usize_or(&self, key: &str, default: Option<usize>) -> std::result::Result<usize, String> {
        match self.map.get(key) {
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| format!("`{key}` must be a non-negative integer, got {v}")),
            None => default.ok_or_else(|| format!("missing parameter `{key}`")),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).and_then(Value::as_str)
    }

    fn mode(&self) -> std::result::Result<SparseMode, String> {
        match self.map.get("mode") {
            None => Ok(SparseMode::L1),
            Some(v) => v.as_str().ok_or("`mode` must be a string".to_string())?.parse().map_err(|e: Error| e.to_string()),
        }
    }
}

fn positive(key: &str, v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{key}` must be positive and finite, got {v}"))
    }
}

fn nonneg(key: &str, v: f64) -> std::result::Result<f64, String> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{key}` must be >= 0, got {v}"))
    }
}

fn build_call(name: &str, map: &BTreeMap<String, Value>) -> std::result::Result<MethodCall, String> {
    let allowed: &'static [&'static str] = match name {
        "noisy" => &[],
        "gaussian-map" | "nuclear-norm" => &["tau"],
        "local-average" | "magic" => &["t"],
        "band-low" | "band-high" => &["k"],
        "bernoulli" => &["tau", "p", "kappa", "mode", "zeta"],
        "no-trust" => &["tau", "mode"],
        "ccp" => &["kappa", "max_outer", "tol", "jitter"],
        "projected-gradient" => &["kappa", "step", "max_iter", "tol"],
        _ => return Err("unknown method".into()),
    };
    let p = Params { map, allowed };
    p.check()?;
    Ok(match name {
        "noisy" => MethodCall::Noisy,
        "gaussian-map" => MethodCall::GaussianMap {
            tau: match p.str("tau") {
                Some("estimate") => TauChoice::Estimate,
                Some("estimate-pooled") => TauChoice::EstimatePooled,
                Some(other) => return Err(format!("`tau` must be a number, \"estimate\" or \"estimate-pooled\", got \"{other}\"")),
                None => TauChoice::Fixed(nonneg("tau", p.f64_or("tau", None)?)?),
            },
        },
        "local-average" => MethodCall::LocalAverage { t: p.usize_or("t", None)? },
        "magic" => MethodCall::Magic { t: p.usize_or("t", None)? },
        "band-low" => MethodCall::BandLow { k: p.usize_or("k", None)? },
        "band-high" => MethodCall::BandHigh { k: p.usize_or("k", None)? },
        "nuclear-norm" => MethodCall::NuclearNorm { tau: nonneg("tau", p.f64_or("tau", None)?)? },
        "bernoulli" => {
            let kappa = positive("kappa", p.f64_or("kappa", Some(1.0))?)?;
            let strength = match (map.contains_key("tau"), p.str("p")) {
                (true, _) if map.contains_key("p") => return Err("give either `tau` or `p`, not both".into()),
                (true, _) => DropoutStrength::Tau(p.f64_or("tau", None)?),
                (false, Some("level")) => DropoutStrength::Level { kappa },
                (false, Some(other)) => return Err(format!("`p` must be a number or \"level\", got \"{other}\"")),
                (false, None) => {
                    let prob = p.f64_or("p", None).map_err(|_| "needs `tau` or `p`".to_string())?;
                    if !(prob > 0.0 && prob < 1.0) {
                        return Err(format!("`p` must lie in (0, 1), got {prob}"));
                    }
                    DropoutStrength::P { p: prob, kappa }
                }
            };
            let zeta = match p.str("zeta").unwrap_or("zeros") {
                "zeros" => ZetaChoice::Zeros,
                "all" => ZetaChoice::All,
                other => return Err(format!("`zeta` must be \"zeros\" or \"all\", got \"{other}\"")),
            };
            MethodCall::Bernoulli { strength, mode: p.mode()?, zeta }
        }
        "no-trust" => MethodCall::NoTrust { tau: positive("tau", p.f64_or("tau", None)?)?, mode: p.mode()? },
        "ccp" => {
            let d = CcpOptions::default();
            MethodCall::Ccp(CcpOptions {
                kappa: positive("kappa", p.f64_or("kappa", None)?)?,
                max_outer: p.usize_or("max_outer", Some(d.max_outer))?,
                tol: nonneg("tol", p.f64_or("tol", Some(d.tol))?)?,
                jitter: nonneg("jitter", p.f64_or("jitter", Some(d.jitter))?)?,
                ..d
            })
        }
        "projected-gradient" => {
            let d = ProjectedGradientOptions::default();
            MethodCall::ProjectedGradient(ProjectedGradientOptions {
                kappa: positive("kappa", p.f64_or("kappa", None)?)?,
                step: positive("step", p.f64_or("step", Some(d.step))?)?,
                max_iter: p.usize_or("max_iter", Some(d.max_iter))?,
                tol: nonneg("tol", p.f64_or("tol", Some(d.tol))?)?,
                ..d
            })
        }
        _ => unreachable!(),
    })
}
