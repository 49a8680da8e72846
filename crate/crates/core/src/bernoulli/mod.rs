//! Partial observation and Bernoulli dropout.
//!
//! Entries in the suspicion set `ζ` are replaced with probability `p`. With
//! `τ = (log(1−p) − log p)/κ`, the MAP estimate keeps `g` on `ζᶜ` and sets
//! `f(ζ) = g(ζ) + x`, where
//!
//! ```text
//! x = argmin ‖B(:,ζ) x + B g‖² + τ·penalty(x)
//! ```
//!
//! for `τ > 0`. When `τ ≤ 0` the suspected entries carry no information
//! and `f(ζ)` is the harmonic extension of `g(ζᶜ)`.

mod design;
mod l0;
mod lasso;

pub use design::{residual_norm2, DenseDesign, Design};
pub use l0::{l0_greedy, l0_greedy_with, refit, L0Options};
pub use lasso::{kkt_violation, lasso_coordinate_descent, LassoOptions};

use crate::graph::IncidenceColumns;
use crate::linsolve::harmonic_interpolate;
use crate::{check_len, DenoiseResult, Error, Graph, Result, VertexSet};

/// Coefficients below this magnitude are reported as exact zeros.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Sparse deviation `x = f(ζ) − g(ζ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseUpdate {
    pub x: Vec<f64>,
    pub support: Vec<usize>,
    /// Penalized objective at `x`.
    pub objective: f64,
    /// Sweeps (ℓ1) or accepted support moves (ℓ0).
    pub iterations: usize,
    pub converged: bool,
}

impl SparseUpdate {
    pub(crate) fn from_x(mut x: Vec<f64>, objective: f64, iterations: usize, converged: bool) -> Self {
        let mut support = Vec::new();
        for (j, v) in x.iter_mut().enumerate() {
            if v.abs() < SUPPORT_THRESHOLD {
                *v = 0.0;
            } else {
                support.push(j);
            }
        }
        Self { x, support, objective, iterations, converged }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparseMode {
    L1,
    L0,
}

impl std::str::FromStr for SparseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "lasso" => Ok(Self::L1),
            "l0" | "l0-greedy" | "greedy" => Ok(Self::L0),
            _ => Err(Error::InvalidArgument(format!("unknown sparse mode `{s}` (expected l1 or l0)"))),
        }
    }
}

/// `τ = (ln(1−p) − ln p)/κ`; positive for `p < 1/2`.
pub fn dropout_tau(p: f64, kappa: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("dropout probability must lie in (0, 1), got {p}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(((1.0 - p).ln() - p.ln()) / kappa)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliConfig {
    pub zeta: VertexSet,
    tau: f64,
    pub mode: SparseMode,
    pub lasso: LassoOptions,
    pub l0: L0Options,
}

impl BernoulliConfig {
    /// `tau` may be any non-NaN value, including `+∞`.
    pub fn with_tau(zeta: VertexSet, tau: f64, mode: SparseMode) -> Result<Self> {
        if tau.is_nan() || tau == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(format!("invalid tau {tau}")));
        }
        Ok(Self { zeta, tau, mode, lasso: LassoOptions::default(), l0: L0Options::default() })
    }

    pub fn with_dropout(zeta: VertexSet, p: f64, kappa: f64, mode: SparseMode) -> Result<Self> {
        Self::with_tau(zeta, dropout_tau(p, kappa)?, mode)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Solve the sparse regression for a given column set.
pub fn sparse_update(g: &[f64], graph: &Graph, zeta: &VertexSet, tau: f64, mode: SparseMode, lasso: &LassoOptions, l0: &L0Options) -> Result<SparseUpdate> {
    let design = IncidenceColumns::new(graph, zeta)?;
    let target: Vec<f64> = graph.incidence_apply(g)?.into_iter().map(|v| -v).collect();
    match mode {
        SparseMode::L1 => lasso_coordinate_descent(&design, &target, tau, lasso),
        SparseMode::L0 => l0::l0_greedy_with(&design, &target, tau, l0),
    }
}

pub fn bernoulli_denoise(g: &[f64], graph: &Graph, cfg: &BernoulliConfig) -> Result<DenoiseResult> {
    check_len("signal", g.len(), graph.n())?;
    cfg.zeta.check_universe(graph.n())?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal is not finite".into()));
    }
    if cfg.zeta.is_empty() {
        return Ok(DenoiseResult::exact(g.to_vec()));
    }
    if cfg.tau <= 0.0 {
        if cfg.zeta.is_full() {
            return Err(Error::InvalidArgument(
                "suspicion set covers every vertex and tau <= 0: nothing is trusted".into(),
            ));
        }
        let known = cfg.zeta.complement();
        let f = harmonic_interpolate(graph, &known, &known.gather(g))?;
        return Ok(DenoiseResult::exact(f));
    }
    if cfg.tau.is_infinite() {
        return Ok(DenoiseResult::exact(g.to_vec()));
    }
    let update = sparse_update(g, graph, &cfg.zeta, cfg.tau, cfg.mode, &cfg.lasso, &cfg.l0)?;
    let mut f = g.to_vec();
    for (v, x) in cfg.zeta.iter().zip(&update.x) {
        f[v] += x;
    }
    Ok(DenoiseResult {
        signal: f,
        trace: vec![update.objective],
        iterations: update.iterations,
        converged: update.converged,
    })
}

/// Dropout model with every vertex suspected.
pub fn no_trust_denoise(g: &[f64], graph: &Graph, tau: f64, mode: SparseMode) -> Result<DenoiseResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let cfg = BernoulliConfig::with_tau(VertexSet::full(graph.n()), tau, mode)?;
    bernoulli_denoise(g, graph, &cfg)
}
