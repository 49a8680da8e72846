//! Graph-signal denoising by maximum a posteriori estimation under a
//! spectral smoothness prior `p(f) ∝ exp(-κ fᵀLf)`.
//!
//! Three corruption models are supported, each with its own estimator:
//!
//! | model | estimator | module |
//! |-------|-----------|--------|
//! | additive Gaussian | `(I + τL)⁻¹ g`, τ by method of moments | [`gaussian`] |
//! | uniform scaling `g = u·f` | constrained convex-concave procedure | [`uniform`] |
//! | partial observation / dropout | harmonic interpolation, sparse incidence regression | [`bernoulli`] |
//!
//! Everything is applied matrix-free on a CSR [`Graph`]; the dense
//! [`spectral`] path exists for reference filters and tests. Batch work
//! (many signals, experiment cells) fans out over rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.

pub mod baselines;
pub mod bernoulli;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod graph;
pub mod io;
pub mod linsolve;
pub mod par;
pub mod rng;
pub mod spectral;
pub mod uniform;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, VertexSet};

/// Output of every iterative denoiser.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    pub signal: Vec<f64>,
    /// Loss or residual recorded once per iteration; meaning is method specific.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl DenoiseResult {
    pub(crate) fn exact(signal: Vec<f64>) -> Self {
        Self {
            signal,
            trace: Vec::new(),
            iterations: 0,
            converged: true,
        }
    }
}

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::InvalidArgument(format!(
            "{what} has length {got}, expected {expected}"
        )));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn mean(a: &[f64]) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        a.iter().sum::<f64>() / a.len() as f64
    }
}
