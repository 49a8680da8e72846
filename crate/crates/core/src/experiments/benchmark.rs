use super::noise::{add_noise, NoiseKind, NoiseSpec};
use super::runner::{TraceTable, TRACE_HEADER};
use crate::rng::{derive_seed, label, stream};
use crate::spectral::sample_prior_matrix_free;
use crate::uniform::{ccp_denoise, projected_gradient_denoise, uniform_loss, CcpOptions, ProjectedGradientOptions, UniformOutcome};
use crate::{Graph, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkConfig {
    pub ccp: CcpOptions,
    pub pg: ProjectedGradientOptions,
}

impl BenchmarkConfig {
    pub fn with_kappa(kappa: f64) -> Self {
        Self {
            ccp: CcpOptions { kappa, ..Default::default() },
            pg: ProjectedGradientOptions { kappa, ..Default::default() },
        }
    }
}

/// Both uniform-noise solvers on one corrupted instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub observation: Vec<f64>,
    pub truth_loss: f64,
    pub ccp: UniformOutcome,
    pub pg: UniformOutcome,
}

impl BenchmarkReport {
    pub fn ccp_final_loss(&self) -> f64 {
        *self.ccp.trace.losses.last().expect("trace holds the initial loss")
    }

    pub fn pg_final_loss(&self) -> f64 {
        *self.pg.trace.losses.last().expect("trace holds the initial loss")
    }

    /// Long-format loss curves of both solvers.
    pub fn traces(&self) -> Vec<TraceTable> {
        vec![
            TraceTable { name: "ccp".into(), method: "ccp".into(), trace: self.ccp.trace.clone() },
            TraceTable { name: "projected-gradient".into(), method: "projected-gradient".into(), trace: self.pg.trace.clone() },
        ]
    }

    pub fn traces_csv(&self) -> String {
        let mut out = TRACE_HEADER.join(",");
        out.push('\n');
        for t in self.traces() {
            out.extend(t.to_csv_string().lines().skip(1).map(|l| format!("{l}\n")));
        }
        out
    }
}

/// Prior sample with constant component `mean` on every vertex.
pub fn prior_instance(graph: &Graph, kappa: f64, mean: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed, &[label("benchmark-truth")]);
    sample_prior_matrix_free(graph, kappa, mean * (graph.n() as f64).sqrt(), &mut rng)
}

pub fn ccp_vs_pg_benchmark(truth: &[f64], graph: &Graph, kappa: f64, seed: u64) -> Result<BenchmarkReport> {
    ccp_vs_pg_benchmark_with(truth, graph, &BenchmarkConfig::with_kappa(kappa), seed)
}

/// Corrupt `truth` by uniform scaling, then run CCP and projected gradient.
/// `cfg.ccp.kappa` is used for the reference loss.
pub fn ccp_vs_pg_benchmark_with(truth: &[f64], graph: &Graph, cfg: &BenchmarkConfig, seed: u64) -> Result<BenchmarkReport> {
    let noise = NoiseSpec::new(NoiseKind::UniformScale, derive_seed(seed, &[label("benchmark-noise")]));
    let observation = add_noise(truth, &noise)?;
    let truth_loss = uniform_loss(truth, graph, cfg.ccp.kappa)?;
    let ccp = ccp_denoise(&observation, graph, &cfg.ccp)?;
    let pg = projected_gradient_denoise(&observation, graph, &cfg.pg)?;
    Ok(BenchmarkReport { observation, truth_loss, ccp, pg })
}
