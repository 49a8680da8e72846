use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{label, stream};
use crate::{Error, Result};

/// Isotropic Gaussian blobs with centres evenly spaced on a circle in the
/// first two coordinates. Adjacent centres sit `separation · spread` apart,
/// whatever the cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    /// Standard deviation of each blob.
    pub spread: f64,
    /// Distance between adjacent centres, in units of `spread`.
    pub separation: f64,
    /// Number of low- and of high-frequency signals to generate.
    pub signals: usize,
    /// Angular frequency of the within-cluster sinusoid; `None` means
    /// `4π` over the mean cluster diameter (largest pairwise distance).
    pub omega: Option<f64>,
    pub seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self { clusters: 5, per_cluster: 200, dim: 2, spread: 1.0, separation: 4.5, signals: 10, omega: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterData {
    /// Row-major `n × dim` coordinates.
    pub points: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<usize>,
    /// Constant on each cluster: a shuffle of `1/C, 2/C, …, 1`, so both
    /// families share unit amplitude.
    pub low: Vec<Vec<f64>>,
    /// `sin(ω·x₀ + φ)` in cluster-local coordinates.
    pub high: Vec<Vec<f64>>,
}

impl ClusterData {
    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

pub fn make_cluster_data(clusters: usize, per_cluster: usize, spread: f64, seed: u64) -> Result<ClusterData> {
    generate_clusters(&ClusterParams { clusters, per_cluster, spread, seed, ..Default::default() })
}

pub fn generate_clusters(p: &ClusterParams) -> Result<ClusterData> {
    if p.clusters == 0 || p.per_cluster == 0 || p.dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least one cluster, one point and two dimensions (got {}, {}, {})",
            p.clusters, p.per_cluster, p.dim
        )));
    }
    if !(p.spread > 0.0 && p.spread.is_finite() && p.separation >= 0.0 && p.separation.is_finite()) {
        return Err(Error::InvalidArgument("spread must be positive and separation non-negative".into()));
    }
    let n = p.clusters * p.per_cluster;
    let mut rng = stream(p.seed, &[label("points")]);
    let mut points = Vec::with_capacity(n * p.dim);
    let mut local = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let radius = if p.clusters < 2 {
        0.0
    } else {
        p.separation * p.spread / (2.0 * (std::f64::consts::PI / p.clusters as f64).sin())
    };
    for c in 0..p.clusters {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / p.clusters as f64;
        let centre = [radius * angle.cos(), radius * angle.sin()];
        for _ in 0..p.per_cluster {
            for d in 0..p.dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                let offset = p.spread * z;
                if d == 0 {
                    local.push(offset);
                }
                points.push(if d < 2 { centre[d] + offset } else { offset });
            }
            labels.push(c);
        }
    }

    let omega = p.omega.unwrap_or_else(|| {
        let d = mean_diameter(&points, p.dim, p.clusters, p.per_cluster);
        4.0 * std::f64::consts::PI / if d > 0.0 { d } else { 4.0 * p.spread }
    });
    let low = (0..p.signals)
        .map(|s| {
            let mut rng = stream(p.seed, &[label("low"), s as u64]);
            let mut levels: Vec<f64> = (1..=p.clusters).map(|v| v as f64 / p.clusters as f64).collect();
            levels.shuffle(&mut rng);
            labels.iter().map(|&c| levels[c]).collect()
        })
        .collect();
    let high = (0..p.signals)
        .map(|s| {
            let mut rng = stream(p.seed, &[label("high"), s as u64]);
            let phase = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
            local.iter().map(|x| (omega * x + phase).sin()).collect()
        })
        .collect();
    Ok(ClusterData { points, dim: p.dim, labels, low, high })
}

fn mean_diameter(points: &[f64], dim: usize, clusters: usize, per_cluster: usize) -> f64 {
    let total: f64 = (0..clusters)
        .map(|c| {
            let block = &points[c * per_cluster * dim..(c + 1) * per_cluster * dim];
            let mut widest: f64 = 0.0;
            for (i, a) in block.chunks_exact(dim).enumerate() {
                for b in block.chunks_exact(dim).skip(i + 1) {
                    widest = widest.max(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum());
                }
            }
            widest.sqrt()
        })
        .sum();
    total / clusters as f64
}
