use super::Graph;
use crate::{par, Error, Result};

/// 4-neighbour grid with unit weights; vertex `(r, c)` has id `r·width + c`.
pub fn build_grid_graph(height: usize, width: usize) -> Result<Graph> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    if height * width < 2 {
        return Err(Error::InvalidArgument("grid needs at least two vertices".into()));
    }
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::with_capacity(height * (width - 1) + width * (height - 1));
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                edges.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < height {
                edges.push((id(r, c), id(r + 1, c), 1.0));
            }
        }
    }
    Graph::from_edges(height * width, edges)
}

/// Symmetrized k-nearest-neighbour graph with an adaptive Gaussian kernel.
///
/// `points` is row-major `n × dim`. Each point links to its `k` nearest
/// others (ties broken by index) with weight `exp(−d²/(σ_a σ_b))`, where
/// `σ_a` is the distance from `a` to its k-th neighbour. The directed
/// weights are symmetrized as `(W + Wᵀ)/2`, so one-sided links get half
/// weight. A disconnected result is an error.
pub fn build_knn_graph(points: &[f64], dim: usize, k: usize) -> Result<Graph> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::InvalidArgument(format!(
            "point buffer of length {} is not a multiple of dimension {dim}",
            points.len()
        )));
    }
    let n = points.len() / dim;
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k < n, got k={k} with n={n}"
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("points contain non-finite coordinates".into()));
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let sq_dist = |i: usize, j: usize| -> f64 {
        row(i).iter().zip(row(j)).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let neighbors: Vec<Vec<(usize, f64)>> = par::map_range(n, |i| {
        let mut cand: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (sq_dist(i, j), j)).collect();
        cand.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        cand.truncate(k);
        cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        cand.into_iter().map(|(d2, j)| (j, d2.sqrt())).collect()
    });

    let mut sigma: Vec<f64> = neighbors.iter().map(|nb| nb[k - 1].1).collect();
    let floor = sigma
        .iter()
        .copied()
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    for s in &mut sigma {
        if *s <= 0.0 {
            *s = floor;
        }
    }

    let mut directed = std::collections::BTreeMap::<(usize, usize), f64>::new();
    for (i, nb) in neighbors.iter().enumerate() {
        for &(j, d) in nb {
            let w = (-(d * d) / (sigma[i] * sigma[j])).exp().max(f64::MIN_POSITIVE);
            let key = if i < j { (i, j) } else { (j, i) };
            *directed.entry(key).or_insert(0.0) += 0.5 * w;
        }
    }
    Graph::from_edges(n, directed.into_iter().map(|((a, b), w)| (a, b, w)))
}
