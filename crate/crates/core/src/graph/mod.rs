//! Weighted undirected graphs in CSR form and the operators built on them:
//! adjacency, degree, the combinatorial Laplacian `L = D − A`, and the
//! weighted incidence matrix `B` with `BᵀB = L`.
//!
//! Edges are stored once with `a < b`; that pair order is also the fixed
//! orientation of the incidence rows (`+√w` at `a`, `−√w` at `b`).

mod build;
mod restrict;
mod vertex_set;

pub use build::{build_grid_graph, build_knn_graph};
pub use restrict::{restrict, IncidenceColumns, Restriction, RestrictKind};
pub use vertex_set::VertexSet;

use crate::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

/// Immutable, connected, weighted undirected graph.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
    edge_ids: Vec<usize>,
    degrees: Vec<f64>,
}

impl Graph {
    /// Build from an edge list. Endpoint order is normalized to `a < b`;
    /// self-loops, duplicates, out-of-range ids and non-positive weights are
    /// rejected, as is a disconnected result.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let g = Self::from_edges_unchecked_connectivity(n, edges)?;
        let (count, labels) = g.components();
        if count > 1 {
            let mut representatives = vec![usize::MAX; count];
            let mut sizes = vec![0; count];
            for (v, &c) in labels.iter().enumerate() {
                if representatives[c] == usize::MAX {
                    representatives[c] = v;
                }
                sizes[c] += 1;
            }
            return Err(Error::GraphDisconnected {
                count,
                representatives,
                sizes,
            });
        }
        Ok(g)
    }

    fn from_edges_unchecked_connectivity<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) has non-positive or non-finite weight {w}"
                )));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { a, b, w });
        }
        list.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        if let Some(pair) = list.windows(2).find(|p| p[0].a == p[1].a && p[0].b == p[1].b) {
            return Err(Error::InvalidArgument(format!(
                "duplicate edge ({}, {})",
                pair[0].a, pair[0].b
            )));
        }

        let mut counts = vec![0usize; n + 1];
        for e in &list {
            counts[e.a + 1] += 1;
            counts[e.b + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts;
        let nnz = row_ptr[n];
        let mut fill = row_ptr.clone();
        let mut col_idx = vec![0; nnz];
        let mut weights = vec![0.0; nnz];
        let mut edge_ids = vec![0; nnz];
        let mut degrees = vec![0.0; n];
        for (id, e) in list.iter().enumerate() {
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                let slot = fill[u];
                col_idx[slot] = v;
                weights[slot] = e.w;
                edge_ids[slot] = id;
                fill[u] += 1;
                degrees[u] += e.w;
            }
        }
        Ok(Self {
            n,
            edges: list,
            row_ptr,
            col_idx,
            weights,
            edge_ids,
            degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, a: usize) -> f64 {
        self.degrees[a]
    }

    /// `(neighbor, weight, edge id)` triples of vertex `a`.
    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = (usize, f64, usize)> + '_ {
        let range = self.row_ptr[a]..self.row_ptr[a + 1];
        range.map(move |k| (self.col_idx[k], self.weights[k], self.edge_ids[k]))
    }

    /// Weight of edge `(a, b)`, if present.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.neighbors(a).find(|&(v, _, _)| v == b).map(|(_, w, _)| w)
    }

    /// Connected components as `(count, label per vertex)`, labels in BFS
    /// discovery order.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, _, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// A copy with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_edges(self.n, self.edges.iter().map(|e| (e.a, e.b, e.w * c)))
    }

    /// `(Lf)(a) = deg(a) f(a) − Σ_b w(a,b) f(b)`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("signal", f.len(), self.n)?;
        let mut out = vec![0.0; self.n];
        self.laplacian_apply_into(f, &mut out);
        Ok(out)
    }

    pub(crate) fn laplacian_apply_into(&self, f: &[f64], out: &mut [f64]) {
        for a in 0..self.n {
            let mut acc = self.degrees[a] * f[a];
            for k in self.row_ptr[a]..self.row_ptr[a + 1] {
                acc -= self.weights[k] * f[self.col_idx[k]];
            }
            out[a] = acc;
        }
    }

    pub fn adjacency_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("signal", f.len(), self.n)?;
        Ok((0..self.n)
            .map(|a| self.neighbors(a).map(|(b, w, _)| w * f[b]).sum())
            .collect())
    }

    /// Edge vector `(Bf)_e = √w (f(a) − f(b))` for `e = (a, b)`, `a < b`.
    pub fn incidence_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("signal", f.len(), self.n)?;
        Ok(self
            .edges
            .iter()
            .map(|e| e.w.sqrt() * (f[e.a] - f[e.b]))
            .collect())
    }

    pub fn incidence_transpose_apply(&self, e: &[f64]) -> Result<Vec<f64>> {
        check_len("edge vector", e.len(), self.m())?;
        let mut out = vec![0.0; self.n];
        for (edge, &x) in self.edges.iter().zip(e) {
            let s = edge.w.sqrt() * x;
            out[edge.a] += s;
            out[edge.b] -= s;
        }
        Ok(out)
    }

    /// `fᵀLf = Σ_{(a,b)∈E} w(a,b) (f(a) − f(b))²`.
    pub fn dirichlet_energy(&self, f: &[f64]) -> Result<f64> {
        check_len("signal", f.len(), self.n)?;
        Ok(self.dirichlet_energy_unchecked(f))
    }

    pub(crate) fn dirichlet_energy_unchecked(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let d = f[e.a] - f[e.b];
                e.w * d * d
            })
            .sum()
    }

    /// `tr(L) = Σ_a deg(a)`.
    pub fn trace_l(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// `tr(L²) = Σ_a (deg(a)² + Σ_b w(a,b)²)`.
    pub fn trace_l2(&self) -> f64 {
        let deg2: f64 = self.degrees.iter().map(|d| d * d).sum();
        let w2: f64 = self.edges.iter().map(|e| e.w * e.w).sum();
        deg2 + 2.0 * w2
    }

    /// Members of `s` with at least one edge leaving `s`.
    pub fn boundary(&self, s: &VertexSet) -> Result<VertexSet> {
        s.check_universe(self.n)?;
        let mask = s.mask();
        let members = s
            .iter()
            .filter(|&a| self.neighbors(a).any(|(b, _, _)| !mask[b]))
            .collect::<Vec<_>>();
        VertexSet::new(self.n, members)
    }

    /// Dense `L`, for tests and the reference spectral path.
    pub fn dense_laplacian(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.a, e.a)] += e.w;
            l[(e.b, e.b)] += e.w;
            l[(e.a, e.b)] -= e.w;
            l[(e.b, e.a)] -= e.w;
        }
        l
    }
}
