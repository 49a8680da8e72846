use super::{Graph, VertexSet};
use crate::{check_len, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictKind {
    Laplacian,
    Adjacency,
}

/// `L(rows, cols)` or `A(rows, cols)` as a matrix-free operator taking a
/// vector indexed by `cols` to one indexed by `rows`.
#[derive(Debug, Clone)]
pub struct Restriction<'g> {
    graph: &'g Graph,
    kind: RestrictKind,
    rows: VertexSet,
    col_pos: Vec<usize>,
    ncols: usize,
}

pub fn restrict<'g>(
    graph: &'g Graph,
    kind: RestrictKind,
    rows: &VertexSet,
    cols: &VertexSet,
) -> Result<Restriction<'g>> {
    rows.check_universe(graph.n())?;
    cols.check_universe(graph.n())?;
    Ok(Restriction {
        graph,
        kind,
        rows: rows.clone(),
        col_pos: cols.positions(),
        ncols: cols.len(),
    })
}

impl Restriction<'_> {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.ncols)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("restricted input", x.len(), self.ncols)?;
        let g = self.graph;
        Ok(self
            .rows
            .iter()
            .map(|a| {
                let off: f64 = g
                    .neighbors(a)
                    .filter_map(|(b, w, _)| {
                        let j = self.col_pos[b];
                        (j != usize::MAX).then(|| w * x[j])
                    })
                    .sum();
                match self.kind {
                    RestrictKind::Adjacency => off,
                    RestrictKind::Laplacian => {
                        let diag = match self.col_pos[a] {
                            usize::MAX => 0.0,
                            j => g.degree(a) * x[j],
                        };
                        diag - off
                    }
                }
            })
            .collect())
    }
}

/// The column block `B(:, cols)` of the incidence matrix.
#[derive(Debug, Clone)]
pub struct IncidenceColumns<'g> {
    graph: &'g Graph,
    cols: VertexSet,
}

impl<'g> IncidenceColumns<'g> {
    pub fn new(graph: &'g Graph, cols: &VertexSet) -> Result<Self> {
        cols.check_universe(graph.n())?;
        Ok(Self {
            graph,
            cols: cols.clone(),
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn columns(&self) -> &VertexSet {
        &self.cols
    }

    /// Entry of `B` at edge `edge` and vertex `v`.
    pub(crate) fn entry(&self, edge: usize, v: usize) -> f64 {
        let e = self.graph.edges()[edge];
        if v == e.a {
            e.w.sqrt()
        } else {
            -e.w.sqrt()
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("column coefficients", x.len(), self.cols.len())?;
        let mut out = vec![0.0; self.graph.m()];
        for (j, v) in self.cols.iter().enumerate() {
            for (_, _, id) in self.graph.neighbors(v) {
                out[id] += self.entry(id, v) * x[j];
            }
        }
        Ok(out)
    }

    pub fn transpose_apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("edge vector", r.len(), self.graph.m())?;
        Ok(self
            .cols
            .iter()
            .map(|v| self.graph.neighbors(v).map(|(_, _, id)| self.entry(id, v) * r[id]).sum())
            .collect())
    }
}
