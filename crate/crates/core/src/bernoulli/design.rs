use crate::graph::IncidenceColumns;
use crate::{Error, Result};

/// Column access needed by the sparse regression solvers.
pub trait Design: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `Σ_i D(i, j) r(i)`.
    fn column_dot(&self, j: usize, r: &[f64]) -> f64;
    /// `r += alpha · D(:, j)`.
    fn column_axpy(&self, j: usize, alpha: f64, r: &mut [f64]);
    fn column_norm2(&self, j: usize) -> f64;

    /// `D x`.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                self.column_axpy(j, v, &mut out);
            }
        }
        out
    }
}

impl Design for IncidenceColumns<'_> {
    fn rows(&self) -> usize {
        self.graph().m()
    }

    fn cols(&self) -> usize {
        self.columns().len()
    }

    fn column_dot(&self, j: usize, r: &[f64]) -> f64 {
        let v = self.columns().as_slice()[j];
        self.graph().neighbors(v).map(|(_, _, id)| self.entry(id, v) * r[id]).sum()
    }

    fn column_axpy(&self, j: usize, alpha: f64, r: &mut [f64]) {
        let v = self.columns().as_slice()[j];
        for (_, _, id) in self.graph().neighbors(v) {
            r[id] += alpha * self.entry(id, v);
        }
    }

    fn column_norm2(&self, j: usize) -> f64 {
        self.graph().degree(self.columns().as_slice()[j])
    }
}

/// Dense column-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDesign {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseDesign {
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {rows}x{cols} design",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Result<Self> {
        Self::from_column_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }
}

impl Design for DenseDesign {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn column_dot(&self, j: usize, r: &[f64]) -> f64 {
        crate::dot(self.column(j), r)
    }

    fn column_axpy(&self, j: usize, alpha: f64, r: &mut [f64]) {
        for (ri, d) in r.iter_mut().zip(self.column(j)) {
            *ri += alpha * d;
        }
    }

    fn column_norm2(&self, j: usize) -> f64 {
        crate::dot(self.column(j), self.column(j))
    }
}

/// Squared residual `‖D x − t‖²`.
pub fn residual_norm2<D: Design + ?Sized>(design: &D, x: &[f64], target: &[f64]) -> f64 {
    design
        .apply(x)
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}
