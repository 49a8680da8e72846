//! Dense reference path: eigendecomposition of `L`, the graph Fourier
//! transform, spectral filters `h(L) = Ψ h(Λ) Ψᵀ`, sampling from the
//! smoothness prior and the MAP error covariance.
//!
//! Capped at a few thousand vertices. Production denoisers never need the
//! spectrum; this module is what they are checked against.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{Graph, VertexSet};
use crate::linsolve::{cg_solve, CgOptions, SddOperator};
use crate::{check_len, Error, Result};

pub const DEFAULT_EIGEN_CAP: usize = 3000;

/// Eigenpairs of `L` in ascending order. Column 0 is the constant vector
/// `1/√n` with eigenvalue exactly 0; every other column has its
/// largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    lambdas: Vec<f64>,
    psi: DMatrix<f64>,
}

pub fn eigendecompose(graph: &Graph) -> Result<SpectralBasis> {
    eigendecompose_with_cap(graph, DEFAULT_EIGEN_CAP)
}

pub fn eigendecompose_with_cap(graph: &Graph, cap: usize) -> Result<SpectralBasis> {
    let n = graph.n();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let (lambdas, mut psi) = sorted_eigen(graph.dense_laplacian());
    let c = 1.0 / (n as f64).sqrt();
    psi.column_mut(0).fill(c);
    let mut lambdas = lambdas;
    lambdas[0] = 0.0;
    for l in lambdas.iter_mut().skip(1) {
        *l = l.max(0.0);
    }
    Ok(SpectralBasis { lambdas, psi })
}

/// Symmetric eigendecomposition sorted ascending with the sign convention.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut psi = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let pivot = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        psi.set_column(k, &(col * sign));
    }
    (lambdas, psi)
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.psi.column(i).iter().copied().collect()
    }

    /// `f̂(λ_i) = ⟨f, ψ_i⟩`.
    pub fn gft(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("signal", f.len(), self.n())?;
        let v = self.psi.tr_mul(&DVector::from_column_slice(f));
        Ok(v.iter().copied().collect())
    }

    pub fn igft(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len("coefficients", coeffs.len(), self.n())?;
        let v = &self.psi * DVector::from_column_slice(coeffs);
        Ok(v.iter().copied().collect())
    }

    /// `Σ_i h(λ_i) f̂(λ_i) ψ_i`.
    pub fn apply_filter(&self, spec: &FilterSpec, f: &[f64]) -> Result<Vec<f64>> {
        let response = spec.response(&self.lambdas)?;
        let mut coeffs = self.gft(f)?;
        for (c, h) in coeffs.iter_mut().zip(&response) {
            *c *= h;
        }
        self.igft(&coeffs)
    }
}

/// Filter response `h(λ)`.
#[derive(Clone)]
pub enum FilterSpec {
    /// `1/(1 + τλ)`, the Gaussian-noise MAP filter.
    GaussianMap { tau: f64 },
    /// `(1 − λ/2)^t`; meaningful on spectra inside `[0, 2]`.
    Magic { t: u32 },
    /// Keep the `k` lowest frequencies.
    BandLow { k: usize },
    /// Keep the `k` highest frequencies.
    BandHigh { k: usize },
    /// Piecewise-linear interpolation through `(lambdas[i], values[i])`,
    /// held constant outside the table.
    Table { lambdas: Vec<f64>, values: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for FilterSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::GaussianMap { tau } => write!(f, "GaussianMap {{ tau: {tau} }}"),
            Self::Magic { t } => write!(f, "Magic {{ t: {t} }}"),
            Self::BandLow { k } => write!(f, "BandLow {{ k: {k} }}"),
            Self::BandHigh { k } => write!(f, "BandHigh {{ k: {k} }}"),
            Self::Table { lambdas, .. } => write!(f, "Table {{ {} points }}", lambdas.len()),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl FilterSpec {
    /// Response at each eigenvalue of an ascending spectrum.
    pub fn response(&self, lambdas: &[f64]) -> Result<Vec<f64>> {
        let n = lambdas.len();
        let h: Vec<f64> = match self {
            Self::GaussianMap { tau } => {
                if !(*tau >= 0.0) {
                    return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
                }
                lambdas.iter().map(|l| 1.0 / (1.0 + tau * l)).collect()
            }
            Self::Magic { t } => lambdas.iter().map(|l| (1.0 - l / 2.0).powi(*t as i32)).collect(),
            Self::BandLow { k } => (0..n).map(|i| if i < *k { 1.0 } else { 0.0 }).collect(),
            Self::BandHigh { k } => (0..n).map(|i| if i + k >= n { 1.0 } else { 0.0 }).collect(),
            Self::Table { lambdas: xs, values } => {
                if xs.is_empty() || xs.len() != values.len() || xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidArgument(
                        "filter table needs matching, strictly increasing breakpoints".into(),
                    ));
                }
                lambdas.iter().map(|&l| interpolate(xs, values, l)).collect()
            }
            Self::Custom(h) => lambdas.iter().map(|&l| h(l)).collect(),
        };
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("filter response is not finite on the spectrum".into()));
        }
        Ok(h)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v <= x);
    let (x0, x1, y0, y1) = (xs[hi - 1], xs[hi], ys[hi - 1], ys[hi]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Draw from the smoothness prior with `f̂(λ_1) = mean_coeff` and
/// `f̂(λ_i) ~ N(0, 1/(2κλ_i))` for `i ≥ 2`.
pub fn sample_prior<R: Rng + ?Sized>(basis: &SpectralBasis, kappa: f64, mean_coeff: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let coeffs: Vec<f64> = basis
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            if i == 0 {
                mean_coeff
            } else {
                let z: f64 = StandardNormal.sample(rng);
                z / (2.0 * kappa * l).sqrt()
            }
        })
        .collect();
    basis.igft(&coeffs)
}

pub fn sample_prior_seeded(basis: &SpectralBasis, kappa: f64, mean_coeff: f64, seed: u64) -> Result<Vec<f64>> {
    sample_prior(basis, kappa, mean_coeff, &mut crate::rng::stream(seed, &[]))
}

/// Prior sample without an eigenbasis: `f = L⁺Bᵀz / √(2κ)` with
/// `z ~ N(0, I_m)`, whose covariance is `L⁺/(2κ)`, plus the constant
/// component `mean_coeff/√n`. `L⁺` is applied by grounding vertex 0 and
/// solving the reduced system with CG.
pub fn sample_prior_matrix_free<R: Rng + ?Sized>(
    graph: &Graph,
    kappa: f64,
    mean_coeff: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let n = graph.n();
    let z: Vec<f64> = (0..graph.m()).map(|_| StandardNormal.sample(rng)).collect();
    let y = graph.incidence_transpose_apply(&z)?;
    let x = laplacian_pseudo_solve(graph, &y)?;
    let shift = mean_coeff / (n as f64).sqrt();
    let scale = 1.0 / (2.0 * kappa).sqrt();
    Ok(x.into_iter().map(|v| v * scale + shift).collect())
}

/// `L⁺y` for `y ⊥ 1`, returned with zero mean.
pub fn laplacian_pseudo_solve(graph: &Graph, y: &[f64]) -> Result<Vec<f64>> {
    check_len("right-hand side", y.len(), graph.n())?;
    let n = graph.n();
    let rest = VertexSet::new(n, 1..n)?;
    let op = SddOperator::principal_laplacian(graph, &rest)?;
    let mean = crate::mean(y);
    let rhs: Vec<f64> = y[1..].iter().map(|v| v - mean).collect();
    let sol = cg_solve(&op, &rhs, &CgOptions::with_tol(1e-12))?;
    let mut x = Vec::with_capacity(n);
    x.push(0.0);
    x.extend(sol.solution);
    let m = crate::mean(&x);
    Ok(x.into_iter().map(|v| v - m).collect())
}

/// Diagonal (in the eigenbasis) of the MAP error covariance:
/// `0` at `λ_1`, `σ²/(2κσ²λ_i + 1)` elsewhere.
pub fn map_error_covariance_diag(basis: &SpectralBasis, kappa: f64, sigma2: f64) -> Result<Vec<f64>> {
    if !(kappa >= 0.0 && kappa.is_finite()) || !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kappa and sigma2 must be finite and >= 0, got {kappa}, {sigma2}"
        )));
    }
    Ok(basis
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| if i == 0 { 0.0 } else { sigma2 / (2.0 * kappa * sigma2 * l + 1.0) })
        .collect())
}

/// Eigenbasis of the symmetric normalized Laplacian `I − D^{-1/2} A D^{-1/2}`,
/// used to evaluate filters on the random-walk spectrum (which lies in `[0, 2]`).
#[derive(Debug, Clone)]
pub struct NormalizedBasis {
    mus: Vec<f64>,
    phi: DMatrix<f64>,
    sqrt_deg: Vec<f64>,
}

pub fn normalized_eigendecompose(graph: &Graph) -> Result<NormalizedBasis> {
    let n = graph.n();
    if n > DEFAULT_EIGEN_CAP {
        return Err(Error::TooLarge { n, cap: DEFAULT_EIGEN_CAP });
    }
    let sqrt_deg: Vec<f64> = graph.degrees().iter().map(|d| d.sqrt()).collect();
    let mut m = DMatrix::identity(n, n);
    for e in graph.edges() {
        let v = e.w / (sqrt_deg[e.a] * sqrt_deg[e.b]);
        m[(e.a, e.b)] -= v;
        m[(e.b, e.a)] -= v;
    }
    let (mus, phi) = sorted_eigen(m);
    Ok(NormalizedBasis { mus, phi, sqrt_deg })
}

impl NormalizedBasis {
    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    /// `D^{-1/2} Φ h(M) Φᵀ D^{1/2} f`, i.e. `h` applied to the random-walk
    /// Laplacian `I − D⁻¹A`.
    pub fn apply_random_walk_filter(&self, spec: &FilterSpec, f: &[f64]) -> Result<Vec<f64>> {
        check_len("signal", f.len(), self.mus.len())?;
        let response = spec.response(&self.mus)?;
        let scaled = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_deg).map(|(x, s)| x * s));
        let mut c = self.phi.tr_mul(&scaled);
        for (ci, h) in c.iter_mut().zip(&response) {
            *ci *= h;
        }
        let out = &self.phi * c;
        Ok(out.iter().zip(&self.sqrt_deg).map(|(x, s)| x / s).collect())
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(())
}
