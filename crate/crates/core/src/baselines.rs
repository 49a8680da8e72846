//! Comparison denoisers: neighbour averaging, lazy diffusion (MAGIC-style),
//! spectral band limits and nuclear-norm shrinkage on grid images.

use nalgebra::DMatrix;

use crate::spectral::{FilterSpec, NormalizedBasis, SpectralBasis};
use crate::{check_len, Error, Graph, Result};

/// Image shape of a signal on a grid graph; vertex `r·width + c` is pixel `(r, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!("grid shape {height}x{width} is empty")));
        }
        Ok(Self { height, width })
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::str::FromStr for GridShape {
    type Err = Error;

    /// Parses `HxW`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("grid shape `{s}` is not of the form HxW"));
        let (h, w) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        Self::new(h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?)
    }
}

fn walk_step(graph: &Graph, f: &[f64], out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        let s: f64 = graph.neighbors(a).map(|(b, w, _)| w * f[b]).sum();
        *o = s / graph.degree(a);
    }
}

/// `t` rounds of replacing every value by the weighted mean of its
/// neighbours, i.e. `(D⁻¹A)^t g`.
pub fn local_average(g: &[f64], graph: &Graph, t: usize) -> Result<Vec<f64>> {
    check_len("signal", g.len(), graph.n())?;
    let mut f = g.to_vec();
    let mut next = vec![0.0; f.len()];
    for _ in 0..t {
        walk_step(graph, &f, &mut next);
        std::mem::swap(&mut f, &mut next);
    }
    Ok(f)
}

/// `((I + D⁻¹A)/2)^t g`, the filter `(1 − λ/2)^t` on the random-walk spectrum.
pub fn magic_filter(g: &[f64], graph: &Graph, t: usize) -> Result<Vec<f64>> {
    check_len("signal", g.len(), graph.n())?;
    let mut f = g.to_vec();
    let mut next = vec![0.0; f.len()];
    for _ in 0..t {
        walk_step(graph, &f, &mut next);
        for (n, x) in next.iter_mut().zip(&f) {
            *n = 0.5 * (*n + x);
        }
        std::mem::swap(&mut f, &mut next);
    }
    Ok(f)
}

/// Same filter as [`magic_filter`], evaluated through the normalized eigenbasis.
pub fn magic_filter_spectral(g: &[f64], basis: &NormalizedBasis, t: u32) -> Result<Vec<f64>> {
    basis.apply_random_walk_filter(&FilterSpec::Magic { t }, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keep {
    Low,
    High,
}

/// Projection onto the `k` lowest or highest Laplacian frequencies.
pub fn band_filter(g: &[f64], basis: &SpectralBasis, k: usize, keep: Keep) -> Result<Vec<f64>> {
    if k > basis.n() {
        return Err(Error::InvalidArgument(format!("band of {k} frequencies exceeds n = {}", basis.n())));
    }
    let spec = match keep {
        Keep::Low => FilterSpec::BandLow { k },
        Keep::High => FilterSpec::BandHigh { k },
    };
    basis.apply_filter(&spec, g)
}

/// `argmin ½‖f − g‖² + τ‖f‖_*` with `f` viewed as a `height × width` matrix.
pub fn nuclear_norm_denoise(g: &[f64], shape: GridShape, tau: f64) -> Result<Vec<f64>> {
    check_len("signal", g.len(), shape.len())?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(g.to_vec());
    }
    let m = DMatrix::from_row_slice(shape.height, shape.width, g);
    let mut svd = m.svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = (*s - tau).max(0.0);
    }
    let out = svd
        .recompose()
        .map_err(|e| Error::NumericalFailure(format!("SVD recomposition failed: {e}")))?;
    Ok((0..shape.height)
        .flat_map(|r| (0..shape.width).map(move |c| (r, c)))
        .map(|(r, c)| out[(r, c)])
        .collect())
}
