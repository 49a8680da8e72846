//! Jacobi-preconditioned conjugate gradients for the SDD systems every
//! denoiser reduces to, and harmonic interpolation built on top of it.
//!
//! An [`SddOperator`] is `diag(d) + τ·L(U, U)` for a vertex subset `U`
//! (all of `V` by default). It is positive definite as soon as `d` has a
//! positive entry, or when `U ≠ V` on a connected graph. The pure Laplacian
//! (`U = V`, `d ≡ 0`) is rejected up front rather than solved on `1⊥`.

use crate::graph::{Graph, VertexSet};
use crate::{check_len, dot, norm2, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `‖Ax − b‖ / ‖b‖`.
    pub tol: f64,
    /// `None` means `10·dim`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SddOperator<'g> {
    graph: &'g Graph,
    domain: Option<VertexSet>,
    /// Local index -> vertex.
    verts: Vec<usize>,
    /// Vertex -> local index, `usize::MAX` outside the domain.
    local: Vec<usize>,
    shift: Vec<f64>,
    scale: f64,
}

impl<'g> SddOperator<'g> {
    /// `diag(shift) + scale·L` over all vertices.
    pub fn shifted_laplacian(graph: &'g Graph, shift: Vec<f64>, scale: f64) -> Result<Self> {
        Self::new(graph, None, shift, scale)
    }

    /// `I + τL`.
    pub fn identity_plus(graph: &'g Graph, tau: f64) -> Result<Self> {
        Self::new(graph, None, vec![1.0; graph.n()], tau)
    }

    /// The principal submatrix `L(U, U)`.
    pub fn principal_laplacian(graph: &'g Graph, domain: &VertexSet) -> Result<Self> {
        Self::new(graph, Some(domain), vec![0.0; domain.len()], 1.0)
    }

    /// General form `diag(shift) + scale·L(U, U)`; `shift` is indexed by the
    /// members of `U` in order.
    pub fn new(graph: &'g Graph, domain: Option<&VertexSet>, shift: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be finite and >= 0, got {scale}")));
        }
        let (verts, local) = match domain {
            Some(d) => {
                d.check_universe(graph.n())?;
                (d.as_slice().to_vec(), d.positions())
            }
            None => ((0..graph.n()).collect(), (0..graph.n()).collect()),
        };
        check_len("diagonal shift", shift.len(), verts.len())?;
        if shift.iter().any(|&s| !(s.is_finite() && s >= 0.0)) {
            return Err(Error::InvalidArgument("diagonal shift must be finite and nonnegative".into()));
        }
        Ok(Self {
            graph,
            domain: domain.filter(|d| !d.is_full()).cloned(),
            verts,
            local,
            shift,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.verts.len()
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn domain(&self) -> Option<&VertexSet> {
        self.domain.as_ref()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("operand", x.len(), self.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let g = self.graph;
        if self.domain.is_none() {
            g.laplacian_apply_into(x, out);
            for i in 0..out.len() {
                out[i] = self.shift[i] * x[i] + self.scale * out[i];
            }
            return;
        }
        for (i, &a) in self.verts.iter().enumerate() {
            let mut acc = g.degree(a) * x[i];
            for (b, w, _) in g.neighbors(a) {
                let j = self.local[b];
                if j != usize::MAX {
                    acc -= w * x[j];
                }
            }
            out[i] = self.shift[i] * x[i] + self.scale * acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.verts
            .iter()
            .enumerate()
            .map(|(i, &a)| self.shift[i] + self.scale * self.graph.degree(a))
            .collect()
    }

    fn structurally_singular(&self) -> Option<&'static str> {
        let no_shift = self.shift.iter().all(|&s| s == 0.0);
        if no_shift && self.scale == 0.0 {
            Some("zero operator")
        } else if no_shift && self.domain.is_none() {
            Some("pure Laplacian over all vertices has the constants in its null space")
        } else {
            None
        }
    }
}

/// Solve `op · x = b` by Jacobi-preconditioned CG from `x = 0`.
pub fn cg_solve(op: &SddOperator, b: &[f64], opts: &CgOptions) -> Result<SolveReport> {
    check_len("right-hand side", b.len(), op.dim())?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if let Some(why) = op.structurally_singular() {
        return Err(Error::NotPositiveDefinite(why.into()));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("right-hand side is not finite".into()));
    }
    let dim = op.dim();
    let max_iter = opts.max_iter.unwrap_or(10 * dim.max(1));
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            solution: vec![0.0; dim],
            iterations: 0,
            relative_residual: 0.0,
            history: Vec::new(),
        });
    }

    let inv_diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; dim];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; dim];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();

    for it in 1..=max_iter {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite curvature at iteration {it}")));
        }
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "non-positive curvature pᵀAp = {pap:e} at iteration {it}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..dim {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::NumericalFailure(format!("residual diverged at iteration {it}")));
        }
        history.push(rel);
        if rel <= opts.tol {
            // Confirm against the true residual; recurrences drift.
            let true_rel = true_relative_residual(op, &x, b, bnorm);
            if true_rel <= opts.tol {
                return Ok(SolveReport {
                    solution: x,
                    iterations: it,
                    relative_residual: true_rel,
                    history,
                });
            }
            op.apply_into(&x, &mut ap);
            for i in 0..dim {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..dim {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..dim {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        relative_residual: true_relative_residual(op, &x, b, bnorm),
        best: x,
    })
}

fn true_relative_residual(op: &SddOperator, x: &[f64], b: &[f64], bnorm: f64) -> f64 {
    let mut ax = vec![0.0; x.len()];
    op.apply_into(x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum();
    r.sqrt() / bnorm
}

/// Minimum-energy extension of `obs` (given on `known`, in member order) to
/// the whole graph: `f(Sᶜ) = L(Sᶜ,Sᶜ)⁻¹ A(Sᶜ,S) obs`.
///
/// Values on `known` are copied verbatim. Interior values are clamped to
/// `[min obs, max obs]`, which the exact solution satisfies by the maximum
/// principle, so solver round-off never escapes that range.
pub fn harmonic_interpolate(graph: &Graph, known: &VertexSet, obs: &[f64]) -> Result<Vec<f64>> {
    harmonic_interpolate_with(graph, known, obs, &CgOptions::default())
}

pub fn harmonic_interpolate_with(
    graph: &Graph,
    known: &VertexSet,
    obs: &[f64],
    opts: &CgOptions,
) -> Result<Vec<f64>> {
    known.check_universe(graph.n())?;
    check_len("observations", obs.len(), known.len())?;
    if known.is_empty() {
        return Err(Error::SingularSystem("no observed vertices to interpolate from".into()));
    }
    let mut f = vec![0.0; graph.n()];
    for (v, &y) in known.iter().zip(obs) {
        f[v] = y;
    }
    if known.is_full() {
        return Ok(f);
    }
    let unknown = known.complement();
    check_unknown_components_touch(graph, known, &unknown)?;

    let mask = known.mask();
    let rhs: Vec<f64> = unknown
        .iter()
        .map(|a| {
            graph
                .neighbors(a)
                .filter(|&(b, _, _)| mask[b])
                .map(|(b, w, _)| w * f[b])
                .sum()
        })
        .collect();
    let op = SddOperator::principal_laplacian(graph, &unknown)?;
    let report = cg_solve(&op, &rhs, opts)?;
    let lo = obs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = obs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (a, x) in unknown.iter().zip(report.solution) {
        f[a] = x.clamp(lo, hi);
    }
    Ok(f)
}

fn check_unknown_components_touch(graph: &Graph, known: &VertexSet, unknown: &VertexSet) -> Result<()> {
    let in_known = known.mask();
    let mut seen = vec![false; graph.n()];
    let mut stack = Vec::new();
    for start in unknown.iter() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut touches = false;
        while let Some(u) = stack.pop() {
            for (v, _, _) in graph.neighbors(u) {
                if in_known[v] {
                    touches = true;
                } else if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if !touches {
            return Err(Error::SingularSystem(format!(
                "unobserved component containing vertex {start} has no edge to an observed vertex"
            )));
        }
    }
    Ok(())
}
