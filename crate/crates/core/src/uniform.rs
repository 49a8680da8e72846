//! MAP denoising under uniform scaling noise `g(a) = u(a) f(a)`,
//! `u(a) ~ Unif[0, 1]`.
//!
//! The negative log posterior on the admissible set
//! `Ω_g = {f : |f(a)| ≥ |g(a)|, sign f(a) = sign g(a)}` is
//! `κ fᵀLf + Σ_a log|f(a)|`, a convex quadratic plus a concave term. The
//! convex-concave procedure linearizes the logarithm at the current iterate
//! and solves the resulting bound-constrained QP
//!
//! ```text
//! f⁺ = argmin_{f ∈ Ω_g}  κ fᵀLf + Σ_a sign(g(a)) f(a) / |f_t(a)|
//! ```
//!
//! which majorizes the loss, so every accepted step is a descent step.
//! Vertices with `g(a) = 0` are pinned at zero and left out of the log sum.
//!
//! Internally everything runs in the reflected variable `y = sign(g)·f ≥ |g|`,
//! where the feasible set is a plain lower-bounded box.

use std::time::Instant;

use rand::Rng;

use crate::graph::Graph;
use crate::{check_len, DenoiseResult, Error, Result};

/// Per-vertex admissible intervals derived from an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformFeasibleRegion {
    /// `+1`, `−1`, or `0` (pinned at zero).
    signs: Vec<f64>,
    /// `|g(a)|`.
    lower: Vec<f64>,
}

impl UniformFeasibleRegion {
    pub fn from_observation(g: &[f64]) -> Result<Self> {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("observation is not finite".into()));
        }
        Ok(Self {
            signs: g.iter().map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 }).collect(),
            lower: g.iter().map(|v| v.abs()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn is_pinned(&self, a: usize) -> bool {
        self.signs[a] == 0.0
    }

    pub fn contains(&self, f: &[f64]) -> bool {
        f.len() == self.len()
            && f.iter().enumerate().all(|(a, &v)| {
                if self.signs[a] == 0.0 {
                    v == 0.0
                } else {
                    self.signs[a] * v >= self.lower[a]
                }
            })
    }

    /// Closest feasible point, coordinatewise.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(a, &v)| self.signs[a] * (self.signs[a] * v).max(self.lower[a]))
            .collect()
    }

    fn from_reflected(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.signs).map(|(v, s)| v * s).collect()
    }
}

/// `κ fᵀLf + Σ_{f(a) ≠ 0} log|f(a)|`; zero entries are treated as pinned.
pub fn uniform_loss(f: &[f64], graph: &Graph, kappa: f64) -> Result<f64> {
    check_len("signal", f.len(), graph.n())?;
    check_kappa(kappa)?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal is not finite".into()));
    }
    Ok(kappa * graph.dirichlet_energy_unchecked(f) + f.iter().filter(|&&v| v != 0.0).map(|v| v.abs().ln()).sum::<f64>())
}

/// Loss and solver history of an iterative uniform-noise run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    /// Loss at the initial point followed by one entry per accepted step.
    pub losses: Vec<f64>,
    /// Inner work per step: QP iterations for CCP, step halvings for
    /// projected gradient.
    pub inner_iterations: Vec<usize>,
    /// Seconds since the start, aligned with `losses`.
    pub elapsed_s: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformOutcome {
    pub result: DenoiseResult,
    pub trace: LossTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcpOptions {
    pub kappa: f64,
    pub max_outer: usize,
    /// Stop when `|ΔL| ≤ tol·|L(f⁰)|`.
    pub tol: f64,
    /// Projected-gradient stationarity target of the inner QP, relative to
    /// the size of its linear term.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Relative amount by which `g` is pushed into the interior for `f⁰`.
    pub init_scale: f64,
    /// Optional extra random interior push in `[0, jitter]`, drawn from `seed`.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for CcpOptions {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            max_outer: 100,
            tol: 1e-7,
            inner_tol: 1e-8,
            inner_max_iter: 2000,
            init_scale: 1e-3,
            jitter: 0.0,
            seed: 0,
        }
    }
}

/// Strictly feasible start: `g` pushed outward by `init_scale` (plus jitter).
fn initial_point(region: &UniformFeasibleRegion, scale: f64, jitter: f64, seed: u64) -> Vec<f64> {
    let mut rng = crate::rng::stream(seed, &[crate::rng::label("uniform-init")]);
    region
        .lower
        .iter()
        .map(|&l| {
            let extra = if jitter > 0.0 { rng.random::<f64>() * jitter } else { 0.0 };
            l * (1.0 + scale + extra)
        })
        .collect()
}

struct Reflected<'a> {
    graph: &'a Graph,
    region: &'a UniformFeasibleRegion,
    kappa: f64,
}

impl Reflected<'_> {
    fn energy(&self, y: &[f64]) -> f64 {
        let f = self.region.from_reflected(y);
        self.graph.dirichlet_energy_unchecked(&f)
    }

    fn loss(&self, y: &[f64]) -> f64 {
        self.kappa * self.energy(y)
            + y.iter()
                .enumerate()
                .filter(|&(a, _)| !self.region.is_pinned(a))
                .map(|(_, v)| v.ln())
                .sum::<f64>()
    }

    /// `out = 2κ S L S v`, zero on pinned vertices.
    fn hess_apply(&self, v: &[f64], out: &mut [f64]) {
        let f = self.region.from_reflected(v);
        self.graph.laplacian_apply_into(&f, out);
        for (a, o) in out.iter_mut().enumerate() {
            *o *= 2.0 * self.kappa * self.region.signs[a];
        }
    }

    fn project(&self, y: &mut [f64]) {
        for (a, v) in y.iter_mut().enumerate() {
            *v = if self.region.is_pinned(a) { 0.0 } else { v.max(self.region.lower[a]) };
        }
    }
}

/// `min κ yᵀMy + cᵀy` over `y ≥ lower`, by gradient projection followed by
/// CG on the free face, with a monotone line search on both phases.
/// Returns the minimizer and the number of outer iterations used.
fn minimize_bounded_qp(problem: &Reflected, linear: &[f64], start: Vec<f64>, tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let n = start.len();
    let region = problem.region;
    let value = |y: &[f64]| problem.kappa * problem.energy(y) + crate::dot(linear, y);
    let gradient = |y: &[f64], out: &mut Vec<f64>| {
        problem.hess_apply(y, out);
        for a in 0..n {
            out[a] = if region.is_pinned(a) { 0.0 } else { out[a] + linear[a] };
        }
    };
    let scale = linear.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let at_bound = |y: &[f64], a: usize| y[a] <= region.lower[a];

    let mut y = start;
    let mut q = value(&y);
    let mut grad = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        gradient(&y, &mut grad);
        let pg: Vec<f64> = (0..n)
            .map(|a| {
                if region.is_pinned(a) {
                    0.0
                } else if at_bound(&y, a) {
                    grad[a].min(0.0)
                } else {
                    grad[a]
                }
            })
            .collect();
        let pg_norm = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pg_norm <= tol * scale {
            break;
        }

        // Projected gradient step with a Cauchy-type initial length.
        problem.hess_apply(&pg, &mut work);
        let curv = crate::dot(&pg, &work);
        let mut alpha = if curv > 0.0 { crate::dot(&pg, &pg) / curv } else { 1.0 };
        let mut moved = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = (0..n).map(|a| y[a] - alpha * grad[a]).collect();
            problem.project(&mut trial);
            let decrease: f64 = (0..n).map(|a| grad[a] * (trial[a] - y[a])).sum();
            let qt = value(&trial);
            if qt <= q + 1e-4 * decrease {
                moved = qt < q;
                y = trial;
                q = qt;
                break;
            }
            alpha *= 0.5;
        }

        // Conjugate gradients on the free variables.
        gradient(&y, &mut grad);
        let free: Vec<bool> = (0..n).map(|a| !region.is_pinned(a) && !(at_bound(&y, a) && grad[a] > 0.0)).collect();
        let mut r: Vec<f64> = (0..n).map(|a| if free[a] { -grad[a] } else { 0.0 }).collect();
        let r0 = crate::norm2(&r);
        if r0 == 0.0 {
            if !moved {
                break;
            }
            continue;
        }
        let mut d = vec![0.0; n];
        let mut p = r.clone();
        let mut rr = r0 * r0;
        for _ in 0..n.min(200) {
            problem.hess_apply(&p, &mut work);
            for a in 0..n {
                if !free[a] {
                    work[a] = 0.0;
                }
            }
            let pap = crate::dot(&p, &work);
            if pap <= 0.0 {
                break;
            }
            let step = rr / pap;
            for a in 0..n {
                d[a] += step * p[a];
                r[a] -= step * work[a];
            }
            let rr_next = crate::dot(&r, &r);
            if rr_next.sqrt() <= 0.05 * r0 {
                break;
            }
            let beta = rr_next / rr;
            rr = rr_next;
            for a in 0..n {
                p[a] = r[a] + beta * p[a];
            }
        }
        let mut beta = 1.0;
        for _ in 0..40 {
            let mut trial: Vec<f64> = (0..n).map(|a| y[a] + beta * d[a]).collect();
            problem.project(&mut trial);
            let qt = value(&trial);
            if qt < q {
                moved = true;
                y = trial;
                q = qt;
                break;
            }
            beta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (y, iterations)
}

/// Convex-concave procedure for the uniform-noise MAP.
pub fn ccp_denoise(g: &[f64], graph: &Graph, opts: &CcpOptions) -> Result<UniformOutcome> {
    check_len("signal", g.len(), graph.n())?;
    check_kappa(opts.kappa)?;
    let region = UniformFeasibleRegion::from_observation(g)?;
    let problem = Reflected { graph, region: &region, kappa: opts.kappa };
    let start = Instant::now();

    let mut y = initial_point(&region, opts.init_scale, opts.jitter, opts.seed);
    let mut loss = problem.loss(&y);
    let loss0 = loss;
    let mut trace = LossTrace {
        losses: vec![loss],
        inner_iterations: vec![0],
        elapsed_s: vec![0.0],
        wall_time_s: 0.0,
    };
    let mut converged = false;
    let mut outer = 0;
    while outer < opts.max_outer {
        let linear: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(a, &v)| if region.is_pinned(a) { 0.0 } else { 1.0 / v })
            .collect();
        let (next, inner) = minimize_bounded_qp(&problem, &linear, y.clone(), opts.inner_tol, opts.inner_max_iter);
        let next_loss = problem.loss(&next);
        if !next_loss.is_finite() {
            return Err(Error::NumericalFailure(format!("loss became {next_loss} at outer iteration {}", outer + 1)));
        }
        if next_loss > loss {
            // The surrogate step no longer descends: we are at a fixed point
            // up to round-off.
            converged = true;
            break;
        }
        outer += 1;
        let change = loss - next_loss;
        y = next;
        loss = next_loss;
        trace.losses.push(loss);
        trace.inner_iterations.push(inner);
        trace.elapsed_s.push(start.elapsed().as_secs_f64());
        if change <= opts.tol * stopping_scale(loss0) {
            converged = true;
            break;
        }
    }
    trace.wall_time_s = start.elapsed().as_secs_f64();
    Ok(UniformOutcome {
        result: DenoiseResult {
            signal: region.from_reflected(&y),
            trace: trace.losses.clone(),
            iterations: outer,
            converged,
        },
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedGradientOptions {
    pub kappa: f64,
    /// Initial step length tried at every iteration; halved until the loss
    /// does not increase.
    pub step: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub init_scale: f64,
}

impl Default for ProjectedGradientOptions {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            step: 1.0,
            max_iter: 10_000,
            tol: 1e-7,
            init_scale: 1e-3,
        }
    }
}

/// Projected gradient descent on the true loss, from the same strictly
/// feasible start as [`ccp_denoise`].
pub fn projected_gradient_denoise(g: &[f64], graph: &Graph, opts: &ProjectedGradientOptions) -> Result<UniformOutcome> {
    check_len("signal", g.len(), graph.n())?;
    check_kappa(opts.kappa)?;
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {}", opts.step)));
    }
    let region = UniformFeasibleRegion::from_observation(g)?;
    let problem = Reflected { graph, region: &region, kappa: opts.kappa };
    let n = g.len();
    let start = Instant::now();

    let mut y = initial_point(&region, opts.init_scale, 0.0, 0);
    let mut loss = problem.loss(&y);
    let loss0 = loss;
    let mut trace = LossTrace {
        losses: vec![loss],
        inner_iterations: vec![0],
        elapsed_s: vec![0.0],
        wall_time_s: 0.0,
    };
    let mut grad = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        problem.hess_apply(&y, &mut grad);
        for a in 0..n {
            grad[a] = if region.is_pinned(a) { 0.0 } else { grad[a] + 1.0 / y[a] };
        }
        let mut gamma = opts.step;
        let mut halvings = 0;
        let accepted = loop {
            let mut trial: Vec<f64> = (0..n).map(|a| y[a] - gamma * grad[a]).collect();
            problem.project(&mut trial);
            let trial_loss = problem.loss(&trial);
            if trial_loss.is_nan() {
                return Err(Error::NumericalFailure(format!("loss is NaN at iteration {}", iterations + 1)));
            }
            if trial_loss <= loss {
                break Some((trial, trial_loss));
            }
            gamma *= 0.5;
            halvings += 1;
            if gamma < 1e-14 * opts.step {
                break None;
            }
        };
        let Some((next, next_loss)) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;
        let change = loss - next_loss;
        y = next;
        loss = next_loss;
        trace.losses.push(loss);
        trace.inner_iterations.push(halvings);
        trace.elapsed_s.push(start.elapsed().as_secs_f64());
        if change <= opts.tol * stopping_scale(loss0) {
            converged = true;
            break;
        }
    }
    trace.wall_time_s = start.elapsed().as_secs_f64();
    Ok(UniformOutcome {
        result: DenoiseResult {
            signal: region.from_reflected(&y),
            trace: trace.losses.clone(),
            iterations,
            converged,
        },
        trace,
    })
}

fn stopping_scale(loss0: f64) -> f64 {
    if loss0 == 0.0 {
        1.0
    } else {
        loss0.abs()
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(())
}
