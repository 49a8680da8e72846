//! MAP denoising under additive Gaussian noise: `f = (I + τL)⁻¹ g` with
//! `τ = 2κσ²`, and a method-of-moments estimate of `τ`.
//!
//! The moment system equates the observed quadratic forms with their
//! expectations under the model,
//!
//! ```text
//! E[gᵀLg]  = σ² tr(L)  + (n−1)/(2κ)
//! E[gᵀL²g] = σ² tr(L²) + tr(L)/(2κ)
//! ```
//!
//! and `τ̂ = σ̂² / (2κ̂)⁻¹`. Written out this is
//! `((n−1)‖Lg‖² − tr(L) gᵀLg) / (tr(L²) gᵀLg − tr(L) ‖Lg‖²)`; the form with
//! both numerator and denominator negated is the same quantity. When the
//! unconstrained solution has a non-positive component the system is
//! solved by nonnegative least squares instead (projection onto the cone
//! spanned by the two columns).

use crate::graph::Graph;
use crate::linsolve::{cg_solve, CgOptions, SddOperator};
use crate::{check_len, mean, par, DenoiseResult, Error, Result};

/// `τ = 2κσ²`, optionally with its factors when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub tau: f64,
    pub kappa: Option<f64>,
    pub sigma2: Option<f64>,
}

impl GaussianParams {
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
        }
        Ok(Self { tau, kappa: None, sigma2: None })
    }

    pub fn from_kappa_sigma2(kappa: f64, sigma2: f64) -> Result<Self> {
        if !(kappa >= 0.0 && sigma2 >= 0.0) {
            return Err(Error::InvalidArgument("kappa and sigma2 must be >= 0".into()));
        }
        Ok(Self {
            tau: 2.0 * kappa * sigma2,
            kappa: Some(kappa),
            sigma2: Some(sigma2),
        })
    }
}

/// Solve `(I + τL) f = g`. The constant component is carried through
/// exactly and the CG solution is re-centred, so `Σf = Σg` up to rounding.
/// `τ = +∞` returns the constant signal at the mean of `g`.
pub fn denoise_gaussian(g: &[f64], graph: &Graph, tau: f64) -> Result<DenoiseResult> {
    denoise_gaussian_with(g, graph, tau, &CgOptions::with_tol(1e-12))
}

pub fn denoise_gaussian_with(g: &[f64], graph: &Graph, tau: f64, opts: &CgOptions) -> Result<DenoiseResult> {
    check_len("signal", g.len(), graph.n())?;
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal is not finite".into()));
    }
    let mu = mean(g);
    if tau == 0.0 {
        return Ok(DenoiseResult::exact(g.to_vec()));
    }
    if tau.is_infinite() {
        return Ok(DenoiseResult::exact(vec![mu; g.len()]));
    }
    let centred: Vec<f64> = g.iter().map(|v| v - mu).collect();
    let op = SddOperator::identity_plus(graph, tau)?;
    let rep = cg_solve(&op, &centred, opts)?;
    let drift = mean(&rep.solution);
    Ok(DenoiseResult {
        signal: rep.solution.iter().map(|v| v - drift + mu).collect(),
        trace: rep.history,
        iterations: rep.iterations,
        converged: true,
    })
}

/// Which branch of the moment fit produced the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitCase {
    /// Exact solution with both parameters positive.
    Interior,
    /// Nonnegative least squares landed on one axis of the cone.
    Boundary,
    /// Both fitted parameters are zero.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFit {
    pub sigma2: f64,
    /// `(2κ)⁻¹`.
    pub inv2kappa: f64,
    pub case: FitCase,
}

impl MomentFit {
    /// `τ̂ = σ̂²/(2κ̂)⁻¹`; `+∞` when only the noise term survives and 0 when
    /// nothing does.
    pub fn tau(&self) -> f64 {
        if self.sigma2 == 0.0 {
            0.0
        } else if self.inv2kappa == 0.0 {
            f64::INFINITY
        } else {
            self.sigma2 / self.inv2kappa
        }
    }
}

/// Observed `(gᵀLg, ‖Lg‖²)` for one signal.
pub fn quadratic_moments(g: &[f64], graph: &Graph) -> Result<(f64, f64)> {
    let lg = graph.laplacian_apply(g)?;
    let m1 = crate::dot(g, &lg);
    let m2 = crate::dot(&lg, &lg);
    Ok((m1, m2))
}

/// Nonnegative least-squares fit of `M [σ², (2κ)⁻¹]ᵀ = [m1, m2]ᵀ` with
/// `M = [[tr L, n−1], [tr L², tr L]]`.
pub fn nonneg_moment_fit(m1: f64, m2: f64, graph: &Graph) -> Result<MomentFit> {
    if !(m1.is_finite() && m2.is_finite()) {
        return Err(Error::InvalidArgument("moment targets must be finite".into()));
    }
    let n1 = graph.n() as f64 - 1.0;
    let (t1, t2) = (graph.trace_l(), graph.trace_l2());
    let c1 = [t1, t2];
    let c2 = [n1, t1];
    let b = [m1, m2];

    let det = t1 * t1 - n1 * t2;
    let scale = (t1 * t1).max(n1 * t2).max(f64::MIN_POSITIVE);
    if det.abs() > 1e-12 * scale {
        let x1 = (t1 * m1 - n1 * m2) / det;
        let x2 = (t1 * m2 - t2 * m1) / det;
        if x1 > 0.0 && x2 > 0.0 {
            return Ok(MomentFit { sigma2: x1, inv2kappa: x2, case: FitCase::Interior });
        }
    }

    let axis = |c: [f64; 2]| -> (f64, f64) {
        let alpha = ((c[0] * b[0] + c[1] * b[1]) / (c[0] * c[0] + c[1] * c[1])).max(0.0);
        let r = (b[0] - alpha * c[0]).hypot(b[1] - alpha * c[1]);
        (alpha, r)
    };
    let (a1, r1) = axis(c1);
    let (a2, r2) = axis(c2);
    let (sigma2, inv2kappa) = if r1 <= r2 { (a1, 0.0) } else { (0.0, a2) };
    let case = if sigma2 == 0.0 && inv2kappa == 0.0 {
        FitCase::Origin
    } else {
        FitCase::Boundary
    };
    Ok(MomentFit { sigma2, inv2kappa, case })
}

/// Full moment fit for one signal.
pub fn fit_tau(g: &[f64], graph: &Graph) -> Result<MomentFit> {
    let (m1, m2) = quadratic_moments(g, graph)?;
    if m1 == 0.0 && m2 == 0.0 {
        return Err(Error::DegenerateSignal("signal is constant, both moments vanish".into()));
    }
    finish_fit(nonneg_moment_fit(m1, m2, graph)?)
}

/// `τ̂` from a single signal.
pub fn estimate_tau(g: &[f64], graph: &Graph) -> Result<f64> {
    Ok(fit_tau(g, graph)?.tau())
}

/// `τ̂` from the averaged moments of several i.i.d. signals.
pub fn estimate_tau_multi<S: AsRef<[f64]> + Sync>(signals: &[S], graph: &Graph) -> Result<f64> {
    Ok(fit_tau_multi(signals, graph)?.tau())
}

pub fn fit_tau_multi<S: AsRef<[f64]> + Sync>(signals: &[S], graph: &Graph) -> Result<MomentFit> {
    if signals.is_empty() {
        return Err(Error::InvalidArgument("no signals given".into()));
    }
    let moments = par::map_slice(signals, |s| quadratic_moments(s.as_ref(), graph));
    let mut sum = (0.0, 0.0);
    for m in moments {
        let (m1, m2) = m?;
        sum.0 += m1;
        sum.1 += m2;
    }
    if sum.0 == 0.0 && sum.1 == 0.0 {
        return Err(Error::DegenerateSignal("every signal is constant".into()));
    }
    let k = signals.len() as f64;
    finish_fit(nonneg_moment_fit(sum.0 / k, sum.1 / k, graph)?)
}

fn finish_fit(fit: MomentFit) -> Result<MomentFit> {
    if fit.case == FitCase::Origin {
        log::warn!("moment fit collapsed to zero; using tau = 0 (no smoothing)");
    }
    Ok(fit)
}

/// Denoise each signal with the same `τ`, in parallel when enabled.
pub fn denoise_gaussian_batch<S: AsRef<[f64]> + Sync>(signals: &[S], graph: &Graph, tau: f64) -> Result<Vec<DenoiseResult>> {
    par::map_slice(signals, |s| denoise_gaussian(s.as_ref(), graph, tau))
        .into_iter()
        .collect()
}
