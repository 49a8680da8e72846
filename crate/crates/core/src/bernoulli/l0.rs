use super::design::{residual_norm2, Design};
use super::SparseUpdate;
use crate::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L0Options {
    /// After forward selection, try single removals, additions and swaps
    /// while they lower the objective.
    pub local_search: bool,
    /// Addition and swap moves are only tried when `|support| · cols` is at most this.
    pub swap_budget: usize,
    pub refit_tol: f64,
}

impl Default for L0Options {
    fn default() -> Self {
        Self { local_search: true, swap_budget: 20_000, refit_tol: 1e-12 }
    }
}

/// Least squares on the columns in `support` by CGLS, from zero.
/// Returns coefficients (aligned with `support`) and the residual `t − D x`.
pub fn refit<D: Design + ?Sized>(design: &D, support: &[usize], target: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>) {
    let k = support.len();
    let mut x = vec![0.0; k];
    let mut r = target.to_vec();
    if k == 0 {
        return (x, r);
    }
    let mut s: Vec<f64> = support.iter().map(|&j| design.column_dot(j, &r)).collect();
    let s0 = crate::norm2(&s);
    if s0 == 0.0 {
        return (x, r);
    }
    let mut p = s.clone();
    let mut gamma = s0 * s0;
    let mut q = vec![0.0; design.rows()];
    for _ in 0..(10 * k + 50) {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (i, &j) in support.iter().enumerate() {
            if p[i] != 0.0 {
                design.column_axpy(j, p[i], &mut q);
            }
        }
        let qq = crate::dot(&q, &q);
        if qq <= 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for i in 0..k {
            x[i] += alpha * p[i];
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        for (i, &j) in support.iter().enumerate() {
            s[i] = design.column_dot(j, &r);
        }
        let next = crate::dot(&s, &s);
        if next.sqrt() <= tol * s0 {
            break;
        }
        let beta = next / gamma;
        gamma = next;
        for i in 0..k {
            p[i] = s[i] + beta * p[i];
        }
    }
    (x, r)
}

/// `‖D x − t‖² + τ|S|` after refitting on `support`.
fn support_objective<D: Design + ?Sized>(design: &D, support: &[usize], target: &[f64], tau: f64, tol: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let (x, r) = refit(design, support, target, tol);
    (crate::dot(&r, &r) + tau * support.len() as f64, x, r)
}

/// Greedy `argmin ‖D x − t‖² + τ‖x‖₀`: forward selection by the largest
/// single-column reduction of the squared residual, least-squares refit on
/// the support, optional removal / swap polishing.
pub fn l0_greedy<D: Design + ?Sized>(design: &D, target: &[f64], tau: f64) -> Result<SparseUpdate> {
    l0_greedy_with(design, target, tau, &L0Options::default())
}

pub fn l0_greedy_with<D: Design + ?Sized>(design: &D, target: &[f64], tau: f64, opts: &L0Options) -> Result<SparseUpdate> {
    check_len("target", target.len(), design.rows())?;
    if !(tau > 0.0) || tau.is_nan() {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let p = design.cols();
    let norms: Vec<f64> = (0..p).map(|j| design.column_norm2(j)).collect();
    let mut in_support = vec![false; p];
    let mut support: Vec<usize> = Vec::new();
    let mut r = target.to_vec();
    let mut objective = crate::dot(&r, &r);
    let mut coeffs: Vec<f64> = Vec::new();
    let mut steps = 0;

    if tau.is_finite() {
        loop {
            let best = (0..p)
                .filter(|&j| !in_support[j] && norms[j] > 0.0)
                .map(|j| {
                    let c = design.column_dot(j, &r);
                    (j, c * c / norms[j])
                })
                .fold(None::<(usize, f64)>, |acc, (j, gain)| match acc {
                    Some((_, g)) if g >= gain => acc,
                    _ => Some((j, gain)),
                });
            let Some((j, gain)) = best else { break };
            if gain < tau {
                break;
            }
            let mut trial = support.clone();
            trial.push(j);
            trial.sort_unstable();
            let (obj, x, res) = support_objective(design, &trial, target, tau, opts.refit_tol);
            if obj >= objective {
                break;
            }
            in_support[j] = true;
            support = trial;
            coeffs = x;
            r = res;
            objective = obj;
            steps += 1;
        }

        if opts.local_search {
            let mut improved = true;
            while improved {
                improved = false;
                for pos in 0..support.len() {
                    let trial: Vec<usize> = support.iter().copied().enumerate().filter(|&(i, _)| i != pos).map(|(_, j)| j).collect();
                    let (obj, x, _) = support_objective(design, &trial, target, tau, opts.refit_tol);
                    if obj < objective * (1.0 - 1e-12) {
                        in_support[support[pos]] = false;
                        support = trial;
                        coeffs = x;
                        objective = obj;
                        steps += 1;
                        improved = true;
                        break;
                    }
                }
                if improved || support.len().max(1) * p > opts.swap_budget {
                    continue;
                }
                for j in 0..p {
                    if in_support[j] || norms[j] == 0.0 {
                        continue;
                    }
                    let mut trial = support.clone();
                    trial.push(j);
                    trial.sort_unstable();
                    let (obj, x, _) = support_objective(design, &trial, target, tau, opts.refit_tol);
                    if obj < objective * (1.0 - 1e-12) {
                        in_support[j] = true;
                        support = trial;
                        coeffs = x;
                        objective = obj;
                        steps += 1;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    continue;
                }
                'swap: for pos in 0..support.len() {
                    for j in 0..p {
                        if in_support[j] || norms[j] == 0.0 {
                            continue;
                        }
                        let mut trial = support.clone();
                        trial[pos] = j;
                        trial.sort_unstable();
                        let (obj, x, _) = support_objective(design, &trial, target, tau, opts.refit_tol);
                        if obj < objective * (1.0 - 1e-12) {
                            in_support[support[pos]] = false;
                            in_support[j] = true;
                            support = trial;
                            coeffs = x;
                            objective = obj;
                            steps += 1;
                            improved = true;
                            break 'swap;
                        }
                    }
                }
            }
        }
    }

    let mut x = vec![0.0; p];
    for (&j, &c) in support.iter().zip(&coeffs) {
        x[j] = c;
    }
    let mut update = SparseUpdate::from_x(x, 0.0, steps, true);
    update.objective = residual_norm2(design, &update.x, target) + tau * update.support.len() as f64;
    Ok(update)
}
