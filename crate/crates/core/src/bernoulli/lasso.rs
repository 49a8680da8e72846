use super::design::{residual_norm2, Design};
use super::SparseUpdate;
use crate::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Absolute tolerance on the optimality conditions.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_sweeps: 100_000 }
    }
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `argmin ‖D x − t‖² + τ‖x‖₁` by cyclic coordinate descent.
pub fn lasso_coordinate_descent<D: Design + ?Sized>(
    design: &D,
    target: &[f64],
    tau: f64,
    opts: &LassoOptions,
) -> Result<SparseUpdate> {
    check_len("target", target.len(), design.rows())?;
    if !(tau > 0.0) || tau.is_nan() {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let p = design.cols();
    if tau.is_infinite() {
        return Ok(SparseUpdate::from_x(vec![0.0; p], residual_norm2(design, &vec![0.0; p], target), 0, true));
    }
    let norms: Vec<f64> = (0..p).map(|j| design.column_norm2(j)).collect();
    let mut x = vec![0.0; p];
    // r = t − D x
    let mut r = target.to_vec();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for j in 0..p {
            if norms[j] == 0.0 {
                continue;
            }
            let rho = design.column_dot(j, &r) + norms[j] * x[j];
            let next = soft(rho, tau / 2.0) / norms[j];
            let delta = next - x[j];
            if delta != 0.0 {
                design.column_axpy(j, -delta, &mut r);
                x[j] = next;
            }
        }
        if sweeps % 16 == 0 {
            let dx = design.apply(&x);
            for ((ri, t), d) in r.iter_mut().zip(target).zip(&dx) {
                *ri = t - d;
            }
        }
        if kkt_violation(design, &x, target, tau) <= opts.tol {
            converged = true;
            break;
        }
    }
    let mut update = SparseUpdate::from_x(x, 0.0, sweeps, converged);
    update.objective = residual_norm2(design, &update.x, target) + tau * update.x.iter().map(|v| v.abs()).sum::<f64>();
    if !converged {
        log::warn!("lasso stopped after {sweeps} sweeps without meeting tolerance {}", opts.tol);
    }
    Ok(update)
}

/// Largest violation of the LASSO optimality conditions at `x`:
/// `|∇_j + τ sign x_j|` on the support, `max(|∇_j| − τ, 0)` off it, with
/// `∇ = 2 Dᵀ(D x − t)`.
pub fn kkt_violation<D: Design + ?Sized>(design: &D, x: &[f64], target: &[f64], tau: f64) -> f64 {
    let dx = design.apply(x);
    let res: Vec<f64> = dx.iter().zip(target).map(|(a, b)| a - b).collect();
    (0..design.cols())
        .map(|j| {
            let grad = 2.0 * design.column_dot(j, &res);
            if x[j] != 0.0 {
                (grad + tau * x[j].signum()).abs()
            } else {
                (grad.abs() - tau).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}
