use crate::{check_len, Error, Result};

/// `‖f_true − f_est‖₂ / ‖f_true‖₂`.
pub fn relative_error(f_true: &[f64], f_est: &[f64]) -> Result<f64> {
    check_len("estimate", f_est.len(), f_true.len())?;
    let denom = crate::norm2(f_true);
    if denom == 0.0 {
        return Err(Error::DegenerateSignal("relative error against a zero signal".into()));
    }
    let diff: f64 = f_true.iter().zip(f_est).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff.sqrt() / denom)
}

pub fn pearson_correlation(f_true: &[f64], f_est: &[f64]) -> Result<f64> {
    check_len("estimate", f_est.len(), f_true.len())?;
    let (ma, mb) = (crate::mean(f_true), crate::mean(f_est));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in f_true.iter().zip(f_est) {
        let (da, db) = (a - ma, b - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateSignal("correlation undefined for a constant signal".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Median of finite values; `None` when there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}
