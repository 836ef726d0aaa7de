//! Log-log rate fitting for decay and convergence series.

use crate::error::{HarnessError, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least-squares line on (log t, log value) over the window. Requires at
/// least five strictly positive points.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .cloned()
        .collect();
    if pts.len() < 5 {
        return Err(HarnessError::Fit(format!(
            "need at least 5 points in the window, got {}",
            pts.len()
        )));
    }
    let mut fit = loglog(&pts)?;
    fit.window = window;
    Ok(fit)
}

/// Unwindowed log-log least squares; used for short sweeps such as the
/// viscosity list.
pub fn loglog(pts: &[(f64, f64)]) -> Result<FitResult> {
    if pts.len() < 2 {
        return Err(HarnessError::Fit("need at least 2 points".into()));
    }
    let window = (
        pts.iter().map(|(t, _)| *t).fold(f64::INFINITY, f64::min),
        pts.iter().map(|(t, _)| *t).fold(0.0f64, f64::max),
    );
    if let Some((t, v)) = pts.iter().find(|(t, v)| *t <= 0.0 || *v <= 0.0) {
        return Err(HarnessError::Fit(format!(
            "nonpositive sample (t = {t}, value = {v}) in the fit window"
        )));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(t, v)| (t.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(HarnessError::Fit("degenerate abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss: f64 = logs
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(FitResult {
        exponent: slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
        window,
        points: logs.len(),
    })
}
