use super::{resolve_weights, FitResult};
use crate::error::{Error, Result};

/// Closed-form weighted straight line `y = slope·x + intercept`.
///
/// Parameters are named `slope` and `intercept`. Without error bars the
/// standard errors are scaled by the reduced χ².
pub fn fit_linear(x: &[f64], y: &[f64], y_err: Option<&[f64]>) -> Result<FitResult> {
    let m = x.len();
    if y.len() != m {
        return Err(Error::arg(format!("x has {m} points, y has {}", y.len())));
    }
    if m < 3 {
        return Err(Error::InsufficientData(format!("{m} points; at least 3 required")));
    }
    let (w, weighted) = resolve_weights(m, y_err);
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * (xi - xm).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((xi, yi), wi)| wi * (xi - xm) * (yi - ym))
        .sum();
    if !(sxx > 0.0) || sxx <= 1e-28 * sw * (xm * xm).max(1e-300) {
        return Err(Error::arg("x has zero variance"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((xi, yi), wi)| wi * (yi - slope * xi - intercept).powi(2))
        .sum();
    let reduced = chi2 / (m as f64 - 2.0);
    let scale = if weighted { 1.0 } else { reduced };
    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + xm * xm / sxx);
    Ok(FitResult {
        model: "linear".into(),
        params: vec![
            FitResult::param("slope", slope, var_slope.sqrt()),
            FitResult::param("intercept", intercept, var_intercept.sqrt()),
        ],
        residual_norm: chi2.sqrt(),
        reduced_chi2: reduced,
        points: m,
        converged: true,
        iterations: 1,
    })
}

/// Unweighted coefficient of determination of `y ≈ slope·x + intercept`.
pub fn r_squared(x: &[f64], y: &[f64], slope: f64, intercept: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}
