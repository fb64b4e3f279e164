use super::lsq::{self, Model};
use super::{fit_linear, resolve_weights, FitResult};
use crate::error::{Error, Result};

/// `I = i_sat · P / (p_sat + P)` on axes scaled so both parameters are O(1).
struct Scaled;

impl Model for Scaled {
    fn n_params(&self) -> usize {
        2
    }

    fn eval(&self, p: f64, q: &[f64]) -> f64 {
        q[0] * p / (q[1] + p)
    }

    fn grad(&self, p: f64, q: &[f64], g: &mut [f64]) {
        let d = q[1] + p;
        g[0] = p / d;
        g[1] = -q[0] * p / (d * d);
    }

    fn project(&self, q: &mut [f64]) {
        q[1] = q[1].max(1e-9);
    }
}

/// Fits the saturation curve to `(power, counts)` data.
///
/// Parameters are named `i_sat` (same unit as the counts) and `p_sat`
/// (same unit as the power).
pub fn fit_saturation(power: &[f64], counts: &[f64], err: Option<&[f64]>) -> Result<FitResult> {
    let m = power.len();
    if counts.len() != m {
        return Err(Error::arg("power and counts differ in length"));
    }
    if m < 3 {
        return Err(Error::InsufficientData(format!("{m} points; at least 3 required")));
    }
    if power.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::arg("powers must be positive"));
    }
    let p_scale = power.iter().cloned().fold(0.0, f64::max);
    let c_scale = counts.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if !(c_scale > 0.0) {
        return Err(Error::arg("counts are all zero"));
    }
    let u: Vec<f64> = power.iter().map(|p| p / p_scale).collect();
    let v: Vec<f64> = counts.iter().map(|c| c / c_scale).collect();
    let (w0, weighted) = resolve_weights(m, err);
    let w: Vec<f64> = w0.iter().map(|wi| if weighted { wi * c_scale * c_scale } else { *wi }).collect();

    // 1/I = 1/i_sat + (p_sat/i_sat)·(1/P)
    let positive: Vec<(f64, f64)> = u.iter().zip(&v).filter(|(_, &c)| c > 0.0).map(|(&p, &c)| (1.0 / p, 1.0 / c)).collect();
    let mut init = [1.0, 0.5];
    if positive.len() >= 3 {
        let xs: Vec<f64> = positive.iter().map(|q| q.0).collect();
        let ys: Vec<f64> = positive.iter().map(|q| q.1).collect();
        if let Ok(line) = fit_linear(&xs, &ys, None) {
            let (b, a) = (line.value("slope"), line.value("intercept"));
            if a > 0.0 && b > 0.0 {
                init = [1.0 / a, b / a];
            }
        }
    }

    let sol = lsq::solve(&Scaled, &u, &v, &w, &init, lsq::Options::default());
    let dof = (m as f64 - 2.0).max(1.0);
    let reduced = sol.chi2 / dof;
    let scale = if weighted { 1.0 } else { reduced };
    let result = FitResult {
        model: "saturation".into(),
        params: vec![
            FitResult::param("i_sat", sol.params[0] * c_scale, (sol.covariance[(0, 0)] * scale).sqrt() * c_scale),
            FitResult::param("p_sat", sol.params[1] * p_scale, (sol.covariance[(1, 1)] * scale).sqrt() * p_scale),
        ],
        residual_norm: sol.chi2.sqrt(),
        reduced_chi2: reduced,
        points: m,
        converged: sol.converged,
        iterations: sol.iterations,
    };
    if !sol.converged {
        return Err(Error::NonConvergence {
            iterations: sol.iterations,
            reason: sol.reason.into(),
            best: Box::new(result),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::saturation_curve;

    #[test]
    fn noiseless_recovery() {
        let p: Vec<f64> = (1..=20).map(|k| k as f64 * 0.025).collect();
        let c: Vec<f64> = p.iter().map(|&x| saturation_curve(458e6, 182e-3, x)).collect();
        let fit = fit_saturation(&p, &c, None).unwrap();
        assert!((fit.value("i_sat") / 458e6 - 1.0).abs() < 1e-8);
        assert!((fit.value("p_sat") / 182e-3 - 1.0).abs() < 1e-8);
    }
}
