use std::f64::consts::{PI, TAU};

use super::lsq::{self, Model};
use super::{resolve_weights, FitParameter, FitResult};
use crate::error::{Error, Result};
use crate::simulator::MeasurementRecord;

const N_MIN: f64 = 0.5;
const N_MAX: f64 = 4.0;
const NAMES: [&str; 6] = ["a", "t_d", "n", "f", "phi", "b"];

/// `a · exp(−(t/T_D)^n) · cos(2πft + φ) + b`
pub fn damped_cosine(t: f64, a: f64, t_d: f64, n: f64, f: f64, phi: f64, b: f64) -> f64 {
    a * (-(t / t_d).powf(n)).exp() * (TAU * f * t + phi).cos() + b
}

/// Optional overrides for the automatic initial guess (SI units).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DampedCosineInit {
    pub a: Option<f64>,
    pub t_d: Option<f64>,
    pub n: Option<f64>,
    pub f: Option<f64>,
    pub phi: Option<f64>,
    pub b: Option<f64>,
}

/// Parameters `[a, T, n, f, φ, b]` on the scaled axes `u = t/t_scale`,
/// `v = y/y_scale`.
struct Scaled;

impl Model for Scaled {
    fn n_params(&self) -> usize {
        6
    }

    fn eval(&self, u: f64, p: &[f64]) -> f64 {
        damped_cosine(u, p[0], p[1], p[2], p[3], p[4], p[5])
    }

    fn grad(&self, u: f64, p: &[f64], g: &mut [f64]) {
        let (a, t, n, f, phi) = (p[0], p[1], p[2], p[3], p[4]);
        let r = u / t;
        let rn = if r > 0.0 { r.powf(n) } else { 0.0 };
        let env = (-rn).exp();
        let (s, c) = (TAU * f * u + phi).sin_cos();
        g[0] = env * c;
        g[1] = a * c * env * n * rn / t;
        g[2] = if r > 0.0 { -a * c * env * rn * r.ln() } else { 0.0 };
        g[3] = -a * env * s * TAU * u;
        g[4] = -a * env * s;
        g[5] = 1.0;
    }

    fn project(&self, p: &mut [f64]) {
        p[1] = p[1].max(1e-6);
        p[2] = p[2].clamp(N_MIN, N_MAX);
    }
}

fn wrap(phi: f64) -> f64 {
    let y = (phi + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Solves the small dense system `Σ basis_i(u) c_i ≈ y` by normal equations.
fn linear_lsq<const K: usize>(u: &[f64], y: &[f64], basis: impl Fn(f64) -> [f64; K]) -> Option<[f64; K]> {
    let mut a = nalgebra::DMatrix::<f64>::zeros(K, K);
    let mut rhs = nalgebra::DVector::<f64>::zeros(K);
    for (&ui, &yi) in u.iter().zip(y) {
        let b = basis(ui);
        for i in 0..K {
            rhs[i] += b[i] * yi;
            for j in 0..K {
                a[(i, j)] += b[i] * b[j];
            }
        }
    }
    let sol = a.lu().solve(&rhs)?;
    let mut out = [0.0; K];
    out.copy_from_slice(sol.as_slice());
    Some(out)
}

/// Discrete-spectrum peak of the linearly detrended data, refined by
/// parabolic interpolation. Ties go to the lower frequency.
fn spectral_peak(u: &[f64], y: &[f64]) -> f64 {
    let m = u.len();
    let trend = linear_lsq(u, y, |t| [1.0, t]).unwrap_or([0.0, 0.0]);
    let r: Vec<f64> = u.iter().zip(y).map(|(&t, &v)| v - trend[0] - trend[1] * t).collect();
    let span = u[m - 1] - u[0];
    let mut dx: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    dx.sort_by(|a, b| a.total_cmp(b));
    let nyquist = 0.5 / dx[dx.len() / 2];
    let df = 1.0 / (4.0 * span);
    let count = (nyquist / df).ceil() as usize + 1;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&t, &v) in u.iter().zip(&r) {
            let (s, c) = (TAU * f * t).sin_cos();
            re += v * c;
            im -= v * s;
        }
        re * re + im * im
    };
    let spectrum: Vec<f64> = (0..count).map(|k| power(k as f64 * df)).collect();
    let mut best = 1;
    for k in 2..count.saturating_sub(1) {
        if spectrum[k] > spectrum[best] {
            best = k;
        }
    }
    let mut offset = 0.0;
    if best + 1 < count {
        let (l, c, rr) = (spectrum[best - 1], spectrum[best], spectrum[best + 1]);
        let denom = l - 2.0 * c + rr;
        if denom < 0.0 {
            offset = (0.5 * (l - rr) / denom).clamp(-0.5, 0.5);
        }
    }
    (best as f64 + offset) * df
}

/// Automatic initial guess on scaled axes.
fn initial_guess(u: &[f64], y: &[f64]) -> Result<[f64; 6]> {
    let span = u[u.len() - 1] - u[0];
    let f0 = spectral_peak(u, y);
    if f0 * span < 1.5 {
        return Err(Error::InsufficientData(format!(
            "data span {:.3} oscillation periods; at least 1.5 required",
            f0 * span
        )));
    }
    let [b0, c0, s0] = linear_lsq(u, y, |t| {
        let (s, c) = (TAU * f0 * t).sin_cos();
        [1.0, c, s]
    })
    .ok_or_else(|| Error::InsufficientData("singular initial linear fit".into()))?;
    let phi0 = (-s0).atan2(c0);

    // amplitude per window of two periods, then ln(amp) vs t² regression
    let width = 2.0 / f0;
    let mut centres = Vec::new();
    let mut amps = Vec::new();
    let mut start = 0;
    while start < u.len() {
        let end = u[start..]
            .iter()
            .position(|&t| t >= u[start] + width)
            .map_or(u.len(), |p| start + p);
        if end - start >= 4 {
            if let Some([_, c, s]) = linear_lsq(&u[start..end], &y[start..end], |t| {
                let (s, c) = (TAU * f0 * t).sin_cos();
                [1.0, c, s]
            }) {
                centres.push(0.5 * (u[start] + u[end - 1]));
                amps.push((c * c + s * s).sqrt());
            }
        }
        start = end;
    }
    let max_amp = amps.iter().cloned().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = centres
        .iter()
        .zip(&amps)
        .filter(|(_, &a)| a > 0.15 * max_amp && a > 0.0)
        .map(|(&t, &a)| (t * t, a.ln()))
        .collect();
    let (mut a0, mut t0) = ((c0 * c0 + s0 * s0).sqrt().max(max_amp), 2.0 * span);
    if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some([icpt, slope]) = linear_lsq(&xs, &ys, |t| [1.0, t]) {
            if slope < 0.0 {
                t0 = (-1.0 / slope).sqrt();
                a0 = icpt.exp().min(4.0 * max_amp.max(1e-300));
            }
        }
    }
    Ok([a0, t0.clamp(0.05 * span, 10.0 * span), 2.0, f0, phi0, b0])
}

/// Fits `a · exp(−(t/T_D)^n) · cos(2πft + φ) + b` to a time record.
///
/// Requires at least 8 points spanning 1.5 oscillation periods. Uses the
/// record's error bars as weights when all are positive. `n` is bounded
/// to `[0.5, 4]`; on return `a ≥ 0`, `f ≥ 0` and `φ ∈ (−π, π]`.
pub fn fit_damped_cosine(rec: &MeasurementRecord, init: Option<&DampedCosineInit>) -> Result<FitResult> {
    let m = rec.len();
    if m < 8 {
        return Err(Error::InsufficientData(format!("{m} points; at least 8 required")));
    }
    if rec.x[0] < 0.0 {
        return Err(Error::arg("time axis must be non-negative"));
    }
    let x_scale = rec.x[m - 1];
    let y_mean = rec.y.iter().sum::<f64>() / m as f64;
    let y_scale = {
        let s = rec.y.iter().map(|v| (v - y_mean).abs()).fold(0.0, f64::max);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let u: Vec<f64> = rec.x.iter().map(|t| t / x_scale).collect();
    let v: Vec<f64> = rec.y.iter().map(|y| y / y_scale).collect();
    let (w0, weighted) = resolve_weights(m, Some(&rec.y_err));
    let w: Vec<f64> = w0.iter().map(|wi| if weighted { wi * y_scale * y_scale } else { *wi }).collect();

    let user = init.copied().unwrap_or_default();
    let mut guess = match user.f {
        Some(f) if f * (rec.x[m - 1] - rec.x[0]) >= 1.5 => {
            // only the frequency is needed to seed the rest
            let mut g = initial_guess_with_f(&u, &v, f * x_scale)?;
            g[3] = f * x_scale;
            g
        }
        Some(_) => {
            return Err(Error::InsufficientData(
                "supplied frequency gives fewer than 1.5 periods".into(),
            ))
        }
        None => initial_guess(&u, &v)?,
    };
    if let Some(a) = user.a {
        guess[0] = a / y_scale;
    }
    if let Some(t) = user.t_d {
        guess[1] = t / x_scale;
    }
    if let Some(n) = user.n {
        guess[2] = n;
    }
    if let Some(phi) = user.phi {
        guess[4] = phi;
    }
    if let Some(b) = user.b {
        guess[5] = b / y_scale;
    }

    let starts = [1.0, 0.5, 2.0];
    let mut best: Option<lsq::Solution> = None;
    for s in starts {
        let mut g = guess;
        g[1] *= s;
        let sol = lsq::solve(&Scaled, &u, &v, &w, &g, lsq::Options::default());
        let better = match &best {
            None => true,
            Some(b) => (sol.converged && !b.converged) || (sol.converged == b.converged && sol.chi2 < b.chi2),
        };
        if better {
            best = Some(sol);
        }
    }
    let sol = best.expect("at least one start");

    let dof = (m as f64 - 6.0).max(1.0);
    let reduced = sol.chi2 / dof;
    let cov_scale = if weighted { 1.0 } else { reduced };
    let se = |i: usize| (sol.covariance[(i, i)] * cov_scale).sqrt();
    let p = &sol.params;
    let (mut a, mut f, mut phi) = (p[0] * y_scale, p[3] / x_scale, p[4]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    if f < 0.0 {
        f = -f;
        phi = -phi;
    }
    let values = [a, p[1] * x_scale, p[2], f, wrap(phi), p[5] * y_scale];
    let errors = [
        se(0) * y_scale,
        se(1) * x_scale,
        se(2),
        se(3) / x_scale,
        se(4),
        se(5) * y_scale,
    ];
    let result = FitResult {
        model: "damped_cosine".into(),
        params: NAMES
            .iter()
            .zip(values.iter().zip(errors.iter()))
            .map(|(n, (v, e))| FitResult::param(n, *v, *e))
            .collect::<Vec<FitParameter>>(),
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

fn initial_guess_with_f(u: &[f64], v: &[f64], f_scaled: f64) -> Result<[f64; 6]> {
    let [b0, c0, s0] = linear_lsq(u, v, |t| {
        let (s, c) = (TAU * f_scaled * t).sin_cos();
        [1.0, c, s]
    })
    .ok_or_else(|| Error::InsufficientData("singular initial linear fit".into()))?;
    let span = u[u.len() - 1] - u[0];
    Ok([(c0 * c0 + s0 * s0).sqrt(), 0.5 * span, 2.0, f_scaled, (-s0).atan2(c0), b0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{Axis, RecordMeta};

    fn record(x: Vec<f64>, y: Vec<f64>, err: f64) -> MeasurementRecord {
        let n = x.len();
        MeasurementRecord::new(
            x,
            y,
            vec![err; n],
            RecordMeta {
                label: "synthetic".into(),
                axis: Axis::Time,
                seed: 0,
                shots: 1,
            },
        )
        .unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        let (a, t_d, n, f, phi, b) = (1.0, 9.1e-6, 2.0, 0.5e6, 0.0, 0.0);
        let x: Vec<f64> = (0..200).map(|k| k as f64 * 0.15e-6).collect();
        let y: Vec<f64> = x.iter().map(|&t| damped_cosine(t, a, t_d, n, f, phi, b)).collect();
        let fit = fit_damped_cosine(&record(x, y, 0.0), None).unwrap();
        assert!(fit.converged);
        for (name, truth) in [("a", a), ("t_d", t_d), ("n", n), ("f", f)] {
            let v = fit.value(name);
            assert!(((v - truth) / truth).abs() < 1e-6, "{name}: {v}");
        }
        assert!(fit.value("phi").abs() < 1e-6);
        assert!(fit.value("b").abs() < 1e-6);
    }

    #[test]
    fn pure_decay_is_insufficient() {
        let x: Vec<f64> = (0..100).map(|k| k as f64 * 0.2e-6).collect();
        let y: Vec<f64> = x.iter().map(|&t| (-(t / 5e-6)).exp()).collect();
        let err = fit_damped_cosine(&record(x, y, 0.0), None).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }

    #[test]
    fn too_few_points() {
        let x: Vec<f64> = (0..6).map(|k| k as f64 * 1e-6).collect();
        let y = vec![0.0; 6];
        assert!(matches!(
            fit_damped_cosine(&record(x, y, 0.0), None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn sign_normalisation() {
        let x: Vec<f64> = (0..150).map(|k| k as f64 * 0.1e-6).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&t| damped_cosine(t, -0.3, 6e-6, 1.5, 0.8e6, 0.4, 0.2))
            .collect();
        let fit = fit_damped_cosine(&record(x, y, 0.0), None).unwrap();
        assert!((fit.value("a") - 0.3).abs() < 1e-8);
        assert!((wrap(fit.value("phi") - (0.4 + PI))).abs() < 1e-6);
    }
}
