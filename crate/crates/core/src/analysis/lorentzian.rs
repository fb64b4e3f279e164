use super::lsq::{self, Model};
use super::{resolve_weights, FitResult};
use crate::error::{Error, Result};
use crate::simulator::{lorentzian, MeasurementRecord};

/// Two-dip ODMR line shape `baseline · (1 − Σ contrast_k · L(f; center_k, width_k))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianPair {
    pub baseline: f64,
    pub center_minus: f64,
    pub width_minus: f64,
    pub contrast_minus: f64,
    pub center_plus: f64,
    pub width_plus: f64,
    pub contrast_plus: f64,
}

impl LorentzianPair {
    pub fn eval(&self, f: f64) -> f64 {
        lorentzian_pair(f, self)
    }

    /// `(center_minus + center_plus) / 2`.
    pub fn zfs(&self) -> f64 {
        0.5 * (self.center_minus + self.center_plus)
    }

    /// `(center_plus − center_minus) / 2`.
    pub fn zeeman(&self) -> f64 {
        0.5 * (self.center_plus - self.center_minus)
    }
}

pub fn lorentzian_pair(f: f64, p: &LorentzianPair) -> f64 {
    p.baseline
        * (1.0
            - p.contrast_minus * lorentzian(f, p.center_minus, p.width_minus)
            - p.contrast_plus * lorentzian(f, p.center_plus, p.width_plus))
}

/// `[baseline, c1, w1, a1, c2, w2, a2]` on scaled axes.
struct Scaled;

fn dip_grad(u: f64, c: f64, w: f64) -> (f64, f64, f64) {
    let z = 2.0 * (u - c) / w;
    let l = 1.0 / (1.0 + z * z);
    let dl_dz = -2.0 * z * l * l;
    // (L, dL/dc, dL/dw)
    (l, dl_dz * (-2.0 / w), dl_dz * (-z / w))
}

impl Model for Scaled {
    fn n_params(&self) -> usize {
        7
    }

    fn eval(&self, u: f64, p: &[f64]) -> f64 {
        p[0] * (1.0 - p[3] * lorentzian(u, p[1], p[2]) - p[6] * lorentzian(u, p[4], p[5]))
    }

    fn grad(&self, u: f64, p: &[f64], g: &mut [f64]) {
        let (l1, dc1, dw1) = dip_grad(u, p[1], p[2]);
        let (l2, dc2, dw2) = dip_grad(u, p[4], p[5]);
        g[0] = 1.0 - p[3] * l1 - p[6] * l2;
        g[1] = -p[0] * p[3] * dc1;
        g[2] = -p[0] * p[3] * dw1;
        g[3] = -p[0] * l1;
        g[4] = -p[0] * p[6] * dc2;
        g[5] = -p[0] * p[6] * dw2;
        g[6] = -p[0] * l2;
    }

    fn project(&self, p: &mut [f64]) {
        p[2] = p[2].abs().max(1e-9);
        p[5] = p[5].abs().max(1e-9);
    }
}

struct Dip {
    index: usize,
    depth: f64,
    fwhm: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Deepest dip below `baseline` among points not masked, with its
/// half-depth full width.
fn deepest(x: &[f64], y: &[f64], baseline: f64, masked: &[bool]) -> Option<Dip> {
    let index = (0..y.len())
        .filter(|&i| !masked[i])
        .min_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    let depth = baseline - y[index];
    let half = baseline - 0.5 * depth;
    let mut lo = index;
    while lo > 0 && y[lo] < half {
        lo -= 1;
    }
    let mut hi = index;
    while hi + 1 < y.len() && y[hi] < half {
        hi += 1;
    }
    let fwhm = (x[hi] - x[lo]).max(x.get(index + 1).unwrap_or(&x[index]) - x[index]);
    Some(Dip { index, depth, fwhm })
}

/// Locates two dips or fails with a resolution error.
fn find_dips(x: &[f64], y: &[f64]) -> Result<(Dip, Dip, f64)> {
    let baseline = median(y);
    let diffs: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let noise = 1.4826 * median(&diffs) / std::f64::consts::SQRT_2;
    let mut masked = vec![false; y.len()];
    let first = deepest(x, y, baseline, &masked).ok_or_else(|| Error::Resolution("empty record".into()))?;
    if !(first.depth > 5.0 * noise && first.depth > 0.0) {
        return Err(Error::Resolution("no dip above the noise".into()));
    }
    let reach = 3.0 * first.fwhm;
    for (i, m) in masked.iter_mut().enumerate() {
        *m = (x[i] - x[first.index]).abs() <= reach;
    }
    let second = deepest(x, y, baseline, &masked).ok_or_else(|| Error::Resolution("only one dip found".into()))?;
    if second.depth < 0.1 * first.depth || second.depth <= 5.0 * noise {
        return Err(Error::Resolution(format!(
            "second dip depth {:.3e} against first {:.3e} and noise {:.3e}",
            second.depth, first.depth, noise
        )));
    }
    Ok(if x[first.index] < x[second.index] {
        (first, second, baseline)
    } else {
        (second, first, baseline)
    })
}

/// Fits two Lorentzian dips to an ODMR record.
///
/// Parameters are `baseline`, `center_minus`, `width_minus`,
/// `contrast_minus`, `center_plus`, `width_plus`, `contrast_plus` with
/// widths as FWHM, followed by the derived `d` (mean center) and `zeeman`
/// (half splitting) with propagated standard errors.
pub fn fit_lorentzian_pair(rec: &MeasurementRecord) -> Result<FitResult> {
    let m = rec.len();
    if m < 8 {
        return Err(Error::InsufficientData(format!("{m} points; at least 8 required")));
    }
    let (lo, hi) = (rec.x[0], rec.x[m - 1]);
    let x_mid = 0.5 * (lo + hi);
    let x_scale = 0.5 * (hi - lo);
    let y_scale = rec.y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(y_scale > 0.0) {
        return Err(Error::Resolution("record is identically zero".into()));
    }
    let u: Vec<f64> = rec.x.iter().map(|f| (f - x_mid) / x_scale).collect();
    let v: Vec<f64> = rec.y.iter().map(|y| y / y_scale).collect();
    let (first, second, baseline) = find_dips(&u, &v)?;
    let (w0, weighted) = resolve_weights(m, Some(&rec.y_err));
    let w: Vec<f64> = w0.iter().map(|wi| if weighted { wi * y_scale * y_scale } else { *wi }).collect();

    let init = [
        baseline,
        u[first.index],
        first.fwhm,
        first.depth / baseline,
        u[second.index],
        second.fwhm,
        second.depth / baseline,
    ];
    let sol = lsq::solve(&Scaled, &u, &v, &w, &init, lsq::Options::default());
    let dof = (m as f64 - 7.0).max(1.0);
    let reduced = sol.chi2 / dof;
    let scale = if weighted { 1.0 } else { reduced };
    let cov = |i: usize, j: usize| sol.covariance[(i, j)] * scale;
    let se = |i: usize| cov(i, i).sqrt();

    let p = &sol.params;
    let (a, b) = if p[1] <= p[4] { (1, 4) } else { (4, 1) };
    let center = |k: usize| x_mid + p[k] * x_scale;
    let var_sum = cov(a, a) + cov(b, b);
    let c_ab = cov(a, b);
    let mut params = vec![FitResult::param("baseline", p[0] * y_scale, se(0) * y_scale)];
    for (k, tag) in [(a, "minus"), (b, "plus")] {
        params.push(FitResult::param(&format!("center_{tag}"), center(k), se(k) * x_scale));
        params.push(FitResult::param(&format!("width_{tag}"), p[k + 1] * x_scale, se(k + 1) * x_scale));
        params.push(FitResult::param(&format!("contrast_{tag}"), p[k + 2], se(k + 2)));
    }
    params.push(FitResult::param(
        "d",
        0.5 * (center(a) + center(b)),
        0.5 * (var_sum + 2.0 * c_ab).max(0.0).sqrt() * x_scale,
    ));
    params.push(FitResult::param(
        "zeeman",
        0.5 * (center(b) - center(a)),
        0.5 * (var_sum - 2.0 * c_ab).max(0.0).sqrt() * x_scale,
    ));
    let result = FitResult {
        model: "lorentzian_pair".into(),
        params,
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
    use crate::simulator::{Axis, RecordMeta};

    fn record(truth: &LorentzianPair, grid: Vec<f64>) -> MeasurementRecord {
        let y = grid.iter().map(|&f| truth.eval(f)).collect();
        let n = grid.len();
        MeasurementRecord::new(
            grid,
            y,
            vec![0.0; n],
            RecordMeta {
                label: "odmr".into(),
                axis: Axis::Frequency,
                seed: 0,
                shots: 1,
            },
        )
        .unwrap()
    }

    fn grid() -> Vec<f64> {
        (0..401).map(|k| 1.22e9 + k as f64 * 0.6e6).collect()
    }

    #[test]
    fn derived_centers() {
        let pair = LorentzianPair {
            baseline: 1.0,
            center_minus: 1260.64e6,
            width_minus: 8e6,
            contrast_minus: 0.02,
            center_plus: 1440.56e6,
            width_plus: 8e6,
            contrast_plus: 0.02,
        };
        assert!((pair.zfs() - 1350.6e6).abs() < 1e-3);
        assert!((pair.zeeman() - 89.96e6).abs() < 1e-3);
    }

    #[test]
    fn noiseless_recovery() {
        let truth = LorentzianPair {
            baseline: 663.6,
            center_minus: 1260.64e6,
            width_minus: 8e6,
            contrast_minus: 0.02,
            center_plus: 1440.56e6,
            width_plus: 9e6,
            contrast_plus: 0.015,
        };
        let fit = fit_lorentzian_pair(&record(&truth, grid())).unwrap();
        assert!((fit.value("center_minus") - truth.center_minus).abs() < 1e-6 * 8e6);
        assert!((fit.value("center_plus") - truth.center_plus).abs() < 1e-6 * 9e6);
        assert!((fit.value("d") - truth.zfs()).abs() < 1e-6 * 8e6);
        assert!((fit.value("contrast_plus") / 0.015 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_dip_rejected() {
        let truth = LorentzianPair {
            baseline: 1.0,
            center_minus: 1260.64e6,
            width_minus: 8e6,
            contrast_minus: 0.02,
            center_plus: 1440.56e6,
            width_plus: 8e6,
            contrast_plus: 0.0,
        };
        assert!(matches!(
            fit_lorentzian_pair(&record(&truth, grid())),
            Err(Error::Resolution(_))
        ));
    }
}
