//! Weighted nonlinear least squares: Marquardt-damped Gauss-Newton with
//! step halving and box projection.

use nalgebra::{DMatrix, DVector};

pub(crate) trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    fn grad(&self, x: f64, p: &[f64], g: &mut [f64]);
    /// Clamp parameters into their feasible box.
    fn project(&self, _p: &mut [f64]) {}
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Options {
    pub max_iter: usize,
    /// Relative parameter step.
    pub xtol: f64,
    /// Infinity norm of the weighted gradient `Jᵀ W r`.
    pub gtol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iter: 200,
            xtol: 1e-10,
            gtol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub params: Vec<f64>,
    /// `(Jᵀ W J)⁻¹` at the solution.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub reason: &'static str,
}

fn chi2<M: Model>(m: &M, x: &[f64], y: &[f64], w: &[f64], p: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let r = yi - m.eval(xi, p);
            wi * r * r
        })
        .sum()
}

fn normal_equations<M: Model>(
    m: &M,
    x: &[f64],
    y: &[f64],
    w: &[f64],
    p: &[f64],
) -> (DMatrix<f64>, DVector<f64>) {
    let k = m.n_params();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut g = DVector::<f64>::zeros(k);
    let mut row = vec![0.0; k];
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        m.grad(xi, p, &mut row);
        let r = yi - m.eval(xi, p);
        for i in 0..k {
            g[i] += wi * row[i] * r;
            for j in 0..=i {
                a[(i, j)] += wi * row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            a[(j, i)] = a[(i, j)];
        }
    }
    (a, g)
}

fn invert(a: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(inv) = a.clone().cholesky().map(|c| c.inverse()) {
        return inv;
    }
    a.clone()
        .pseudo_inverse(1e-14)
        .unwrap_or_else(|_| DMatrix::from_element(a.nrows(), a.ncols(), f64::NAN))
}

pub(crate) fn solve<M: Model>(m: &M, x: &[f64], y: &[f64], w: &[f64], init: &[f64], opts: Options) -> Solution {
    let k = m.n_params();
    let mut p = init.to_vec();
    m.project(&mut p);
    let mut cost = chi2(m, x, y, w, &p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut reason = "maximum iterations reached";

    'outer: while iterations < opts.max_iter {
        iterations += 1;
        let (a, g) = normal_equations(m, x, y, w, &p);
        if g.amax() < opts.gtol {
            converged = true;
            reason = "gradient below tolerance";
            break;
        }
        loop {
            let mut damped = a.clone();
            for i in 0..k {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-30);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    converged = true;
                    reason = "normal matrix singular at minimum";
                    break 'outer;
                }
                continue;
            };
            let mut alpha = 1.0;
            for _ in 0..12 {
                let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(pi, si)| pi + alpha * si).collect();
                m.project(&mut trial);
                let c = chi2(m, x, y, w, &trial);
                if c.is_finite() && c < cost {
                    let small = trial
                        .iter()
                        .zip(&p)
                        .all(|(t, q)| (t - q).abs() <= opts.xtol * (q.abs() + opts.xtol));
                    let improvement = cost - c;
                    p = trial;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    if small || improvement <= 1e-15 * cost {
                        converged = true;
                        reason = "relative step below tolerance";
                        break 'outer;
                    }
                    continue 'outer;
                }
                alpha *= 0.5;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // no descent direction left at machine precision
                converged = true;
                reason = "no further reduction";
                break 'outer;
            }
        }
    }

    let (a, _) = normal_equations(m, x, y, w, &p);
    Solution {
        params: p,
        covariance: invert(&a),
        chi2: cost,
        iterations,
        converged,
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl Model for Exp {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] * (-p[1] * x).exp()
        }
        fn grad(&self, x: f64, p: &[f64], g: &mut [f64]) {
            let e = (-p[1] * x).exp();
            g[0] = e;
            g[1] = -p[0] * x * e;
        }
    }

    #[test]
    fn recovers_exponential() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.5 * (-1.3 * t).exp()).collect();
        let w = vec![1.0; x.len()];
        let s = solve(&Exp, &x, &y, &w, &[1.0, 0.5], Options::default());
        assert!(s.converged);
        assert!((s.params[0] - 2.5).abs() < 1e-9);
        assert!((s.params[1] - 1.3).abs() < 1e-9);
        assert!(s.covariance[(0, 0)] > 0.0);
    }
}
