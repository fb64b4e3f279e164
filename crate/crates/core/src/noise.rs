//! Classical magnetic noise standing in for the spin bath.
//!
//! Two independent Gaussian components act along the quantisation axis: a
//! quasi-static offset drawn once per shot, and a stationary
//! Ornstein-Uhlenbeck process with correlation time `tau_c`.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the quasi-static offset (T).
    pub sigma_static: f64,
    /// Stationary standard deviation of the OU component (T).
    pub sigma_ou: f64,
    /// OU correlation time (s).
    pub tau_c: f64,
    pub static_enabled: bool,
    pub ou_enabled: bool,
}

impl Default for NoiseModel {
    /// Calibrated so that plain Ramsey decays with T2* ≈ 1.5 μs and the
    /// TCPMG-1 envelope reaches 1/e near 9.1 μs (TCPMG-N: 9.1, 12.2, 15.2,
    /// 18.0, 20.5 μs for N = 1..5 from the exact OU filter integral).
    fn default() -> Self {
        Self {
            sigma_static: 5.0130e-6,
            sigma_ou: 2.0379e-6,
            tau_c: 3.0e-6,
            static_enabled: true,
            ou_enabled: true,
        }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            sigma_static: 0.0,
            sigma_ou: 0.0,
            tau_c: 1.0,
            static_enabled: false,
            ou_enabled: false,
        }
    }

    pub fn static_only(sigma: f64) -> Self {
        Self {
            sigma_static: sigma,
            static_enabled: true,
            ..Self::none()
        }
    }

    pub fn ou_only(sigma: f64, tau_c: f64) -> Self {
        Self {
            sigma_ou: sigma,
            tau_c,
            ou_enabled: true,
            ..Self::none()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_static >= 0.0 && self.sigma_static.is_finite()) {
            return Err(Error::arg("sigma_static must be finite and >= 0"));
        }
        if !(self.sigma_ou >= 0.0 && self.sigma_ou.is_finite()) {
            return Err(Error::arg("sigma_ou must be finite and >= 0"));
        }
        if self.ou_enabled && !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return Err(Error::arg("tau_c must be > 0 when the OU component is enabled"));
        }
        Ok(())
    }

    pub fn static_sigma(&self) -> f64 {
        if self.static_enabled {
            self.sigma_static
        } else {
            0.0
        }
    }

    pub fn ou_sigma(&self) -> f64 {
        if self.ou_enabled {
            self.sigma_ou
        } else {
            0.0
        }
    }

    /// True when the OU component contributes a time-varying field.
    pub fn has_dynamics(&self) -> bool {
        self.ou_sigma() > 0.0
    }

    /// Integration sub-step for a sequence of total free evolution `total`:
    /// `tau_c / 20`, capped at `total / 100`.
    pub fn substep(&self, total: f64) -> f64 {
        let cap = total / 100.0;
        let base = self.tau_c / 20.0;
        if cap > 0.0 {
            base.min(cap)
        } else {
            base
        }
    }

    pub fn draw_static<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.static_sigma();
        if s == 0.0 {
            return 0.0;
        }
        let g: f64 = rng.sample(StandardNormal);
        s * g
    }
}

/// Draw of the quasi-static offset.
pub fn sample_static(model: &NoiseModel, seed: u64) -> f64 {
    model.draw_static(&mut rng_from_seed(seed))
}

/// Streaming OU process with the exact discrete update
/// `x' = x e^{-h/τc} + σ √(1 − e^{-2h/τc}) g`.
#[derive(Clone, Copy, Debug)]
pub struct OuProcess {
    sigma: f64,
    tau_c: f64,
    value: f64,
}

impl OuProcess {
    /// Starts from the stationary distribution.
    pub fn stationary<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> Self {
        let sigma = model.ou_sigma();
        let value = if sigma > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            sigma * g
        } else {
            0.0
        };
        Self {
            sigma,
            tau_c: model.tau_c,
            value,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, h: f64, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let decay = (-h / self.tau_c).exp();
        let g: f64 = rng.sample(StandardNormal);
        self.value = self.value * decay + self.sigma * (1.0 - decay * decay).sqrt() * g;
        self.value
    }
}

/// Field samples on a uniform grid starting at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrajectory {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl NoiseTrajectory {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::arg(format!("trajectory dt must be > 0, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::arg("trajectory must hold at least one sample"));
        }
        Ok(Self { dt, samples })
    }

    /// Time of the last sample.
    pub fn span(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Integral of the piecewise-linear interpolant from 0 to `t`.
    fn cumulative(&self, t: f64) -> f64 {
        let n = self.samples.len();
        if n == 1 {
            return self.samples[0] * t;
        }
        let pos = t / self.dt;
        let k = (pos.floor() as usize).min(n - 2);
        let whole: f64 = self.samples[..=k]
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * self.dt)
            .sum();
        let h = t - k as f64 * self.dt;
        let slope = (self.samples[k + 1] - self.samples[k]) / self.dt;
        whole + self.samples[k] * h + 0.5 * slope * h * h
    }
}

/// `n_steps + 1` samples of a stationary OU trajectory spaced by `dt`.
pub fn sample_ou(model: &NoiseModel, dt: f64, n_steps: usize, seed: u64) -> Result<NoiseTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::arg(format!("dt must be > 0, got {dt}")));
    }
    if n_steps < 1 {
        return Err(Error::arg("n_steps must be >= 1"));
    }
    model.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut proc = OuProcess::stationary(model, &mut rng);
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(proc.value());
    for _ in 0..n_steps {
        samples.push(proc.advance(dt, &mut rng));
    }
    NoiseTrajectory::new(dt, samples)
}

/// Magnetic phase `2π · gyro · sign · ∫ δB dt` over `window`, integrating
/// the linear interpolant of the samples (trapezoidal rule on grid points).
pub fn phase_integral(traj: &NoiseTrajectory, window: (f64, f64), sign: f64, gyro: f64) -> Result<f64> {
    let (t0, t1) = window;
    let span = traj.span();
    let eps = 1e-12 * span.max(traj.dt);
    if !(t0 >= -eps && t1 >= t0 && t1 <= span + eps) {
        return Err(Error::arg(format!(
            "window [{t0}, {t1}] outside trajectory span [0, {span}]"
        )));
    }
    let t0 = t0.clamp(0.0, span);
    let t1 = t1.clamp(0.0, span);
    let integral = traj.cumulative(t1) - traj.cumulative(t0);
    Ok(TAU * gyro * sign * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;
    use crate::spin::DEFAULT_GYRO;

    #[test]
    fn zero_sigma_is_exactly_zero() {
        let m = NoiseModel::static_only(0.0);
        assert_eq!(sample_static(&m, 7), 0.0);
        let t = sample_ou(&NoiseModel::ou_only(0.0, 1e-6), 1e-8, 100, 3).unwrap();
        assert!(t.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn static_moments() {
        let sigma = 5e-6;
        let m = NoiseModel::static_only(sigma);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|i| sample_static(&m, derive_seed(11, i))).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.05);
    }

    #[test]
    fn deterministic_under_seed() {
        let m = NoiseModel::default();
        let a = sample_ou(&m, 1e-7, 500, 99).unwrap();
        let b = sample_ou(&m, 1e-7, 500, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(sample_static(&m, 5).to_bits(), sample_static(&m, 5).to_bits());
    }

    #[test]
    fn ou_autocorrelation_and_stationarity() {
        let sigma = 2e-6;
        let tau_c = 1e-6;
        let dt = 0.25e-6;
        let m = NoiseModel::ou_only(sigma, tau_c);
        let n_traj = 10_000;
        let steps = 8;
        let trajs: Vec<NoiseTrajectory> = (0..n_traj)
            .map(|i| sample_ou(&m, dt, steps, derive_seed(21, i as u64)).unwrap())
            .collect();
        for lag in [1usize, 2, 4] {
            let c = trajs
                .iter()
                .map(|t| t.samples[0] * t.samples[lag])
                .sum::<f64>()
                / n_traj as f64;
            let expect = sigma * sigma * (-(lag as f64) * dt / tau_c).exp();
            assert!((c / expect - 1.0).abs() < 0.05, "lag {lag}: {c} vs {expect}");
        }
        for k in [0usize, 4, 8] {
            let v = trajs.iter().map(|t| t.samples[k].powi(2)).sum::<f64>() / n_traj as f64;
            assert!((v / (sigma * sigma) - 1.0).abs() < 0.05, "index {k}: {v}");
        }
    }

    #[test]
    fn white_noise_limit() {
        let sigma = 1.0;
        let m = NoiseModel::ou_only(sigma, 1e-9);
        let t = sample_ou(&m, 1e-6, 20_000, 4).unwrap();
        let n = t.samples.len() - 1;
        let c = t.samples.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n as f64;
        assert!(c.abs() < 4.0 / (n as f64).sqrt(), "{c}");
    }

    #[test]
    fn phase_integral_cases() {
        let g = DEFAULT_GYRO;
        let zero = NoiseTrajectory::new(1e-8, vec![0.0; 11]).unwrap();
        assert_eq!(phase_integral(&zero, (0.0, 1e-7), 1.0, g).unwrap(), 0.0);

        let c = 3e-6;
        let flat = NoiseTrajectory::new(1e-8, vec![c; 101]).unwrap();
        let p = phase_integral(&flat, (0.2e-6, 0.7e-6), -1.0, g).unwrap();
        let expect = -TAU * g * c * 0.5e-6;
        assert!((p - expect).abs() < 1e-12 * expect.abs());

        // δB(t) = s·t: ∫_{a}^{b} = s (b² − a²)/2, exact for the interpolant
        let s = 2.0;
        let dt = 1e-7;
        let ramp = NoiseTrajectory::new(dt, (0..=50).map(|k| s * k as f64 * dt).collect()).unwrap();
        let (a, b) = (0.13e-6, 4.21e-6);
        let p = phase_integral(&ramp, (a, b), 1.0, 1.0).unwrap();
        let expect = TAU * s * (b * b - a * a) / 2.0;
        assert!((p - expect).abs() < 1e-9 * expect.abs(), "{p} vs {expect}");

        assert!(phase_integral(&ramp, (0.0, 1.0), 1.0, 1.0).is_err());
        assert!(phase_integral(&ramp, (-1e-6, 1e-7), 1.0, 1.0).is_err());
    }

    #[test]
    fn argument_errors() {
        let m = NoiseModel::default();
        assert!(sample_ou(&m, 0.0, 10, 1).is_err());
        assert!(sample_ou(&m, 1e-9, 0, 1).is_err());
        let bad = NoiseModel { tau_c: 0.0, ..m };
        assert!(bad.validate().is_err());
        assert!(NoiseTrajectory::new(1e-9, vec![]).is_err());
    }
}
