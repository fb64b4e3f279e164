//! Shot-noise-limited temperature sensitivity and its Monte-Carlo check.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sequences::{analytic_phase, make_tcpmg};
use crate::simulator::{Experiment, ReadoutMode};
use crate::spin::{detunings, EnvironmentState, MicrowaveConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityInput {
    /// Bright-state photons per shot.
    pub p0: f64,
    /// Dark-state photons per shot.
    pub p1: f64,
    /// `dD/dT` (Hz/K).
    pub d_d_dt: f64,
    /// Coherence time (s).
    pub t_d: f64,
    /// Stretch exponent.
    pub n: f64,
    /// Interrogation time (s).
    pub t: f64,
}

impl SensitivityInput {
    pub fn validate(&self) -> Result<()> {
        if self.p0 == self.p1 {
            return Err(Error::ZeroContrast);
        }
        if !(self.p0 > self.p1 && self.p1 > 0.0) {
            return Err(Error::arg(format!(
                "photon counts need p0 > p1 > 0, got p0 = {}, p1 = {}",
                self.p0, self.p1
            )));
        }
        for (name, v) in [("t", self.t), ("t_d", self.t_d), ("n", self.n)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.d_d_dt != 0.0 && self.d_d_dt.is_finite()) {
            return Err(Error::arg("dD/dT must be non-zero"));
        }
        Ok(())
    }
}

/// `η = √(2(p0+p1)) / (p0−p1) · 1 / (2π |dD/dT| e^{−(t/T_D)^n} √t)` in K/√Hz.
pub fn sensitivity(inp: &SensitivityInput) -> Result<f64> {
    inp.validate()?;
    let readout = (2.0 * (inp.p0 + inp.p1)).sqrt() / (inp.p0 - inp.p1);
    let decay = (-(inp.t / inp.t_d).powf(inp.n)).exp();
    Ok(readout / (TAU * inp.d_d_dt.abs() * decay * inp.t.sqrt()))
}

/// Maximiser of `√t · e^{−(t/T_D)^n}`: `T_D · (1/(2n))^{1/n}`.
pub fn optimal_interrogation_time(t_d: f64, n: f64) -> Result<f64> {
    if !(t_d > 0.0 && n > 0.0) {
        return Err(Error::arg(format!("need T_D > 0 and n > 0, got {t_d}, {n}")));
    }
    Ok(t_d * (0.5 / n).powf(1.0 / n))
}

/// Repeated single-point TCPMG measurement at quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    /// TCPMG order.
    pub n: u32,
    /// Interrogation time (s).
    pub t: f64,
    /// Sample temperature (K).
    pub temperature: f64,
    /// Independent repeated measurements.
    pub repetitions: usize,
    /// Shots used for the common-random-number slope estimate.
    pub slope_shots: u32,
    /// Temperature step of the slope estimate (K). Keep the phase excursion
    /// `2π t |dD/dT| step` well below one radian.
    pub slope_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSensitivity {
    /// `std(T estimates) · √(shots · t)` (K/√Hz).
    pub eta: f64,
    /// Standard deviation of the per-measurement temperature estimates (K).
    pub temperature_std: f64,
    /// Mean photons per shot per kelvin at the operating point.
    pub slope: f64,
    /// Drive offset used to reach quadrature (Hz).
    pub detuning: f64,
    pub shots: u32,
    pub repetitions: usize,
}

/// Drive offset closest to `current` that puts the thermal phase of `seq`
/// at `±π/2`.
fn quadrature_detuning(exp: &Experiment, env: &EnvironmentState, t: f64, n: u32, current: f64) -> Result<f64> {
    let seq = make_tcpmg(n, t)?;
    let phase_at = |offset: f64| -> Result<f64> {
        let mw = MicrowaveConfig::with_common_detuning(&exp.spin, offset);
        analytic_phase(&seq, &detunings(&exp.spin, &mw, env))
    };
    let phi0 = phase_at(current)?;
    // the phase is linear in the common offset
    let k = phase_at(current + 1.0)? - phi0;
    let k = if k.abs() > 1e-3 { k } else { -TAU * t };
    let miss = (phi0 - FRAC_PI_2).rem_euclid(PI);
    let shift = if miss > 0.5 * PI { PI - miss } else { -miss };
    Ok(current + shift / k)
}

/// Estimates η by simulation: `repetitions` measurements of `shots` photon
/// counting shots each, converted to temperature through a
/// common-random-number slope.
pub fn monte_carlo_sensitivity(exp: &Experiment, spec: &MonteCarloSpec, seed: u64) -> Result<MonteCarloSensitivity> {
    if spec.repetitions < 2 {
        return Err(Error::arg("need at least 2 repetitions"));
    }
    if !(spec.slope_step > 0.0) || spec.slope_shots == 0 {
        return Err(Error::arg("slope step and shots must be positive"));
    }
    let env = exp.spin.environment_at(spec.temperature)?;
    let current = exp.microwave.common_detuning(&exp.spin);
    let detuning = quadrature_detuning(exp, &env, spec.t, spec.n, current)?;
    let mut counting = exp.clone();
    counting.microwave = MicrowaveConfig::with_common_detuning(&exp.spin, detuning);
    counting.readout.mode = ReadoutMode::Counts;
    let seq = make_tcpmg(spec.n, spec.t)?;

    let mut probe = counting.clone();
    probe.readout.shots = spec.slope_shots;
    let slope_seed = derive_seed(seed, u64::MAX);
    let hot = exp.spin.environment_at(spec.temperature + spec.slope_step)?;
    let cold = exp.spin.environment_at(spec.temperature - spec.slope_step)?;
    let pop_hot = probe.run_point(&seq, &hot, slope_seed)?.population;
    let pop_cold = probe.run_point(&seq, &cold, slope_seed)?.population;
    let p0 = exp.readout.bright_counts();
    let p1 = exp.readout.dark_counts();
    let slope = (p0 - p1) * (pop_hot - pop_cold) / (2.0 * spec.slope_step);
    if slope == 0.0 {
        return Err(Error::ZeroContrast);
    }

    let means = counting.execution.try_map_indexed(spec.repetitions, |r| {
        Ok(counting.run_point(&seq, &env, derive_seed(seed, r as u64))?.mean)
    })?;
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
    let temperature_std = var.sqrt() / slope.abs();
    let shots = counting.readout.shots;
    Ok(MonteCarloSensitivity {
        eta: temperature_std * (shots as f64 * spec.t).sqrt(),
        temperature_std,
        slope,
        detuning,
        shots,
        repetitions: spec.repetitions,
    })
}
