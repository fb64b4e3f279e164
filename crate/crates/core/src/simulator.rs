//! Monte-Carlo experiment engine and photon readout model.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::noise::{NoiseModel, OuProcess};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sequences::{PulseElement, PulseSequence, SequenceFamily};
use crate::spin::{
    detunings, pulse_propagator, transition_frequencies, Detuning, EnvironmentState, MicrowaveConfig,
    Propagator, QutritState, SpinParameters,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutMode {
    /// Mean `|0>` population, no photons.
    Population,
    /// Photon counts per shot.
    Counts,
    /// `(reference − signal)/reference`, the reference shot having no
    /// microwave pulses.
    #[default]
    LockIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// Saturation count rate `I_s` (counts/s).
    pub i_sat: f64,
    /// Saturation power `P_0` (W).
    pub p_sat: f64,
    pub laser_power: f64,
    /// Photon collection window per shot (s).
    pub shot_window: f64,
    /// Relative fluorescence drop of the dark state.
    pub contrast: f64,
    pub shots: u32,
    pub mode: ReadoutMode,
    /// When false, per-shot counts are replaced by their means.
    pub shot_noise: bool,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            i_sat: 458e6,
            p_sat: 182e-3,
            laser_power: 170e-3,
            shot_window: 3e-6,
            contrast: 0.01,
            shots: 2000,
            mode: ReadoutMode::LockIn,
            shot_noise: true,
        }
    }
}

/// `I(P) = I_s / (P_0/P + 1)`, written as `I_s P / (P_0 + P)` so that
/// `P = 0` gives exactly zero.
pub fn saturation_curve(i_sat: f64, p_sat: f64, power: f64) -> f64 {
    i_sat * power / (p_sat + power)
}

pub fn saturation_counts(model: &ReadoutModel, power: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::arg(format!("laser power must be >= 0, got {power}")));
    }
    Ok(saturation_curve(model.i_sat, model.p_sat, power))
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("i_sat", self.i_sat),
            ("p_sat", self.p_sat),
            ("laser_power", self.laser_power),
            ("shot_window", self.shot_window),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.contrast == 0.0 {
            return Err(Error::ZeroContrast);
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::arg(format!("contrast must lie in (0, 1], got {}", self.contrast)));
        }
        if self.shots == 0 {
            return Err(Error::arg("shots must be >= 1"));
        }
        Ok(())
    }

    /// Bright-state photons per shot, `p0 = I(P) · window`.
    pub fn bright_counts(&self) -> f64 {
        saturation_curve(self.i_sat, self.p_sat, self.laser_power) * self.shot_window
    }

    /// Dark-state photons per shot, `p1 = p0 (1 − contrast)`.
    pub fn dark_counts(&self) -> f64 {
        self.bright_counts() * (1.0 - self.contrast)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Time,
    Frequency,
    Temperature,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub label: String,
    pub axis: Axis,
    pub seed: u64,
    pub shots: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_err: Vec<f64>,
    pub meta: RecordMeta,
}

impl MeasurementRecord {
    pub fn new(x: Vec<f64>, y: Vec<f64>, y_err: Vec<f64>, meta: RecordMeta) -> Result<Self> {
        if x.len() != y.len() || x.len() != y_err.len() {
            return Err(Error::arg(format!(
                "record columns differ in length: x {}, y {}, y_err {}",
                x.len(),
                y.len(),
                y_err.len()
            )));
        }
        check_increasing(&x)?;
        if y_err.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::arg("y_err must be >= 0"));
        }
        Ok(Self { x, y, y_err, meta })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Weights `1/y_err²`, or `None` when any error bar is zero.
    pub fn weights(&self) -> Option<Vec<f64>> {
        if self.y_err.iter().all(|&e| e > 0.0) {
            Some(self.y_err.iter().map(|e| 1.0 / (e * e)).collect())
        } else {
            None
        }
    }
}

fn check_increasing(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("x values must be finite and strictly increasing"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointResult {
    pub mean: f64,
    pub std_error: f64,
    /// Mean `|0>` population over shots.
    pub population: f64,
}

enum Step {
    Unitary(Propagator),
    Free(f64),
}

fn compile(seq: &PulseSequence) -> Vec<Step> {
    let mut steps: Vec<Step> = Vec::new();
    for e in &seq.elements {
        match *e {
            PulseElement::Pulse {
                transition,
                angle_rad,
                phase_rad,
            } => {
                let u = pulse_propagator(transition, angle_rad, phase_rad);
                if let Some(Step::Unitary(prev)) = steps.last_mut() {
                    *prev = u.then_after(prev);
                } else {
                    steps.push(Step::Unitary(u));
                }
            }
            PulseElement::Delay { duration_s } => steps.push(Step::Free(duration_s)),
        }
    }
    steps
}

struct Shot {
    population: f64,
    signal: f64,
    reference: f64,
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(mean)
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Immutable experiment: spin truth, drive configuration, noise and readout.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub spin: SpinParameters,
    pub microwave: MicrowaveConfig,
    pub noise: NoiseModel,
    pub readout: ReadoutModel,
    pub execution: Execution,
}

impl Experiment {
    pub fn new(
        spin: SpinParameters,
        microwave: MicrowaveConfig,
        noise: NoiseModel,
        readout: ReadoutModel,
    ) -> Result<Self> {
        spin.validate()?;
        microwave.validate(&spin)?;
        noise.validate()?;
        readout.validate()?;
        Ok(Self {
            spin,
            microwave,
            noise,
            readout,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Runs `readout.shots` shots of `seq`. Shot `j` uses
    /// `derive_seed(seed, j)` for its noise and photon draws.
    pub fn run_point(&self, seq: &PulseSequence, env_mean: &EnvironmentState, seed: u64) -> Result<PointResult> {
        seq.validate()?;
        let shots = self.readout.shots as usize;
        if shots == 0 {
            return Err(Error::arg("shots must be >= 1"));
        }
        let steps = compile(seq);
        let base = detunings(
            &self.spin,
            &self.microwave,
            &EnvironmentState {
                delta_d: env_mean.delta_d,
                delta_b: 0.0,
            },
        );
        let substep = self.noise.substep(seq.total_delay());
        let p0 = self.readout.bright_counts();
        let p1 = self.readout.dark_counts();

        let outcomes = self.execution.map_indexed(shots, |j| {
            let mut rng = rng_from_seed(derive_seed(seed, j as u64));
            let b_static = env_mean.delta_b + self.noise.draw_static(&mut rng);
            let population = evolve(&steps, &base, self.spin.gyro, b_static, &self.noise, substep, &mut rng);
            self.read(population, p0, p1, &mut rng)
        });

        let population = outcomes.iter().map(|s| s.population).sum::<f64>() / shots as f64;
        let (mean, std_error) = match self.readout.mode {
            ReadoutMode::Population | ReadoutMode::Counts => {
                mean_and_stderr(outcomes.iter().map(|s| s.signal), shots)
            }
            ReadoutMode::LockIn => {
                let reference = outcomes.iter().map(|s| s.reference).sum::<f64>() / shots as f64;
                let (d, e) = mean_and_stderr(outcomes.iter().map(|s| s.reference - s.signal), shots);
                (d / reference, e / reference)
            }
        };
        Ok(PointResult {
            mean,
            std_error,
            population,
        })
    }

    fn read<R: Rng + ?Sized>(&self, population: f64, p0: f64, p1: f64, rng: &mut R) -> Shot {
        let expected = p1 + (p0 - p1) * population;
        let noisy = self.readout.shot_noise;
        match self.readout.mode {
            ReadoutMode::Population => Shot {
                population,
                signal: population,
                reference: 1.0,
            },
            ReadoutMode::Counts => Shot {
                population,
                signal: if noisy { poisson(expected, rng) } else { expected },
                reference: p0,
            },
            ReadoutMode::LockIn => {
                let (reference, signal) = if noisy {
                    (poisson(p0, rng), poisson(expected, rng))
                } else {
                    (p0, expected)
                };
                Shot {
                    population,
                    signal,
                    reference,
                }
            }
        }
    }

    /// One `run_point` per `x` (total free-evolution time), point `i`
    /// seeded with `derive_seed(seed, i)`.
    pub fn sweep(
        &self,
        family: &SequenceFamily,
        x_values: &[f64],
        env_mean: &EnvironmentState,
        seed: u64,
    ) -> Result<MeasurementRecord> {
        check_increasing(x_values)?;
        let points = self.execution.try_map_indexed(x_values.len(), |i| {
            let seq = family.build(x_values[i])?;
            self.run_point(&seq, env_mean, derive_seed(seed, i as u64))
        })?;
        let label = match family {
            SequenceFamily::Tcpmg { n } => format!("tcpmg-{n}"),
            other => other.name().to_string(),
        };
        MeasurementRecord::new(
            x_values.to_vec(),
            points.iter().map(|p| p.mean).collect(),
            points.iter().map(|p| p.std_error).collect(),
            RecordMeta {
                label,
                axis: Axis::Time,
                seed,
                shots: self.readout.shots,
            },
        )
    }
}

fn evolve<R: Rng + ?Sized>(
    steps: &[Step],
    base: &Detuning,
    gyro: f64,
    b_static: f64,
    noise: &NoiseModel,
    substep: f64,
    rng: &mut R,
) -> f64 {
    let mut ou = noise.has_dynamics().then(|| OuProcess::stationary(noise, rng));
    let mut state = QutritState::ground();
    for step in steps {
        match step {
            Step::Unitary(u) => state.apply(u),
            Step::Free(d) => {
                let d = *d;
                let mut field_integral = b_static * d;
                if let (Some(proc), true) = (ou.as_mut(), d > 0.0) {
                    let k = (d / substep).ceil().max(1.0) as usize;
                    let h = d / k as f64;
                    let mut x = proc.value();
                    let mut acc = 0.0;
                    for _ in 0..k {
                        let next = proc.advance(h, rng);
                        acc += 0.5 * (x + next);
                        x = next;
                    }
                    field_integral += acc * h;
                }
                let zeeman_phase = TAU * gyro * field_integral;
                state.apply_phases(
                    TAU * base.minus * d - zeeman_phase,
                    TAU * base.plus * d + zeeman_phase,
                );
            }
        }
    }
    state.population(1)
}

/// Count rate vs laser power: `I(P)` photons counted over `integration`
/// seconds per point, Poisson-distributed when `noisy`. Point `i` uses
/// `derive_seed(seed, i)`; `y_err` is `√counts / integration` (zero when
/// noiseless).
pub fn simulate_saturation(
    readout: &ReadoutModel,
    powers: &[f64],
    integration: f64,
    noisy: bool,
    seed: u64,
) -> Result<MeasurementRecord> {
    check_increasing(powers)?;
    if !(integration > 0.0 && integration.is_finite()) {
        return Err(Error::arg(format!("integration time must be > 0, got {integration}")));
    }
    let mut y = Vec::with_capacity(powers.len());
    let mut err = Vec::with_capacity(powers.len());
    for (i, &p) in powers.iter().enumerate() {
        let mean = saturation_counts(readout, p)? * integration;
        if noisy {
            let counts = poisson(mean, &mut rng_from_seed(derive_seed(seed, i as u64)));
            y.push(counts / integration);
            err.push(counts.max(1.0).sqrt() / integration);
        } else {
            y.push(mean / integration);
            err.push(0.0);
        }
    }
    MeasurementRecord::new(
        powers.to_vec(),
        y,
        err,
        RecordMeta {
            label: "saturation".into(),
            axis: Axis::Power,
            seed,
            shots: 1,
        },
    )
}

/// Lorentzian with unit peak and full width at half maximum `fwhm`.
pub fn lorentzian(f: f64, center: f64, fwhm: f64) -> f64 {
    let u = 2.0 * (f - center) / fwhm;
    1.0 / (1.0 + u * u)
}

/// ODMR spectrum at `temp`: mean photons per shot
/// `p0 (1 − Σ± contrast · L(f; f±, linewidth))`, averaged over
/// `readout.shots` shots with Poisson noise.
#[allow(clippy::too_many_arguments)]
pub fn simulate_odmr(
    spin: &SpinParameters,
    temp: f64,
    linewidth: f64,
    contrast: f64,
    freq_grid: &[f64],
    readout: &ReadoutModel,
    seed: u64,
    execution: Execution,
) -> Result<MeasurementRecord> {
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(Error::arg(format!("linewidth must be > 0, got {linewidth}")));
    }
    if !(0.0..=1.0).contains(&contrast) {
        return Err(Error::arg(format!("ODMR contrast must lie in [0, 1], got {contrast}")));
    }
    readout.validate()?;
    check_increasing(freq_grid)?;
    let (f_minus, f_plus) = transition_frequencies(spin, temp)?;
    let p0 = readout.bright_counts();
    let shots = readout.shots as f64;
    let values = execution.map_indexed(freq_grid.len(), |i| {
        let f = freq_grid[i];
        let mu = p0 * (1.0 - contrast * (lorentzian(f, f_minus, linewidth) + lorentzian(f, f_plus, linewidth)));
        let total_mean = (mu * shots).max(0.0);
        let total = if readout.shot_noise {
            poisson(total_mean, &mut rng_from_seed(derive_seed(seed, i as u64)))
        } else {
            total_mean
        };
        (total / shots, total.max(1.0).sqrt() / shots)
    });
    MeasurementRecord::new(
        freq_grid.to_vec(),
        values.iter().map(|v| v.0).collect(),
        values.iter().map(|v| v.1).collect(),
        RecordMeta {
            label: format!("odmr@{temp}K"),
            axis: Axis::Frequency,
            seed,
            shots: readout.shots,
        },
    )
}
