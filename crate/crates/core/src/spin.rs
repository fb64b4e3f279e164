//! Ground-state spin-1 model in the doubly rotating frame.
//!
//! Basis order is `(|-1>, |0>, |+1>)`. Each drive defines a rotating frame for
//! its transition; after the rotating-wave approximation the free Hamiltonian
//! is diagonal with the detunings `Δ∓` on `|∓1>` and `0` on `|0>`.
//!
//! Rotation convention: a pulse of angle `θ` and phase `φ` on transition
//! `t` is `exp(-i θ/2 (cos φ σx + sin φ σy))` in the `{|0>, |t>}` subspace,
//! with `|0>` as the first subspace basis vector. Phase `0` is a rotation
//! about x, phase `π/2` about y.

use std::f64::consts::TAU;

use log::warn;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tesla per Gauss.
pub const GAUSS: f64 = 1e-4;
/// `g μ_B / h` for g = 2, in Hz/T.
pub const DEFAULT_GYRO: f64 = 28.024e9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureWindow {
    pub min: f64,
    pub max: f64,
}

impl TemperatureWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::arg(format!("empty temperature window [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, temp: f64) -> bool {
        temp >= self.min && temp <= self.max
    }

    pub fn check(&self, temp: f64) -> Result<()> {
        if self.contains(temp) {
            Ok(())
        } else {
            Err(Error::TemperatureRange {
                value: temp,
                min: self.min,
                max: self.max,
            })
        }
    }
}

impl Default for TemperatureWindow {
    fn default() -> Self {
        Self { min: 250.0, max: 350.0 }
    }
}

/// Physical ground truth of the spin: linear `D(T)` line, gyromagnetic
/// ratio and axial bias field. SI units throughout (Hz, K, Hz/K, Hz/T, T).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinParameters {
    pub d_ref: f64,
    pub t_ref: f64,
    pub d_slope: f64,
    pub gyro: f64,
    pub b_field: f64,
    pub validity: TemperatureWindow,
}

impl Default for SpinParameters {
    /// PL6 divacancy at 32.1 G.
    fn default() -> Self {
        Self {
            d_ref: 1350.6e6,
            t_ref: 299.1,
            d_slope: -99.7e3,
            gyro: DEFAULT_GYRO,
            b_field: 32.1 * GAUSS,
            validity: TemperatureWindow::default(),
        }
    }
}

impl SpinParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_ref > 0.0 && self.d_ref.is_finite()) {
            return Err(Error::arg(format!("d_ref must be positive, got {}", self.d_ref)));
        }
        if !(self.gyro > 0.0 && self.gyro.is_finite()) {
            return Err(Error::arg(format!("gyro must be positive, got {}", self.gyro)));
        }
        if !(self.b_field >= 0.0 && self.b_field.is_finite()) {
            return Err(Error::arg(format!(
                "b_field must be non-negative, got {}",
                self.b_field
            )));
        }
        if !(self.t_ref.is_finite() && self.d_slope.is_finite()) {
            return Err(Error::arg("t_ref and d_slope must be finite"));
        }
        TemperatureWindow::new(self.validity.min, self.validity.max)?;
        if self.d_slope >= 0.0 {
            warn!(
                "dD/dT = {} Hz/K is non-negative; divacancy ZFS decreases with temperature",
                self.d_slope
            );
        }
        Ok(())
    }

    /// `D(T)` from the linear line, without a validity check.
    pub fn zfs(&self, temp: f64) -> f64 {
        self.d_ref + self.d_slope * (temp - self.t_ref)
    }

    /// Zeeman shift `gyro · B` of the `|±1>` levels.
    pub fn zeeman(&self) -> f64 {
        self.gyro * self.b_field
    }

    /// Thermal environment at `temp` relative to the reference point,
    /// with no magnetic fluctuation.
    pub fn environment_at(&self, temp: f64) -> Result<EnvironmentState> {
        self.validity.check(temp)?;
        Ok(EnvironmentState {
            delta_d: self.d_slope * (temp - self.t_ref),
            delta_b: 0.0,
        })
    }
}

/// `(f_minus, f_plus) = D(T) ∓ gyro·B`.
pub fn transition_frequencies(p: &SpinParameters, temp: f64) -> Result<(f64, f64)> {
    p.validity.check(temp)?;
    let d = p.zfs(temp);
    let z = p.zeeman();
    Ok((d - z, d + z))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transition {
    Minus,
    Plus,
}

impl Transition {
    /// Basis index of the non-zero level addressed by this transition.
    pub fn index(self) -> usize {
        match self {
            Transition::Minus => 0,
            Transition::Plus => 2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Transition::Minus => Transition::Plus,
            Transition::Plus => Transition::Minus,
        }
    }

    /// Sign of the Zeeman term on this branch.
    pub fn sign(self) -> f64 {
        match self {
            Transition::Minus => -1.0,
            Transition::Plus => 1.0,
        }
    }
}

/// Drive frequencies on the two transitions, in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrowaveConfig {
    pub omega_minus: f64,
    pub omega_plus: f64,
}

impl MicrowaveConfig {
    /// Both drives exactly on the reference-temperature transitions.
    pub fn resonant(p: &SpinParameters) -> Self {
        Self::with_common_detuning(p, 0.0)
    }

    /// Both drives offset by `offset` Hz above the reference-temperature
    /// transitions. A positive offset is the "positive detuning" operating
    /// point: the observed thermal oscillation frequency is `offset - ΔD`.
    pub fn with_common_detuning(p: &SpinParameters, offset: f64) -> Self {
        Self {
            omega_minus: p.d_ref - p.zeeman() + offset,
            omega_plus: p.d_ref + p.zeeman() + offset,
        }
    }

    /// Mean drive frequency minus the reference `D`.
    pub fn common_detuning(&self, p: &SpinParameters) -> f64 {
        0.5 * (self.omega_minus + self.omega_plus) - p.d_ref
    }

    pub fn validate(&self, p: &SpinParameters) -> Result<()> {
        if !(self.omega_minus.is_finite() && self.omega_plus.is_finite()) {
            return Err(Error::arg("microwave frequencies must be finite"));
        }
        if p.b_field > 0.0 && self.omega_plus <= self.omega_minus {
            return Err(Error::arg(format!(
                "omega_plus ({}) must exceed omega_minus ({}) at non-zero field",
                self.omega_plus, self.omega_minus
            )));
        }
        Ok(())
    }
}

/// Instantaneous environment seen by the spin: thermal ZFS shift relative to
/// `d_ref` and the magnetic fluctuation along the axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentState {
    pub delta_d: f64,
    pub delta_b: f64,
}

/// Rotating-frame detunings of `|-1>` and `|+1>`, in Hz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Detuning {
    pub minus: f64,
    pub plus: f64,
}

impl Detuning {
    /// Detunings for drives sitting on the reference transitions:
    /// `Δ∓ = ΔD ∓ gyro·δB`.
    pub fn from_shifts(delta_d: f64, delta_b: f64, gyro: f64) -> Self {
        Self {
            minus: delta_d - gyro * delta_b,
            plus: delta_d + gyro * delta_b,
        }
    }

    pub fn on(&self, t: Transition) -> f64 {
        match t {
            Transition::Minus => self.minus,
            Transition::Plus => self.plus,
        }
    }
}

/// `Δ∓ = ΔD ∓ gyro·δB + (f∓_ref − ω∓)`.
pub fn detunings(p: &SpinParameters, mw: &MicrowaveConfig, env: &EnvironmentState) -> Detuning {
    let z = p.zeeman();
    let zb = p.gyro * env.delta_b;
    Detuning {
        minus: env.delta_d - zb + (p.d_ref - z - mw.omega_minus),
        plus: env.delta_d + zb + (p.d_ref + z - mw.omega_plus),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritState {
    amplitudes: Vector3<Complex64>,
}

impl QutritState {
    pub fn ground() -> Self {
        Self {
            amplitudes: Vector3::new(ZERO, ONE, ZERO),
        }
    }

    /// Normalises the given amplitudes `(c-1, c0, c+1)`.
    pub fn new(c_minus: Complex64, c_zero: Complex64, c_plus: Complex64) -> Result<Self> {
        let v = Vector3::new(c_minus, c_zero, c_plus);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::arg("state vector must have finite non-zero norm"));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.amplitudes[0], self.amplitudes[1], self.amplitudes[2]]
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn apply(&mut self, u: &Propagator) {
        self.amplitudes = u.matrix * self.amplitudes;
    }

    /// Multiplies `|∓1>` by `e^{-i phase∓}`: the diagonal free evolution
    /// without building a matrix.
    pub fn apply_phases(&mut self, phase_minus: f64, phase_plus: f64) {
        self.amplitudes[0] *= Complex64::from_polar(1.0, -phase_minus);
        self.amplitudes[2] *= Complex64::from_polar(1.0, -phase_plus);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagator {
    pub matrix: Matrix3<Complex64>,
}

impl Propagator {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    /// `self` applied after `first`.
    pub fn then_after(&self, first: &Propagator) -> Propagator {
        Propagator {
            matrix: self.matrix * first.matrix,
        }
    }

    /// Max-abs elementwise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.matrix.adjoint() * self.matrix - Matrix3::<Complex64>::identity();
        p.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        (self.matrix - other.matrix)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Ideal instantaneous rotation in the `{|0>, |t>}` subspace.
pub fn pulse_propagator(transition: Transition, angle: f64, phase: f64) -> Propagator {
    let (s, c) = (0.5 * angle).sin_cos();
    let mut m = Matrix3::<Complex64>::identity();
    let z = 1;
    let t = transition.index();
    let minus_i = Complex64::new(0.0, -1.0);
    m[(z, z)] = Complex64::new(c, 0.0);
    m[(t, t)] = Complex64::new(c, 0.0);
    m[(z, t)] = minus_i * Complex64::from_polar(s, -phase);
    m[(t, z)] = minus_i * Complex64::from_polar(s, phase);
    Propagator { matrix: m }
}

/// `diag(e^{-i2πΔ-τ}, 1, e^{-i2πΔ+τ})`.
pub fn free_propagator(delta_minus: f64, delta_plus: f64, tau: f64) -> Result<Propagator> {
    if !(tau >= 0.0) {
        return Err(Error::arg(format!("free evolution time must be >= 0, got {tau}")));
    }
    let mut m = Matrix3::<Complex64>::identity();
    m[(0, 0)] = Complex64::from_polar(1.0, -TAU * delta_minus * tau);
    m[(2, 2)] = Complex64::from_polar(1.0, -TAU * delta_plus * tau);
    Ok(Propagator { matrix: m })
}

/// The `π-1 π+1 π-1` block exchanging `|-1>` and `|+1>`.
pub fn swap_propagator() -> Propagator {
    let pm = pulse_propagator(Transition::Minus, std::f64::consts::PI, 0.0);
    let pp = pulse_propagator(Transition::Plus, std::f64::consts::PI, 0.0);
    pm.then_after(&pp).then_after(&pm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn transition_frequencies_at_reference() {
        let p = SpinParameters::default();
        let (fm, fp) = transition_frequencies(&p, 299.1).unwrap();
        // gyro·B = 2.8024 MHz/G · 32.1 G = 89.95704 MHz
        assert!(close(fm, 1260.64296e6, 1e-3), "{fm}");
        assert!(close(fp, 1440.55704e6, 1e-3), "{fp}");
    }

    #[test]
    fn zero_field_degenerate() {
        let p = SpinParameters {
            b_field: 0.0,
            ..Default::default()
        };
        assert_eq!(transition_frequencies(&p, p.t_ref).unwrap(), (p.d_ref, p.d_ref));
        let (fm, fp) = transition_frequencies(&p, 300.1).unwrap();
        assert!(close(fm, 1350.5003e6, 1e-4));
        assert!(close(fp, 1350.5003e6, 1e-4));
    }

    #[test]
    fn out_of_window_names_window() {
        let p = SpinParameters::default();
        let err = transition_frequencies(&p, 400.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("250") && msg.contains("350"), "{msg}");
    }

    #[test]
    fn linear_in_temperature_and_field() {
        let p = SpinParameters::default();
        let f = |t| transition_frequencies(&p, t).unwrap().1;
        let (a, b, c) = (f(280.0), f(300.0), f(320.0));
        assert!(close(b - a, c - b, 1e-6));
        let g = |bf| {
            let q = SpinParameters { b_field: bf, ..p };
            transition_frequencies(&q, 300.0).unwrap().1
        };
        let (a, b, c) = (g(0.0), g(2e-3), g(4e-3));
        assert!(close(b - a, c - b, 1e-6));
    }

    #[test]
    fn detuning_examples() {
        let p = SpinParameters::default();
        let mw = MicrowaveConfig::resonant(&p);
        let d = detunings(&p, &mw, &EnvironmentState::default());
        assert_eq!((d.minus, d.plus), (0.0, 0.0));
        let d = detunings(&p, &mw, &EnvironmentState { delta_d: 500e3, delta_b: 0.0 });
        assert!(close(d.minus, 500e3, 1e-6) && close(d.plus, 500e3, 1e-6));
        let d = detunings(&p, &mw, &EnvironmentState { delta_d: 0.0, delta_b: 50e-3 * GAUSS });
        assert!(close(d.minus, -140.12e3, 1e-3), "{}", d.minus);
        assert!(close(d.plus, 140.12e3, 1e-3));
    }

    #[test]
    fn common_detuning_offset() {
        let p = SpinParameters::default();
        let mw = MicrowaveConfig::with_common_detuning(&p, 1e6);
        assert!(close(mw.common_detuning(&p), 1e6, 1e-6));
        let d = detunings(&p, &mw, &EnvironmentState::default());
        assert!(close(d.minus, -1e6, 1e-6) && close(d.plus, -1e6, 1e-6));
        assert!(mw.validate(&p).is_ok());
        let bad = MicrowaveConfig { omega_minus: 2e9, omega_plus: 1e9 };
        assert!(bad.validate(&p).is_err());
    }

    #[test]
    fn half_pi_from_ground() {
        let mut s = QutritState::ground();
        s.apply(&pulse_propagator(Transition::Minus, FRAC_PI_2, 0.0));
        let a = s.amplitudes();
        assert!((a[1] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((a[0] - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(a[2], ZERO);
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = pulse_propagator(Transition::Plus, 0.0, 1.234);
        assert!(u.max_abs_diff(&Propagator::identity()) < 1e-15);
    }

    #[test]
    fn swap_moves_minus_to_plus() {
        let mut s = QutritState::new(ONE, ZERO, ZERO).unwrap();
        s.apply(&swap_propagator());
        assert!(close(s.population(2), 1.0, 1e-15));
        assert!(close(s.population(0), 0.0, 1e-15));
        // global factor -1 on every level under this convention
        assert!((s.amplitude(2) + ONE).norm() < 1e-15);
    }

    #[test]
    fn free_evolution() {
        assert!(free_propagator(1e6, -3e5, 0.0)
            .unwrap()
            .max_abs_diff(&Propagator::identity())
            < 1e-15);
        let u = free_propagator(500e3, 0.0, 1e-6).unwrap();
        assert!((u.matrix[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(free_propagator(0.0, 0.0, -1e-9).is_err());
    }

    #[test]
    fn single_transition_ramsey_closed_form() {
        // π/2 (phase 0) - τ - π/2 (phase π) on |0>↔|-1>: P0 = cos²(πΔτ)
        for &(delta, tau) in &[(500e3, 0.3e-6), (-1.2e6, 2.1e-6), (0.0, 1e-6)] {
            let mut s = QutritState::ground();
            s.apply(&pulse_propagator(Transition::Minus, FRAC_PI_2, 0.0));
            s.apply(&free_propagator(delta, 0.0, tau).unwrap());
            s.apply(&pulse_propagator(Transition::Minus, FRAC_PI_2, PI));
            let expect = (PI * delta * tau).cos().powi(2);
            assert!(close(s.population(1), expect, 1e-12));
        }
    }

    fn arb_transition() -> impl Strategy<Value = Transition> {
        prop_oneof![Just(Transition::Minus), Just(Transition::Plus)]
    }

    proptest! {
        #[test]
        fn propagators_unitary_and_states_normalised(
            ops in proptest::collection::vec(
                (arb_transition(), -10.0f64..10.0, -PI..PI, -3e6f64..3e6, 0.0f64..5e-6), 1..40)
        ) {
            let mut s = QutritState::ground();
            for (t, angle, phase, delta, tau) in ops {
                let u = pulse_propagator(t, angle, phase);
                prop_assert!(u.unitarity_error() < 1e-12);
                s.apply(&u);
                let f = free_propagator(delta, -delta * 0.7, tau).unwrap();
                prop_assert!(f.unitarity_error() < 1e-12);
                s.apply(&f);
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn inverse_rotation(t in arb_transition(), angle in -10.0f64..10.0, phase in -PI..PI) {
            let u = pulse_propagator(t, angle, phase).then_after(&pulse_propagator(t, -angle, phase));
            prop_assert!(u.max_abs_diff(&Propagator::identity()) < 1e-12);
        }

        #[test]
        fn detuning_identities(dd in -1e7f64..1e7, db in -1e-3f64..1e-3) {
            let p = SpinParameters::default();
            let mw = MicrowaveConfig::resonant(&p);
            let d = detunings(&p, &mw, &EnvironmentState { delta_d: dd, delta_b: db });
            let scale = 1e-9 * (dd.abs() + p.gyro * db.abs() + 1.0);
            prop_assert!((d.plus - d.minus - 2.0 * p.gyro * db).abs() < scale);
            prop_assert!((d.plus + d.minus - 2.0 * dd).abs() < scale);
        }

        #[test]
        fn swap_clears_minus_when_plus_empty(
            re0 in -1.0f64..1.0, im0 in -1.0f64..1.0, re1 in -1.0f64..1.0, im1 in -1.0f64..1.0
        ) {
            prop_assume!(re0.abs() + im0.abs() + re1.abs() + im1.abs() > 1e-3);
            let mut s = QutritState::new(Complex64::new(re0, im0), Complex64::new(re1, im1), ZERO).unwrap();
            s.apply(&swap_propagator());
            prop_assert!(s.amplitude(0).norm() < 1e-15);
        }
    }
}
