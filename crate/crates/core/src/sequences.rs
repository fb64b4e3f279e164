//! Pulse-sequence representation, generators and the analytic phase oracle.
//!
//! All generators start from `|0>` with a `π/2` pulse on the `|0>↔|-1>`
//! transition (phase 0) and close with a `π/2` pulse of phase `π` on the
//! transition that holds the coherence at readout. With that closing phase
//! the final `|0>` population is `(1 + cos Φ)/2`, where `Φ` is the phase
//! returned by [`analytic_phase`].
//!
//! The swap block is `π-1 π+1 π-1`. Under the rotation convention of
//! [`crate::spin`] it maps `|∓1> → −|±1>` and `|0> → −|0>`, so it moves the
//! coherence to the other branch without adding a relative phase.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{free_propagator, pulse_propagator, Detuning, Propagator, Transition};

const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseElement {
    Pulse {
        transition: Transition,
        angle_rad: f64,
        phase_rad: f64,
    },
    Delay {
        duration_s: f64,
    },
}

impl PulseElement {
    pub fn pulse(transition: Transition, angle: f64, phase: f64) -> Self {
        PulseElement::Pulse {
            transition,
            angle_rad: angle,
            phase_rad: phase,
        }
    }

    pub fn delay(duration: f64) -> Self {
        PulseElement::Delay { duration_s: duration }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutBasis {
    #[default]
    Population0,
}

/// Metadata carried into output files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceLabel {
    pub family: String,
    pub n: Option<u32>,
    /// The generator's delay argument.
    pub tau_s: f64,
    /// Total free-evolution time.
    pub total_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub label: SequenceLabel,
    pub readout: ReadoutBasis,
    pub elements: Vec<PulseElement>,
}

impl PulseSequence {
    pub fn validate(&self) -> Result<()> {
        for e in &self.elements {
            match *e {
                PulseElement::Delay { duration_s } if !(duration_s >= 0.0 && duration_s.is_finite()) => {
                    return Err(Error::arg(format!("delay duration must be >= 0, got {duration_s}")));
                }
                PulseElement::Pulse { angle_rad, phase_rad, .. }
                    if !(angle_rad.is_finite() && phase_rad.is_finite()) =>
                {
                    return Err(Error::arg("pulse angle and phase must be finite"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total_delay(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match *e {
                PulseElement::Delay { duration_s } => duration_s,
                _ => 0.0,
            })
            .sum()
    }

    /// Number of `π-1 π+1 π-1` blocks.
    pub fn swap_count(&self) -> usize {
        self.elements
            .windows(3)
            .filter(|w| {
                matches!(
                    w,
                    [
                        PulseElement::Pulse { transition: Transition::Minus, angle_rad: a, .. },
                        PulseElement::Pulse { transition: Transition::Plus, angle_rad: b, .. },
                        PulseElement::Pulse { transition: Transition::Minus, angle_rad: c, .. },
                    ] if is_angle(*a, PI) && is_angle(*b, PI) && is_angle(*c, PI)
                )
            })
            .count()
    }

    /// Transition addressed by the final pulse.
    pub fn readout_transition(&self) -> Option<Transition> {
        self.elements.iter().rev().find_map(|e| match *e {
            PulseElement::Pulse { transition, .. } => Some(transition),
            _ => None,
        })
    }

    /// Adds `offset` to the phase of the final pulse.
    pub fn with_readout_phase_offset(mut self, offset: f64) -> Self {
        if let Some(PulseElement::Pulse { phase_rad, .. }) = self
            .elements
            .iter_mut()
            .rev()
            .find(|e| matches!(e, PulseElement::Pulse { .. }))
        {
            *phase_rad += offset;
        }
        self
    }

    /// Full unitary for static detunings, in application order.
    pub fn propagator(&self, det: &Detuning) -> Result<Propagator> {
        let mut u = Propagator::identity();
        for e in &self.elements {
            let step = match *e {
                PulseElement::Pulse {
                    transition,
                    angle_rad,
                    phase_rad,
                } => pulse_propagator(transition, angle_rad, phase_rad),
                PulseElement::Delay { duration_s } => free_propagator(det.minus, det.plus, duration_s)?,
            };
            u = step.then_after(&u);
        }
        Ok(u)
    }
}

fn is_angle(angle: f64, target: f64) -> bool {
    (angle - target).abs() < ANGLE_TOL
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be >= 0, got {t}")))
    }
}

fn swap_block() -> [PulseElement; 3] {
    [
        PulseElement::pulse(Transition::Minus, PI, 0.0),
        PulseElement::pulse(Transition::Plus, PI, 0.0),
        PulseElement::pulse(Transition::Minus, PI, 0.0),
    ]
}

/// CPMG free-evolution segments `t/2n, t/n × (n−1), t/2n`. The last segment
/// absorbs the rounding so the segments sum to `total`.
pub fn cpmg_delays(n: u32, total: f64) -> Vec<f64> {
    let n = n.max(1) as usize;
    let nf = n as f64;
    let edge = total / (2.0 * nf);
    let mid = total / nf;
    let mut out = Vec::with_capacity(n + 1);
    out.push(edge);
    out.extend(std::iter::repeat_n(mid, n - 1));
    let used: f64 = out.iter().sum();
    out.push((total - used).max(0.0));
    out
}

/// Plain Ramsey `π/2 − τ − π/2` on one transition. The second pulse has
/// phase `detuning_phase`; phase `π` gives `P0 = cos²(πΔτ)`.
pub fn make_ramsey(transition: Transition, tau: f64, detuning_phase: f64) -> Result<PulseSequence> {
    check_time("tau", tau)?;
    Ok(PulseSequence {
        label: SequenceLabel {
            family: "ramsey".into(),
            n: None,
            tau_s: tau,
            total_time_s: tau,
        },
        readout: ReadoutBasis::Population0,
        elements: vec![
            PulseElement::pulse(transition, FRAC_PI_2, 0.0),
            PulseElement::delay(tau),
            PulseElement::pulse(transition, FRAC_PI_2, detuning_phase),
        ],
    })
}

/// `π/2-1 − τ − swap − τ − π/2+1`; total free evolution `2τ`.
pub fn make_thermal_ramsey(tau: f64) -> Result<PulseSequence> {
    check_time("tau", tau)?;
    let mut elements = vec![PulseElement::pulse(Transition::Minus, FRAC_PI_2, 0.0), PulseElement::delay(tau)];
    elements.extend(swap_block());
    elements.push(PulseElement::delay(tau));
    elements.push(PulseElement::pulse(Transition::Plus, FRAC_PI_2, PI));
    Ok(PulseSequence {
        label: SequenceLabel {
            family: "thermal-ramsey".into(),
            n: None,
            tau_s: tau,
            total_time_s: 2.0 * tau,
        },
        readout: ReadoutBasis::Population0,
        elements,
    })
}

/// Thermal echo over total free evolution `2τ`: each arm of the thermal
/// Ramsey is refocused by a swap block placed symmetrically about the
/// centre, `π/2-1 − τ/2 − swap − τ − swap − τ/2 − π/2-1`. Static fields and
/// linear field drifts cancel; the thermal phase is `2π·ΔD·2τ`.
pub fn make_thermal_echo(tau: f64) -> Result<PulseSequence> {
    check_time("tau", tau)?;
    let mut seq = swap_train(2, 2.0 * tau);
    seq.label = SequenceLabel {
        family: "thermal-echo".into(),
        n: None,
        tau_s: tau,
        total_time_s: 2.0 * tau,
    };
    Ok(seq)
}

/// TCPMG-N: `π/2-1 − t/2n − [swap − t/n]×(n−1) − swap − t/2n − π/2` with the
/// closing pulse on the branch occupied after `n` swaps.
pub fn make_tcpmg(n: u32, total_time: f64) -> Result<PulseSequence> {
    if n < 1 {
        return Err(Error::arg("TCPMG pulse number must be >= 1"));
    }
    check_time("total_time", total_time)?;
    let mut seq = swap_train(n, total_time);
    seq.label = SequenceLabel {
        family: "tcpmg".into(),
        n: Some(n),
        tau_s: total_time,
        total_time_s: total_time,
    };
    Ok(seq)
}

fn swap_train(n: u32, total: f64) -> PulseSequence {
    let delays = cpmg_delays(n, total);
    let mut elements = Vec::with_capacity(3 * n as usize + delays.len() + 2);
    elements.push(PulseElement::pulse(Transition::Minus, FRAC_PI_2, 0.0));
    for (k, d) in delays.iter().enumerate() {
        elements.push(PulseElement::delay(*d));
        if k + 1 < delays.len() {
            elements.extend(swap_block());
        }
    }
    let last = if n.is_multiple_of(2) { Transition::Minus } else { Transition::Plus };
    elements.push(PulseElement::pulse(last, FRAC_PI_2, PI));
    PulseSequence {
        label: SequenceLabel {
            family: String::new(),
            n: Some(n),
            tau_s: total,
            total_time_s: total,
        },
        readout: ReadoutBasis::Population0,
        elements,
    }
}

/// Sequence family used as a sweep generator; `build` takes the total
/// free-evolution time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SequenceFamily {
    Ramsey { transition: Transition },
    ThermalRamsey,
    ThermalEcho,
    Tcpmg { n: u32 },
}

impl SequenceFamily {
    pub const NAMES: [&'static str; 4] = ["ramsey", "thermal-ramsey", "thermal-echo", "tcpmg"];

    pub fn parse(name: &str, n: u32) -> Result<Self> {
        match name {
            "ramsey" => Ok(SequenceFamily::Ramsey {
                transition: Transition::Minus,
            }),
            "thermal-ramsey" => Ok(SequenceFamily::ThermalRamsey),
            "thermal-echo" => Ok(SequenceFamily::ThermalEcho),
            "tcpmg" => Ok(SequenceFamily::Tcpmg { n }),
            other => Err(Error::arg(format!(
                "unknown sequence family '{other}'; valid families: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SequenceFamily::Ramsey { .. } => "ramsey",
            SequenceFamily::ThermalRamsey => "thermal-ramsey",
            SequenceFamily::ThermalEcho => "thermal-echo",
            SequenceFamily::Tcpmg { .. } => "tcpmg",
        }
    }

    pub fn build(&self, total_time: f64) -> Result<PulseSequence> {
        match *self {
            SequenceFamily::Ramsey { transition } => make_ramsey(transition, total_time, PI),
            SequenceFamily::ThermalRamsey => make_thermal_ramsey(0.5 * total_time),
            SequenceFamily::ThermalEcho => make_thermal_echo(0.5 * total_time),
            SequenceFamily::Tcpmg { n } => make_tcpmg(n, total_time),
        }
    }

    /// Whether the family cancels static magnetic phase.
    pub fn is_thermal(&self) -> bool {
        !matches!(self, SequenceFamily::Ramsey { .. })
    }
}

/// Level index in basis order: 0 = |-1>, 1 = |0>, 2 = |+1>.
const ZERO_LEVEL: usize = 1;

fn level_detuning(level: usize, det: &Detuning) -> f64 {
    match level {
        0 => det.minus,
        2 => det.plus,
        _ => 0.0,
    }
}

/// Effect of an ideal π pulse on one basis level: new level and the phase of
/// the amplitude factor.
fn pi_pulse_on(level: usize, transition: Transition, phase: f64) -> (usize, f64) {
    let t = transition.index();
    if level == ZERO_LEVEL {
        (t, -FRAC_PI_2 + phase)
    } else if level == t {
        (ZERO_LEVEL, -FRAC_PI_2 - phase)
    } else {
        (level, 0.0)
    }
}

fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Phase `Φ` with final `|0>` population `(1 + cos Φ)/2`, from segment
/// bookkeeping of which pair of levels holds the coherence.
///
/// The coherence always lives on two levels. A delay of length `τ` advances
/// the relative phase by `2π(Δ_a − Δ_b)τ`; an ideal π pulse relabels the
/// levels it touches and contributes its phase factor. Only ideal `π/2`
/// pulses at the ends and ideal `π` pulses in between are supported; for
/// the shipped generators `Φ = Σ 2π(ΔD ± gyro·δB)τ_seg` with the sign of the
/// branch occupied during each segment.
pub fn analytic_phase(seq: &PulseSequence, det: &Detuning) -> Result<f64> {
    seq.validate()?;
    let pulses: Vec<usize> = seq
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e, PulseElement::Pulse { .. }))
        .map(|(i, _)| i)
        .collect();
    if pulses.len() < 2 {
        return Err(Error::UnsupportedSequence(
            "interferometric sequence needs opening and closing pulses".into(),
        ));
    }
    let (first, last) = (pulses[0], pulses[pulses.len() - 1]);
    let PulseElement::Pulse {
        transition: t_open,
        angle_rad: a_open,
        phase_rad: phi_open,
    } = seq.elements[first]
    else {
        unreachable!()
    };
    if !is_angle(a_open, FRAC_PI_2) {
        return Err(Error::UnsupportedSequence(format!(
            "opening pulse must be π/2, got {a_open}"
        )));
    }

    // amplitudes: slot a on |0>, slot b on |t_open>; relative phase arg(b) − arg(a)
    let (mut level_a, mut level_b) = (ZERO_LEVEL, t_open.index());
    let mut rel_const = -FRAC_PI_2 + phi_open;
    let mut rel_dyn = 0.0;

    for e in &seq.elements[first + 1..last] {
        match *e {
            PulseElement::Delay { duration_s } => {
                let wa = level_detuning(level_a, det);
                let wb = level_detuning(level_b, det);
                rel_dyn -= TAU * (wb - wa) * duration_s;
            }
            PulseElement::Pulse {
                transition,
                angle_rad,
                phase_rad,
            } => {
                if !is_angle(angle_rad, PI) {
                    return Err(Error::UnsupportedSequence(format!(
                        "only π pulses allowed mid-sequence, got angle {angle_rad}"
                    )));
                }
                let (na, pa) = pi_pulse_on(level_a, transition, phase_rad);
                let (nb, pb) = pi_pulse_on(level_b, transition, phase_rad);
                level_a = na;
                level_b = nb;
                rel_const += pb - pa;
            }
        }
    }

    let PulseElement::Pulse {
        transition: t_close,
        angle_rad: a_close,
        phase_rad: phi_close,
    } = seq.elements[last]
    else {
        unreachable!()
    };
    if !is_angle(a_close, FRAC_PI_2) {
        return Err(Error::UnsupportedSequence(format!(
            "closing pulse must be π/2, got {a_close}"
        )));
    }
    let t_idx = t_close.index();
    // ψ = arg(c_t) − arg(c_0)
    let (psi_const, psi_dyn) = if level_a == ZERO_LEVEL && level_b == t_idx {
        (rel_const, rel_dyn)
    } else if level_b == ZERO_LEVEL && level_a == t_idx {
        (-rel_const, -rel_dyn)
    } else {
        return Err(Error::UnsupportedSequence(format!(
            "closing pulse on {t_close:?} does not address the coherence"
        )));
    };
    // P0 = (1 + sin(ψ − φ_close))/2 = (1 + cos(φ_close − 3π/2 − ψ))/2
    Ok(wrap_phase(phi_close - 1.5 * PI - psi_const) - psi_dyn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{QutritState, DEFAULT_GYRO, GAUSS};

    fn oracle(seq: &PulseSequence, dd: f64, db: f64) -> f64 {
        analytic_phase(seq, &Detuning::from_shifts(dd, db, DEFAULT_GYRO)).unwrap()
    }

    fn matrix_population(seq: &PulseSequence, det: &Detuning) -> f64 {
        let mut s = QutritState::ground();
        s.apply(&seq.propagator(det).unwrap());
        s.population(1)
    }

    #[test]
    fn ramsey_zero_tau_full_transfer() {
        let seq = make_ramsey(Transition::Minus, 0.0, 0.0).unwrap();
        let p = matrix_population(&seq, &Detuning::default());
        assert!(p.abs() < 1e-15);
        let phi = analytic_phase(&seq, &Detuning::default()).unwrap();
        assert!(((1.0 + phi.cos()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn thermal_ramsey_phases() {
        let seq = make_thermal_ramsey(1e-6).unwrap();
        assert!(oracle(&seq, 0.0, 10e-3 * GAUSS).abs() < 1e-12);
        let phi = oracle(&seq, 250e3, 0.0);
        assert!((phi - PI).abs() < 1e-12, "{phi}");
        // independent of static field
        let a = oracle(&seq, 123e3, 0.0);
        let b = oracle(&seq, 123e3, 80e-3 * GAUSS);
        assert!((a - b).abs() < 1e-9);
        assert_eq!(seq.readout_transition(), Some(Transition::Plus));
        assert!((seq.total_delay() - 2e-6).abs() < 1e-21);
    }

    #[test]
    fn plain_ramsey_magnetic_phase() {
        let seq = make_ramsey(Transition::Minus, 1e-6, PI).unwrap();
        let phi = oracle(&seq, 0.0, 10e-3 * GAUSS);
        let expect = -TAU * 28.024e3 * 1e-6;
        assert!((phi - expect).abs() < 1e-12, "{phi} vs {expect}");
    }

    #[test]
    fn thermal_echo_phases() {
        let seq = make_thermal_echo(1.5e-6).unwrap();
        assert_eq!(seq.swap_count(), 2);
        let phi = oracle(&seq, 200e3, 0.0);
        assert!((phi - TAU * 200e3 * 3e-6).abs() < 1e-9);
        assert!(oracle(&seq, 0.0, 40e-3 * GAUSS).abs() < 1e-12);
    }

    #[test]
    fn thermal_echo_cancels_linear_drift() {
        // branch signs over the segments; a drift c·t contributes
        // Σ sign_k ∫ c·t dt which must vanish
        let tau = 2e-6;
        let seq = make_thermal_echo(tau).unwrap();
        let mut t = 0.0;
        let mut branch = -1.0;
        let mut acc = 0.0;
        let mut pending_swap = 0;
        for e in &seq.elements[1..seq.elements.len() - 1] {
            match *e {
                PulseElement::Delay { duration_s } => {
                    acc += branch * ((t + duration_s).powi(2) - t * t) / 2.0;
                    t += duration_s;
                }
                PulseElement::Pulse { .. } => {
                    pending_swap += 1;
                    if pending_swap == 3 {
                        branch = -branch;
                        pending_swap = 0;
                    }
                }
            }
        }
        assert!(acc.abs() < 1e-12 * t * t, "{acc}");
    }

    #[test]
    fn tcpmg_structure_and_phase() {
        for n in 1..=8u32 {
            let t = 7.3e-6;
            let seq = make_tcpmg(n, t).unwrap();
            assert_eq!(seq.swap_count(), n as usize);
            let expect_branch = if n % 2 == 0 { Transition::Minus } else { Transition::Plus };
            assert_eq!(seq.readout_transition(), Some(expect_branch));
            assert!(((seq.total_delay() - t) / t).abs() < 1e-15);
            let phi = oracle(&seq, 300e3, 0.0);
            assert!((phi - TAU * 300e3 * t).abs() < 1e-9);
            assert!(oracle(&seq, 0.0, 70e-3 * GAUSS).abs() < 1e-9);
        }
        assert!(make_tcpmg(0, 1e-6).is_err());
    }

    #[test]
    fn swap_parity_matches_matrix() {
        // after n swaps the coherence sits on |-1> (even) or |+1> (odd)
        for n in 1..=8u32 {
            let seq = make_tcpmg(n, 4e-6).unwrap();
            let det = Detuning::from_shifts(0.0, 0.0, DEFAULT_GYRO);
            let mut s = QutritState::ground();
            for e in &seq.elements[..seq.elements.len() - 1] {
                let u = PulseSequence {
                    elements: vec![*e],
                    ..seq.clone()
                }
                .propagator(&det)
                .unwrap();
                s.apply(&u);
            }
            let occupied = if n % 2 == 0 { 0 } else { 2 };
            assert!((s.population(occupied) - 0.5).abs() < 1e-12, "n={n}");
            assert!(s.population(2 - occupied) < 1e-24);
        }
    }

    #[test]
    fn linear_in_thermal_shift() {
        let seq = make_tcpmg(3, 5e-6).unwrap();
        let p = |dd| oracle(&seq, dd, 20e-3 * GAUSS);
        let (a, b, c) = (p(-1e5), p(2e5), p(5e5));
        assert!(((b - a) - (c - b)).abs() < 1e-9);
        assert!(((b - a) / 3e5 - TAU * 5e-6).abs() < 1e-12);
    }

    #[test]
    fn unsupported_sequences() {
        let mut seq = make_tcpmg(1, 1e-6).unwrap();
        seq.elements.insert(2, PulseElement::pulse(Transition::Plus, 0.3, 0.0));
        assert!(matches!(
            analytic_phase(&seq, &Detuning::default()),
            Err(Error::UnsupportedSequence(_))
        ));
        let bad = PulseSequence {
            elements: vec![PulseElement::delay(1e-6)],
            ..seq
        };
        assert!(analytic_phase(&bad, &Detuning::default()).is_err());
    }

    #[test]
    fn oracle_matches_matrix_for_all_families() {
        let families = [
            SequenceFamily::Ramsey { transition: Transition::Minus },
            SequenceFamily::Ramsey { transition: Transition::Plus },
            SequenceFamily::ThermalRamsey,
            SequenceFamily::ThermalEcho,
            SequenceFamily::Tcpmg { n: 1 },
            SequenceFamily::Tcpmg { n: 4 },
            SequenceFamily::Tcpmg { n: 5 },
        ];
        for f in families {
            for &(dd, db, t) in &[(310e3, 13e-3 * GAUSS, 3.3e-6), (-1.7e6, -40e-3 * GAUSS, 0.9e-6)] {
                let seq = f.build(t).unwrap();
                let det = Detuning::from_shifts(dd, db, DEFAULT_GYRO);
                let phi = analytic_phase(&seq, &det).unwrap();
                let p = matrix_population(&seq, &det);
                assert!((p - (1.0 + phi.cos()) / 2.0).abs() < 1e-12, "{f:?}");
            }
        }
    }

    #[test]
    fn family_parse() {
        assert_eq!(SequenceFamily::parse("tcpmg", 3).unwrap(), SequenceFamily::Tcpmg { n: 3 });
        let err = SequenceFamily::parse("hahn", 1).unwrap_err().to_string();
        assert!(err.contains("thermal-echo") && err.contains("tcpmg"), "{err}");
    }

    #[test]
    fn json_golden() {
        let seq = make_tcpmg(1, 2e-6).unwrap();
        let json = serde_json::to_string(&seq).unwrap();
        let expect = concat!(
            r#"{"label":{"family":"tcpmg","n":1,"tau_s":2e-6,"total_time_s":2e-6},"readout":"population0","elements":["#,
            r#"{"kind":"pulse","transition":"minus","angle_rad":1.5707963267948966,"phase_rad":0.0},"#,
            r#"{"kind":"delay","duration_s":1e-6},"#,
            r#"{"kind":"pulse","transition":"minus","angle_rad":3.141592653589793,"phase_rad":0.0},"#,
            r#"{"kind":"pulse","transition":"plus","angle_rad":3.141592653589793,"phase_rad":0.0},"#,
            r#"{"kind":"pulse","transition":"minus","angle_rad":3.141592653589793,"phase_rad":0.0},"#,
            r#"{"kind":"delay","duration_s":1e-6},"#,
            r#"{"kind":"pulse","transition":"plus","angle_rad":1.5707963267948966,"phase_rad":3.141592653589793}]}"#
        );
        assert_eq!(json, expect);
        let back: PulseSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, seq);
    }
}
