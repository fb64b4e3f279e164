//! Frequency-to-temperature inversion.
//!
//! With both drives offset by `δ` from the calibrated transitions the
//! thermal oscillation frequency is `|δ − slope·(T − t_ref)|`. The
//! detuning convention fixes the sign of `δ − slope·(T − t_ref)` over the
//! whole valid range, which makes the inversion single-valued.

use serde::{Deserialize, Serialize};

use super::FitResult;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// ZFS at `t_ref` (Hz).
    pub d_ref: f64,
    pub t_ref: f64,
    /// `dD/dT` (Hz/K).
    pub slope: f64,
    pub slope_err: f64,
    pub valid_range: (f64, f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningConvention {
    /// Drives above the transitions; frequency grows as `D` falls.
    #[default]
    Positive,
    Negative,
}

impl DetuningConvention {
    fn sign(self) -> f64 {
        match self {
            DetuningConvention::Positive => 1.0,
            DetuningConvention::Negative => -1.0,
        }
    }
}

impl Calibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope.is_finite() && self.slope != 0.0) {
            return Err(Error::Calibration(format!("slope must be non-zero, got {}", self.slope)));
        }
        if !(self.slope_err >= 0.0) {
            return Err(Error::Calibration(format!("slope_err must be >= 0, got {}", self.slope_err)));
        }
        let (lo, hi) = self.valid_range;
        if !(lo < hi) {
            return Err(Error::Calibration(format!("empty valid range [{lo}, {hi}]")));
        }
        if !(self.d_ref.is_finite() && self.t_ref.is_finite()) {
            return Err(Error::Calibration("d_ref and t_ref must be finite".into()));
        }
        Ok(())
    }

    /// From a `D` vs `T` line fit (`slope`, `intercept`).
    pub fn from_linear_fit(fit: &FitResult, t_ref: f64, valid_range: (f64, f64)) -> Result<Self> {
        let slope = fit.value("slope");
        let cal = Calibration {
            d_ref: slope * t_ref + fit.value("intercept"),
            t_ref,
            slope,
            slope_err: fit.stderr("slope"),
            valid_range,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn zfs(&self, temp: f64) -> f64 {
        self.d_ref + self.slope * (temp - self.t_ref)
    }

    /// Oscillation frequency expected at `temp` for drive offset `detuning`.
    pub fn expected_frequency(&self, temp: f64, detuning: f64) -> f64 {
        (detuning - self.slope * (temp - self.t_ref)).abs()
    }

    /// Rejects operating points whose oscillation frequency would pass
    /// through zero inside the valid range, or whose offset has the wrong
    /// sign for `convention`.
    pub fn check_operating_point(&self, detuning: f64, convention: DetuningConvention) -> Result<()> {
        self.validate()?;
        let (lo, hi) = self.valid_range;
        let reach = (lo - self.t_ref).abs().max((hi - self.t_ref).abs()) * self.slope.abs();
        if detuning * convention.sign() <= reach {
            return Err(Error::Calibration(format!(
                "detuning {detuning} Hz must be {:?} and exceed the thermal shift {reach} Hz over [{lo}, {hi}] K",
                convention
            )));
        }
        Ok(())
    }
}

/// `T = t_ref + (detuning − f_signed)/slope` with `f_signed = ±f_fit`
/// according to `convention`. Warns when the result lies outside the
/// calibration's valid range.
pub fn frequency_to_temperature(
    f_fit: f64,
    detuning: f64,
    cal: &Calibration,
    convention: DetuningConvention,
) -> Result<f64> {
    cal.validate()?;
    if !f_fit.is_finite() {
        return Err(Error::arg(format!("fitted frequency must be finite, got {f_fit}")));
    }
    let signed = convention.sign() * f_fit.abs();
    let temp = cal.t_ref + (detuning - signed) / cal.slope;
    let (lo, hi) = cal.valid_range;
    if !(lo..=hi).contains(&temp) {
        log::warn!("temperature {temp} K extrapolates beyond calibration range [{lo}, {hi}] K");
    }
    Ok(temp)
}

/// Propagated temperature error `σ_f / |slope|`.
pub fn temperature_stderr(f_stderr: f64, cal: &Calibration) -> f64 {
    f_stderr / cal.slope.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cal() -> Calibration {
        Calibration {
            d_ref: 1350.6e6,
            t_ref: 299.1,
            slope: -99.7e3,
            slope_err: 0.4e3,
            valid_range: (280.0, 320.0),
        }
    }

    #[test]
    fn reference_point() {
        let t = frequency_to_temperature(2e6, 2e6, &cal(), DetuningConvention::Positive).unwrap();
        assert_eq!(t, 299.1);
    }

    #[test]
    fn hotter_is_faster_with_positive_detuning() {
        let c = cal();
        let f0 = c.expected_frequency(299.1, 3e6);
        let f1 = c.expected_frequency(300.1, 3e6);
        assert!((f1 - f0 - 99.7e3).abs() < 1e-6);
    }

    #[test]
    fn zero_slope_rejected() {
        let c = Calibration { slope: 0.0, ..cal() };
        assert!(matches!(
            frequency_to_temperature(1e6, 1e6, &c, DetuningConvention::Positive),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn operating_point() {
        let c = cal();
        assert!(c.check_operating_point(3e6, DetuningConvention::Positive).is_ok());
        assert!(c.check_operating_point(1e6, DetuningConvention::Positive).is_err());
        assert!(c.check_operating_point(3e6, DetuningConvention::Negative).is_err());
        assert!(c.check_operating_point(-3e6, DetuningConvention::Negative).is_ok());
    }

    proptest! {
        #[test]
        fn inversion_is_identity(temp in 280.0f64..320.0, det in 2.5e6f64..6e6, neg in any::<bool>()) {
            let c = cal();
            let (conv, det) = if neg { (DetuningConvention::Negative, -det) } else { (DetuningConvention::Positive, det) };
            let f = c.expected_frequency(temp, det);
            let back = frequency_to_temperature(f, det, &c, conv).unwrap();
            prop_assert!((back - temp).abs() < 1e-9);
        }
    }
}
