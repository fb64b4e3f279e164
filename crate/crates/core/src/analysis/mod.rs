//! Parameter extraction and metrology.

mod damped_cosine;
mod linear;
mod lorentzian;
mod lsq;
mod saturation;
pub mod sensitivity;
pub mod thermometry;

use serde::{Deserialize, Serialize};

pub use damped_cosine::{damped_cosine, fit_damped_cosine, DampedCosineInit};
pub use linear::{fit_linear, r_squared};
pub use lorentzian::{fit_lorentzian_pair, lorentzian_pair, LorentzianPair};
pub use saturation::fit_saturation;
pub use sensitivity::{optimal_interrogation_time, sensitivity, SensitivityInput};
pub use thermometry::{frequency_to_temperature, Calibration, DetuningConvention};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParameter>,
    /// `sqrt(Σ w r²)`.
    pub residual_norm: f64,
    /// `χ² / (points − parameters)`.
    pub reduced_chi2: f64,
    pub points: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; NaN when absent.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn stderr(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.stderr)
    }

    fn param(name: &str, value: f64, stderr: f64) -> FitParameter {
        FitParameter {
            name: name.to_string(),
            value,
            stderr: if stderr.is_finite() { stderr.abs() } else { f64::NAN },
        }
    }
}

/// Unit weights when no error bars are given; the covariance is then scaled
/// by the reduced χ².
pub(crate) fn resolve_weights(n: usize, y_err: Option<&[f64]>) -> (Vec<f64>, bool) {
    match y_err {
        Some(e) if e.len() == n && e.iter().all(|&v| v > 0.0 && v.is_finite()) => {
            (e.iter().map(|v| 1.0 / (v * v)).collect(), true)
        }
        _ => (vec![1.0; n], false),
    }
}
