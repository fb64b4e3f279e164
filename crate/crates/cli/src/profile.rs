//! Temperature profiles and two-column CSV input.

use std::f64::consts::TAU;
use std::path::Path;

use crate::config::SyntheticProfile;
use crate::error::CliError;

/// Rows of `(elapsed time in s, temperature in K)` with strictly
/// increasing time.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureProfile {
    pub time_s: Vec<f64>,
    pub temperature_k: Vec<f64>,
}

impl TemperatureProfile {
    pub fn new(time_s: Vec<f64>, temperature_k: Vec<f64>) -> Result<Self, String> {
        if time_s.len() != temperature_k.len() {
            return Err("time and temperature columns differ in length".into());
        }
        if time_s.is_empty() {
            return Err("profile has no rows".into());
        }
        if time_s.iter().chain(&temperature_k).any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        if let Some(i) = time_s.windows(2).position(|w| w[1] <= w[0]) {
            return Err(format!("time is not strictly increasing at row {}", i + 2));
        }
        Ok(Self { time_s, temperature_k })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let cols = read_numeric_csv(path, 2)?;
        Self::new(cols[0].clone(), cols[1].clone()).map_err(|m| CliError::input(path, m))
    }

    /// Sinusoidal day cycle peaking at 15:00.
    pub fn synthetic(p: &SyntheticProfile) -> Self {
        let rows = (p.duration_h / p.step_h + 1e-9).floor() as usize + 1;
        let time_s: Vec<f64> = (0..rows).map(|k| k as f64 * p.step_h * 3600.0).collect();
        let temperature_k = time_s
            .iter()
            .map(|t| {
                let hour = p.start_hour + t / 3600.0;
                p.mean_k + p.amplitude_k * (TAU * (hour - 9.0) / 24.0).sin()
            })
            .collect();
        Self { time_s, temperature_k }
    }

    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }
}

/// Reads a comma-separated file with `#` comments and an optional header
/// row. Returns the first `min_cols` or more numeric columns.
pub fn read_numeric_csv(path: &Path, min_cols: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(path, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if row == 0 && cols.is_empty() => continue,
            Err(_) => return Err(CliError::input(path, format!("non-numeric value on data row {}", row + 1))),
        };
        if cols.is_empty() {
            if values.len() < min_cols {
                return Err(CliError::input(
                    path,
                    format!("expected at least {min_cols} columns, found {}", values.len()),
                ));
            }
            cols = vec![Vec::new(); values.len()];
        }
        if values.len() != cols.len() {
            return Err(CliError::input(path, format!("row {} has {} columns", row + 1, values.len())));
        }
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v);
        }
    }
    if cols.is_empty() {
        return Err(CliError::input(path, "no data rows"));
    }
    Ok(cols)
}
