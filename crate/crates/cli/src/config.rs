//! Run configuration: one JSON document with unit-suffixed keys.
//!
//! Every section is optional and falls back to the shipped defaults.
//! Unknown keys are rejected. Units at the boundary are MHz, kHz/K, GHz/T,
//! G, mW, μs, ms and K; conversion to SI happens in the `to_*` helpers.

use std::path::{Path, PathBuf};

use divacancy::analysis::Calibration;
use divacancy::noise::NoiseModel;
use divacancy::sequences::SequenceFamily;
use divacancy::simulator::{ReadoutMode, ReadoutModel};
use divacancy::spin::{MicrowaveConfig, SpinParameters, TemperatureWindow, Transition, GAUSS};
use divacancy::Execution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const MHZ: f64 = 1e6;
const KHZ: f64 = 1e3;
const US: f64 = 1e-6;
const MW: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub execution: Execution,
    pub output: OutputConfig,
    pub spin: SpinConfig,
    pub microwave: MicrowaveSection,
    pub noise: NoiseSection,
    pub readout: ReadoutSection,
    pub saturation: SaturationSection,
    pub odmr: OdmrSection,
    pub coherence: CoherenceSection,
    pub sensitivity: SensitivitySection,
    pub monitor: MonitorSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_101,
            execution: Execution::Parallel,
            output: OutputConfig::default(),
            spin: SpinConfig::default(),
            microwave: MicrowaveSection::default(),
            noise: NoiseSection::default(),
            readout: ReadoutSection::default(),
            saturation: SaturationSection::default(),
            odmr: OdmrSection::default(),
            coherence: CoherenceSection::default(),
            sensitivity: SensitivitySection::default(),
            monitor: MonitorSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinConfig {
    pub d_ref_mhz: f64,
    pub t_ref_k: f64,
    pub d_slope_khz_per_k: f64,
    pub gyro_ghz_per_t: f64,
    pub b_field_g: f64,
    pub valid_range_k: [f64; 2],
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self {
            d_ref_mhz: 1350.6,
            t_ref_k: 299.1,
            d_slope_khz_per_k: -99.7,
            gyro_ghz_per_t: 28.024,
            b_field_g: 32.1,
            valid_range_k: [250.0, 350.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrowaveSection {
    /// Common offset of both drives above the reference transitions.
    pub detuning_mhz: f64,
}

impl Default for MicrowaveSection {
    fn default() -> Self {
        Self { detuning_mhz: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    pub sigma_static_g: f64,
    pub sigma_ou_g: f64,
    pub tau_c_us: f64,
    pub static_enabled: bool,
    pub ou_enabled: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            enabled: true,
            sigma_static_g: 0.05013,
            sigma_ou_g: 0.020379,
            tau_c_us: 3.0,
            static_enabled: true,
            ou_enabled: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub i_sat_mcps: f64,
    pub p_sat_mw: f64,
    pub laser_power_mw: f64,
    pub shot_window_us: f64,
    pub contrast: f64,
    pub shots: u32,
    pub mode: ReadoutMode,
    pub shot_noise: bool,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            i_sat_mcps: 458.0,
            p_sat_mw: 182.0,
            laser_power_mw: 170.0,
            shot_window_us: 3.0,
            contrast: 0.01,
            shots: 2000,
            mode: ReadoutMode::LockIn,
            shot_noise: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturationSection {
    pub powers_mw: Vec<f64>,
    /// Photon integration time per power point.
    pub integration_ms: f64,
    pub noise: bool,
}

impl Default for SaturationSection {
    fn default() -> Self {
        Self {
            powers_mw: (1..=40).map(|k| 10.0 * k as f64).collect(),
            integration_ms: 1.0,
            noise: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdmrSection {
    pub temperatures_k: Vec<f64>,
    pub freq_start_mhz: f64,
    pub freq_stop_mhz: f64,
    pub freq_step_mhz: f64,
    pub linewidth_mhz: f64,
    pub contrast: f64,
    pub shots: u32,
}

impl Default for OdmrSection {
    fn default() -> Self {
        Self {
            temperatures_k: (0..9).map(|k| 280.0 + 5.0 * k as f64).collect(),
            freq_start_mhz: 1220.0,
            freq_stop_mhz: 1480.0,
            freq_step_mhz: 0.5,
            linewidth_mhz: 8.0,
            contrast: 0.02,
            shots: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceSection {
    /// One of `ramsey`, `thermal-ramsey`, `thermal-echo`, `tcpmg`.
    pub family: String,
    /// TCPMG orders; ignored by the other families.
    pub n: Vec<u32>,
    pub transition: Transition,
    pub temperature_k: f64,
    pub points: usize,
    /// Longest free-evolution time; family-dependent when absent.
    pub t_max_us: Option<f64>,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        Self {
            family: "tcpmg".into(),
            n: vec![1, 2, 3, 4, 5],
            transition: Transition::Minus,
            temperature_k: 299.1,
            points: 150,
            t_max_us: None,
        }
    }
}

impl CoherenceSection {
    pub fn families(&self) -> Result<Vec<SequenceFamily>, CliError> {
        let first = SequenceFamily::parse(&self.family, 1).map_err(|e| CliError::Config(format!("coherence.family: {e}")))?;
        Ok(match first {
            SequenceFamily::Tcpmg { .. } => {
                if self.n.is_empty() {
                    return Err(CliError::Config("coherence.n: empty list".into()));
                }
                self.n.iter().map(|&n| SequenceFamily::Tcpmg { n }).collect()
            }
            SequenceFamily::Ramsey { .. } => vec![SequenceFamily::Ramsey {
                transition: self.transition,
            }],
            other => vec![other],
        })
    }

    /// Sweep end: explicit, or long enough for the default noise to decay.
    pub fn t_max(&self, family: &SequenceFamily) -> f64 {
        if let Some(t) = self.t_max_us {
            return t * US;
        }
        match family {
            SequenceFamily::Ramsey { .. } => 6.0 * US,
            SequenceFamily::ThermalRamsey | SequenceFamily::ThermalEcho => 30.0 * US,
            SequenceFamily::Tcpmg { n } => (30.0 + 7.5 * (n.saturating_sub(1)) as f64) * US,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub tcpmg_n: u32,
    pub temperature_k: f64,
    /// Coherence time; fitted from a population-readout sweep when absent.
    pub t_d_us: Option<f64>,
    /// Stretch exponent; fitted when absent.
    pub stretch: Option<f64>,
    /// Interrogation time; the optimum for `(T_D, n)` when absent.
    pub t_us: Option<f64>,
    pub monte_carlo: bool,
    pub repetitions: usize,
    pub slope_shots: u32,
    pub slope_step_k: f64,
    pub coherence_shots: u32,
    pub coherence_points: usize,
    pub coherence_t_max_us: f64,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            tcpmg_n: 1,
            temperature_k: 299.1,
            t_d_us: None,
            stretch: None,
            t_us: None,
            monte_carlo: true,
            repetitions: 200,
            slope_shots: 20_000,
            slope_step_k: 0.01,
            coherence_shots: 400,
            coherence_points: 150,
            coherence_t_max_us: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticProfile {
    pub duration_h: f64,
    pub step_h: f64,
    pub mean_k: f64,
    pub amplitude_k: f64,
    /// Hour of day at the first row; the sinusoid peaks at 15:00.
    pub start_hour: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        Self {
            duration_h: 24.0,
            step_h: 1.0,
            mean_k: 296.0,
            amplitude_k: 1.0,
            start_hour: 18.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    /// Read a calibration written by `dvst` instead of the inline values.
    pub path: Option<PathBuf>,
    pub d_ref_mhz: f64,
    pub t_ref_k: f64,
    pub slope_khz_per_k: f64,
    pub slope_err_khz_per_k: f64,
    pub valid_range_k: [f64; 2],
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            path: None,
            d_ref_mhz: 1350.6,
            t_ref_k: 299.1,
            slope_khz_per_k: -99.7,
            slope_err_khz_per_k: 0.4,
            valid_range_k: [290.0, 310.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorSection {
    /// CSV of `(time_s, temperature_k)`; the synthetic profile when absent.
    pub profile: Option<PathBuf>,
    pub synthetic: SyntheticProfile,
    pub detuning_mhz: f64,
    pub tcpmg_n: u32,
    pub points: usize,
    pub t_max_us: f64,
    pub calibration: CalibrationSection,
}

impl Default for MonitorSection {
    fn default() -> Self {
        Self {
            profile: None,
            synthetic: SyntheticProfile::default(),
            detuning_mhz: 1.5,
            tcpmg_n: 1,
            points: 150,
            t_max_us: 15.0,
            calibration: CalibrationSection::default(),
        }
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at '{path}': {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Hex SHA-256 of the canonical serialization of the effective config.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let spin = self.spin_parameters();
        spin.validate().map_err(|e| invalid("spin", e))?;
        self.microwave_config()
            .validate(&spin)
            .map_err(|e| invalid("microwave", e))?;
        self.noise_model().validate().map_err(|e| invalid("noise", e))?;
        self.readout_model().validate().map_err(|e| match e {
            divacancy::Error::ZeroContrast => CliError::Core(e),
            other => invalid("readout", other),
        })?;

        let s = &self.saturation;
        if s.powers_mw.is_empty() {
            return Err(invalid("saturation.powers_mw", "empty grid"));
        }
        for p in &s.powers_mw {
            positive("saturation.powers_mw", *p)?;
        }
        if s.powers_mw.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("saturation.powers_mw", "must be strictly increasing"));
        }
        positive("saturation.integration_ms", s.integration_ms)?;

        let o = &self.odmr;
        positive("odmr.freq_step_mhz", o.freq_step_mhz)?;
        positive("odmr.linewidth_mhz", o.linewidth_mhz)?;
        if !(o.freq_stop_mhz > o.freq_start_mhz) {
            return Err(invalid("odmr.freq_stop_mhz", "must exceed freq_start_mhz"));
        }
        if !(o.contrast > 0.0 && o.contrast < 1.0) {
            return Err(invalid("odmr.contrast", format!("must lie in (0, 1), got {}", o.contrast)));
        }
        if o.shots == 0 {
            return Err(invalid("odmr.shots", "must be >= 1"));
        }
        for t in &o.temperatures_k {
            spin.validity.check(*t).map_err(|e| invalid("odmr.temperatures_k", e))?;
        }
        if o.temperatures_k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("odmr.temperatures_k", "must be strictly increasing"));
        }

        let c = &self.coherence;
        c.families()?;
        if c.points < 8 {
            return Err(invalid("coherence.points", "at least 8 required"));
        }
        if let Some(t) = c.t_max_us {
            positive("coherence.t_max_us", t)?;
        }
        spin.validity
            .check(c.temperature_k)
            .map_err(|e| invalid("coherence.temperature_k", e))?;

        let q = &self.sensitivity;
        if q.tcpmg_n == 0 {
            return Err(invalid("sensitivity.tcpmg_n", "must be >= 1"));
        }
        for (key, v) in [
            ("sensitivity.t_d_us", q.t_d_us),
            ("sensitivity.stretch", q.stretch),
            ("sensitivity.t_us", q.t_us),
        ] {
            if let Some(v) = v {
                positive(key, v)?;
            }
        }
        positive("sensitivity.slope_step_k", q.slope_step_k)?;
        positive("sensitivity.coherence_t_max_us", q.coherence_t_max_us)?;
        if q.monte_carlo && q.repetitions < 2 {
            return Err(invalid("sensitivity.repetitions", "at least 2 required"));
        }
        spin.validity
            .check(q.temperature_k)
            .map_err(|e| invalid("sensitivity.temperature_k", e))?;

        let m = &self.monitor;
        positive("monitor.synthetic.step_h", m.synthetic.step_h)?;
        if !(m.synthetic.duration_h >= 0.0) {
            return Err(invalid("monitor.synthetic.duration_h", "must be >= 0"));
        }
        positive("monitor.t_max_us", m.t_max_us)?;
        if m.points < 8 {
            return Err(invalid("monitor.points", "at least 8 required"));
        }
        if m.tcpmg_n == 0 {
            return Err(invalid("monitor.tcpmg_n", "must be >= 1"));
        }
        if m.calibration.path.is_none() {
            self.inline_calibration()
                .validate()
                .map_err(|e| invalid("monitor.calibration", e))?;
        }
        Ok(())
    }

    pub fn spin_parameters(&self) -> SpinParameters {
        let s = &self.spin;
        SpinParameters {
            d_ref: s.d_ref_mhz * MHZ,
            t_ref: s.t_ref_k,
            d_slope: s.d_slope_khz_per_k * KHZ,
            gyro: s.gyro_ghz_per_t * 1e9,
            b_field: s.b_field_g * GAUSS,
            validity: TemperatureWindow {
                min: s.valid_range_k[0],
                max: s.valid_range_k[1],
            },
        }
    }

    pub fn microwave_config(&self) -> MicrowaveConfig {
        MicrowaveConfig::with_common_detuning(&self.spin_parameters(), self.microwave.detuning_mhz * MHZ)
    }

    pub fn noise_model(&self) -> NoiseModel {
        let n = &self.noise;
        if !n.enabled {
            return NoiseModel::none();
        }
        NoiseModel {
            sigma_static: n.sigma_static_g * GAUSS,
            sigma_ou: n.sigma_ou_g * GAUSS,
            tau_c: n.tau_c_us * US,
            static_enabled: n.static_enabled,
            ou_enabled: n.ou_enabled,
        }
    }

    pub fn readout_model(&self) -> ReadoutModel {
        let r = &self.readout;
        ReadoutModel {
            i_sat: r.i_sat_mcps * MHZ,
            p_sat: r.p_sat_mw * MW,
            laser_power: r.laser_power_mw * MW,
            shot_window: r.shot_window_us * US,
            contrast: r.contrast,
            shots: r.shots,
            mode: r.mode,
            shot_noise: r.shot_noise,
        }
    }

    pub fn inline_calibration(&self) -> Calibration {
        let c = &self.monitor.calibration;
        Calibration {
            d_ref: c.d_ref_mhz * MHZ,
            t_ref: c.t_ref_k,
            slope: c.slope_khz_per_k * KHZ,
            slope_err: c.slope_err_khz_per_k * KHZ,
            valid_range: (c.valid_range_k[0], c.valid_range_k[1]),
        }
    }

    pub fn odmr_grid(&self) -> Vec<f64> {
        let o = &self.odmr;
        let count = ((o.freq_stop_mhz - o.freq_start_mhz) / o.freq_step_mhz + 1e-9).floor() as usize + 1;
        (0..count).map(|k| (o.freq_start_mhz + k as f64 * o.freq_step_mhz) * MHZ).collect()
    }

    /// Applies `--seed`, `--shots` and `--no-noise`.
    pub fn apply_overrides(&mut self, seed: Option<u64>, shots: Option<u32>, no_noise: bool) -> Result<(), CliError> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(n) = shots {
            if n == 0 {
                return Err(invalid("--shots", "must be >= 1"));
            }
            self.readout.shots = n;
            self.odmr.shots = n;
        }
        if no_noise {
            self.noise.enabled = false;
            self.readout.shot_noise = false;
            self.saturation.noise = false;
        }
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = RunConfig::from_json(r#"{"readout": {"shotz": 3}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("readout"), "{msg}");
        assert!(msg.contains("shotz"), "{msg}");
    }

    #[test]
    fn empty_power_grid_rejected() {
        let err = RunConfig::from_json(r#"{"saturation": {"powers_mw": []}}"#).unwrap_err();
        assert!(err.to_string().contains("saturation.powers_mw"));
    }

    #[test]
    fn unit_conversion() {
        let cfg = RunConfig::default();
        let spin = cfg.spin_parameters();
        assert_eq!(spin, SpinParameters::default());
        assert_eq!(cfg.readout_model(), ReadoutModel::default());
        let n = cfg.noise_model();
        let core = NoiseModel::default();
        assert!((n.sigma_static / core.sigma_static - 1.0).abs() < 1e-12);
        assert!((n.sigma_ou / core.sigma_ou - 1.0).abs() < 1e-12);
        assert!((n.tau_c / core.tau_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.sha256(), b.sha256());
        b.seed += 1;
        assert_ne!(a.sha256(), b.sha256());
    }
}
