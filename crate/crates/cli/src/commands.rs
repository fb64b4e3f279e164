//! One function per subcommand. Each returns a data table and a JSON report.

use std::path::Path;

use divacancy::analysis::sensitivity::{monte_carlo_sensitivity, MonteCarloSpec};
use divacancy::analysis::thermometry::temperature_stderr;
use divacancy::analysis::*;
use divacancy::rng::derive_seed;
use divacancy::sequences::SequenceFamily;
use divacancy::simulator::{
    simulate_odmr, simulate_saturation, Experiment, MeasurementRecord, ReadoutMode, ReadoutModel,
};
use divacancy::spin::MicrowaveConfig;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Output, Table};
use crate::profile::{read_numeric_csv, TemperatureProfile};

const US: f64 = 1e-6;

fn experiment(cfg: &RunConfig, microwave: MicrowaveConfig, readout: ReadoutModel) -> Result<Experiment, CliError> {
    Ok(Experiment::new(cfg.spin_parameters(), microwave, cfg.noise_model(), readout)?.with_execution(cfg.execution))
}

fn time_grid(points: usize, t_max: f64) -> Vec<f64> {
    (1..=points).map(|k| k as f64 * t_max / points as f64).collect()
}

fn fit_json(fit: &FitResult) -> Value {
    serde_json::to_value(fit).expect("fit serializes")
}

pub fn saturation(cfg: &RunConfig) -> Result<Output, CliError> {
    let readout = cfg.readout_model();
    let powers: Vec<f64> = cfg.saturation.powers_mw.iter().map(|p| p * 1e-3).collect();
    let rec = simulate_saturation(
        &readout,
        &powers,
        cfg.saturation.integration_ms * 1e-3,
        cfg.saturation.noise,
        cfg.seed,
    )?;
    let fit = fit_saturation(&rec.x, &rec.y, Some(&rec.y_err))?;
    let mut table = Table::new(&["power_mw", "rate_cps", "rate_err_cps"]);
    for i in 0..rec.len() {
        table.push(vec![(rec.x[i] * 1e3).into(), rec.y[i].into(), rec.y_err[i].into()]);
    }
    let report = json!({
        "fit": fit_json(&fit),
        "i_sat_mcps": fit.value("i_sat") / 1e6,
        "i_sat_err_mcps": fit.stderr("i_sat") / 1e6,
        "p_sat_mw": fit.value("p_sat") * 1e3,
        "p_sat_err_mw": fit.stderr("p_sat") * 1e3,
        "injected": { "i_sat_mcps": readout.i_sat / 1e6, "p_sat_mw": readout.p_sat * 1e3 },
    });
    Ok(Output { table, report })
}

struct OdmrPoint {
    temperature: f64,
    record: MeasurementRecord,
    fit: FitResult,
}

fn odmr_points(cfg: &RunConfig) -> Result<Vec<OdmrPoint>, CliError> {
    let spin = cfg.spin_parameters();
    let readout = ReadoutModel {
        shots: cfg.odmr.shots,
        ..cfg.readout_model()
    };
    let grid = cfg.odmr_grid();
    let mut out = Vec::new();
    for (i, &t) in cfg.odmr.temperatures_k.iter().enumerate() {
        let record = simulate_odmr(
            &spin,
            t,
            cfg.odmr.linewidth_mhz * 1e6,
            cfg.odmr.contrast,
            &grid,
            &readout,
            derive_seed(cfg.seed, i as u64),
            cfg.execution,
        )?;
        let fit = fit_lorentzian_pair(&record)?;
        out.push(OdmrPoint {
            temperature: t,
            record,
            fit,
        });
    }
    Ok(out)
}

pub fn odmr(cfg: &RunConfig) -> Result<Output, CliError> {
    let points = odmr_points(cfg)?;
    let mut table = Table::new(&["temperature_k", "frequency_hz", "counts", "counts_err"]);
    let mut fits = Vec::new();
    for p in &points {
        for i in 0..p.record.len() {
            table.push(vec![
                p.temperature.into(),
                p.record.x[i].into(),
                p.record.y[i].into(),
                p.record.y_err[i].into(),
            ]);
        }
        fits.push(json!({ "temperature_k": p.temperature, "fit": fit_json(&p.fit) }));
    }
    Ok(Output {
        table,
        report: json!({ "fits": fits }),
    })
}

/// ODMR at every configured temperature, `D(T)` line and calibration.
pub fn dvst(cfg: &RunConfig) -> Result<(Output, Calibration), CliError> {
    let temps = &cfg.odmr.temperatures_k;
    if temps.len() < 3 {
        return Err(divacancy::Error::Calibration(format!(
            "a D(T) calibration needs at least 3 temperatures, got {}",
            temps.len()
        ))
        .into());
    }
    let points = odmr_points(cfg)?;
    let mut table = Table::new(&["temperature_k", "d_hz", "d_err_hz", "zeeman_hz", "zeeman_err_hz"]);
    let (mut d, mut e) = (Vec::new(), Vec::new());
    for p in &points {
        table.push(vec![
            p.temperature.into(),
            p.fit.value("d").into(),
            p.fit.stderr("d").into(),
            p.fit.value("zeeman").into(),
            p.fit.stderr("zeeman").into(),
        ]);
        d.push(p.fit.value("d"));
        e.push(p.fit.stderr("d"));
    }
    let line = fit_linear(temps, &d, Some(&e))?;
    let spin = cfg.spin_parameters();
    let cal = Calibration::from_linear_fit(&line, spin.t_ref, (temps[0], temps[temps.len() - 1]))?;
    let report = json!({
        "line": fit_json(&line),
        "slope_khz_per_k": line.value("slope") / 1e3,
        "slope_err_khz_per_k": line.stderr("slope") / 1e3,
        "injected_slope_khz_per_k": spin.d_slope / 1e3,
        "calibration": cal,
    });
    Ok((Output { table, report }, cal))
}

pub fn coherence(cfg: &RunConfig) -> Result<Output, CliError> {
    let spin = cfg.spin_parameters();
    let exp = experiment(cfg, cfg.microwave_config(), cfg.readout_model())?;
    let env = spin.environment_at(cfg.coherence.temperature_k)?;
    let families = cfg.coherence.families()?;
    let mut table = Table::new(&["sequence", "n", "time_s", "signal", "signal_err"]);
    let mut fits = Vec::new();
    let mut by_n = Vec::new();
    for (k, family) in families.iter().enumerate() {
        let x = time_grid(cfg.coherence.points, cfg.coherence.t_max(family));
        let rec = exp.sweep(family, &x, &env, derive_seed(cfg.seed, k as u64))?;
        let n = match family {
            SequenceFamily::Tcpmg { n } => *n,
            SequenceFamily::ThermalEcho => 2,
            SequenceFamily::ThermalRamsey => 1,
            SequenceFamily::Ramsey { .. } => 0,
        };
        for i in 0..rec.len() {
            table.push(vec![
                rec.meta.label.as_str().into(),
                n.into(),
                rec.x[i].into(),
                rec.y[i].into(),
                rec.y_err[i].into(),
            ]);
        }
        let fit = fit_damped_cosine(&rec, None)?;
        if matches!(family, SequenceFamily::Tcpmg { .. }) {
            by_n.push((n as f64, fit.value("t_d"), fit.stderr("t_d")));
        }
        fits.push(json!({
            "sequence": rec.meta.label,
            "n": n,
            "t_d_us": fit.value("t_d") / US,
            "t_d_err_us": fit.stderr("t_d") / US,
            "f_hz": fit.value("f"),
            "fit": fit_json(&fit),
        }));
    }
    let mut report = json!({ "fits": fits });
    if by_n.len() >= 3 {
        let n: Vec<f64> = by_n.iter().map(|r| r.0).collect();
        let t: Vec<f64> = by_n.iter().map(|r| r.1).collect();
        let line = fit_linear(&n, &t, None)?;
        let r2 = r_squared(&n, &t, line.value("slope"), line.value("intercept"));
        let monotone = t.windows(2).all(|w| w[1] >= w[0]);
        report["t_d_vs_n"] = json!({
            "line": fit_json(&line),
            "slope_us_per_n": line.value("slope") / US,
            "r_squared": r2,
            "monotone": monotone,
        });
    }
    Ok(Output { table, report })
}

pub fn sensitivity(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = &cfg.sensitivity;
    let spin = cfg.spin_parameters();
    let readout = cfg.readout_model();
    let (p0, p1) = (readout.bright_counts(), readout.dark_counts());

    let (t_d, stretch, source) = match (s.t_d_us, s.stretch) {
        (Some(t), Some(n)) => (t * US, n, "config".to_string()),
        _ => {
            let probe = experiment(
                cfg,
                cfg.microwave_config(),
                ReadoutModel {
                    mode: ReadoutMode::Population,
                    shots: s.coherence_shots.max(1),
                    ..readout
                },
            )?;
            let x = time_grid(s.coherence_points, s.coherence_t_max_us * US);
            let env = spin.environment_at(s.temperature_k)?;
            let rec = probe.sweep(&SequenceFamily::Tcpmg { n: s.tcpmg_n }, &x, &env, derive_seed(cfg.seed, 0))?;
            let fit = fit_damped_cosine(&rec, None)?;
            (
                s.t_d_us.map_or(fit.value("t_d"), |t| t * US),
                s.stretch.unwrap_or(fit.value("n")),
                format!("tcpmg-{} population-readout fit", s.tcpmg_n),
            )
        }
    };
    let t_opt = optimal_interrogation_time(t_d, stretch)?;
    let t = s.t_us.map_or(t_opt, |v| v * US);
    let input = SensitivityInput {
        p0,
        p1,
        d_d_dt: spin.d_slope,
        t_d,
        n: stretch,
        t,
    };
    let eta = divacancy::analysis::sensitivity(&input)?;

    let mut table = Table::new(&["quantity", "value", "unit"]);
    let mut row = |name: &str, v: f64, unit: &str| table.push(vec![name.into(), v.into(), unit.into()]);
    row("p0", p0, "photons/shot");
    row("p1", p1, "photons/shot");
    row("d_d_dt", spin.d_slope, "Hz/K");
    row("t_d", t_d, "s");
    row("n", stretch, "1");
    row("t", t, "s");
    row("t_opt", t_opt, "s");
    row("eta", eta, "K/sqrt(Hz)");

    let mut report = json!({
        "input": input,
        "coherence_source": source,
        "t_opt_s": t_opt,
        "eta_k_per_sqrt_hz": eta,
        "eta_mk_per_sqrt_hz": eta * 1e3,
    });
    if s.monte_carlo {
        let exp = experiment(cfg, cfg.microwave_config(), readout)?;
        let mc = monte_carlo_sensitivity(
            &exp,
            &MonteCarloSpec {
                n: s.tcpmg_n,
                t,
                temperature: s.temperature_k,
                repetitions: s.repetitions,
                slope_shots: s.slope_shots,
                slope_step: s.slope_step_k,
            },
            derive_seed(cfg.seed, 1),
        )?;
        let ratio = mc.eta / eta;
        row("eta_monte_carlo", mc.eta, "K/sqrt(Hz)");
        row("ratio", ratio, "1");
        report["monte_carlo"] = serde_json::to_value(mc).expect("serializes");
        report["ratio"] = json!(ratio);
    }
    Ok(Output { table, report })
}

fn load_calibration(path: &Path) -> Result<Calibration, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::input(path, e.to_string()))?;
    let inner = doc.get("report").cloned().unwrap_or(doc);
    let inner = inner.get("calibration").cloned().unwrap_or(inner);
    let cal: Calibration = serde_json::from_value(inner).map_err(|e| CliError::input(path, e.to_string()))?;
    cal.validate()?;
    Ok(cal)
}

pub fn monitor(cfg: &RunConfig, profile_override: Option<&Path>) -> Result<Output, CliError> {
    let m = &cfg.monitor;
    let profile = match profile_override.or(m.profile.as_deref()) {
        Some(path) => TemperatureProfile::load(path)?,
        None => TemperatureProfile::synthetic(&m.synthetic),
    };
    let cal = match &m.calibration.path {
        Some(path) => load_calibration(path)?,
        None => cfg.inline_calibration(),
    };
    let detuning = m.detuning_mhz * 1e6;
    let convention = DetuningConvention::Positive;
    cal.check_operating_point(detuning, convention)?;

    let spin = cfg.spin_parameters();
    let microwave = MicrowaveConfig {
        omega_minus: cal.d_ref - spin.zeeman() + detuning,
        omega_plus: cal.d_ref + spin.zeeman() + detuning,
    };
    let exp = experiment(cfg, microwave, cfg.readout_model())?;
    let family = SequenceFamily::Tcpmg { n: m.tcpmg_n };
    let x = time_grid(m.points, m.t_max_us * US);

    let mut table = Table::new(&["time_s", "temperature_k", "f_fit_hz", "f_err_hz", "t_estimate_k", "t_err_k"]);
    let (mut sq, mut err_sum) = (0.0, 0.0);
    for i in 0..profile.len() {
        let truth = profile.temperature_k[i];
        let env = spin.environment_at(truth)?;
        let rec = exp.sweep(&family, &x, &env, derive_seed(cfg.seed, i as u64))?;
        let fit = fit_damped_cosine(&rec, None)?;
        let (f, f_err) = (fit.value("f"), fit.stderr("f"));
        let est = frequency_to_temperature(f, detuning, &cal, convention)?;
        let t_err = temperature_stderr(f_err, &cal);
        sq += (est - truth).powi(2);
        err_sum += t_err;
        table.push(vec![
            profile.time_s[i].into(),
            truth.into(),
            f.into(),
            f_err.into(),
            est.into(),
            t_err.into(),
        ]);
    }
    let rows = profile.len() as f64;
    let report = json!({
        "rows": profile.len(),
        "rms_error_k": (sq / rows).sqrt(),
        "mean_t_err_k": err_sum / rows,
        "detuning_hz": detuning,
        "calibration": cal,
    });
    Ok(Output { table, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    DampedCosine,
    LorentzianPair,
    Linear,
    Saturation,
}

/// Fits `model` to columns `x, y[, y_err]` of a CSV file.
pub fn fit(model: FitModel, input: &Path) -> Result<Output, CliError> {
    let cols = read_numeric_csv(input, 2)?;
    let (x, y) = (cols[0].clone(), cols[1].clone());
    let err = cols.get(2).cloned();
    let record = || {
        MeasurementRecord::new(
            x.clone(),
            y.clone(),
            err.clone().unwrap_or_else(|| vec![0.0; x.len()]),
            divacancy::simulator::RecordMeta {
                label: input.display().to_string(),
                axis: divacancy::simulator::Axis::Time,
                seed: 0,
                shots: 0,
            },
        )
        .map_err(|e| CliError::input(input, e.to_string()))
    };
    let result = match model {
        FitModel::DampedCosine => fit_damped_cosine(&record()?, None)?,
        FitModel::LorentzianPair => fit_lorentzian_pair(&record()?)?,
        FitModel::Linear => fit_linear(&x, &y, err.as_deref())?,
        FitModel::Saturation => fit_saturation(&x, &y, err.as_deref())?,
    };
    let mut table = Table::new(&["parameter", "value", "stderr"]);
    for p in &result.params {
        table.push(vec![p.name.as_str().into(), p.value.into(), p.stderr.into()]);
    }
    Ok(Output {
        table,
        report: json!({ "fit": fit_json(&result) }),
    })
}
