//! Batch runner for the divacancy thermometry simulator.
//!
//! Every subcommand loads a [`config::RunConfig`], applies the command-line
//! overrides, runs one pipeline and writes a data file plus a JSON report
//! into the output directory. Identical config and seed give byte-identical
//! files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod profile;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::FitModel;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_json, write_outputs, Format, Provenance};

#[derive(Debug, Parser)]
#[command(name = "divtherm", version, about = "Divacancy thermometry experiments and fits")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Run seed; overrides `seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Disable magnetic noise and photon shot noise.
    #[arg(long, global = true)]
    pub no_noise: bool,

    /// Shots per point for sweeps and ODMR.
    #[arg(long, global = true, value_name = "N")]
    pub shots: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count rate vs laser power and saturation fit.
    Saturation,
    /// ODMR spectra and two-dip fits at each configured temperature.
    Odmr,
    /// ZFS vs temperature line and calibration file.
    Dvst,
    /// Time sweep of a sequence family and coherence fit.
    Coherence {
        /// Overrides `coherence.family`.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(divacancy::sequences::SequenceFamily::NAMES))]
        family: Option<String>,
        /// Overrides `coherence.n`, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
    },
    /// Shot-noise sensitivity with Monte-Carlo cross-check.
    Sensitivity,
    /// Temperature tracking over a profile.
    Monitor {
        /// Overrides `monitor.profile`.
        #[arg(long, value_name = "PATH")]
        profile: Option<PathBuf>,
    },
    /// Fit a model to an existing CSV without simulation.
    Fit {
        #[arg(long, value_enum)]
        model: FitModel,
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Saturation => "saturation",
            Command::Odmr => "odmr",
            Command::Dvst => "dvst",
            Command::Coherence { .. } => "coherence",
            Command::Sensitivity => "sensitivity",
            Command::Monitor { .. } => "monitor",
            Command::Fit { .. } => "fit",
        }
    }
}

/// Runs one invocation and returns the written paths.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Command::Coherence { family, n } = &cli.command {
        if let Some(f) = family {
            cfg.coherence.family = f.clone();
        }
        if let Some(n) = n {
            cfg.coherence.n = n.clone();
        }
    }
    cfg.apply_overrides(cli.seed, cli.shots, cli.no_noise)?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let prov = Provenance {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: cfg.sha256(),
        seed: cfg.seed,
    };
    log::info!("{} with config {} seed {}", prov.command, prov.config_sha256, prov.seed);

    let mut extra = Vec::new();
    let output = match &cli.command {
        Command::Saturation => commands::saturation(&cfg)?,
        Command::Odmr => commands::odmr(&cfg)?,
        Command::Dvst => {
            let (output, cal) = commands::dvst(&cfg)?;
            let path = dir.join("calibration.json");
            write_json(&path, &prov, &json!({ "calibration": cal }))?;
            extra.push(path);
            output
        }
        Command::Coherence { .. } => commands::coherence(&cfg)?,
        Command::Sensitivity => commands::sensitivity(&cfg)?,
        Command::Monitor { profile } => commands::monitor(&cfg, profile.as_deref())?,
        Command::Fit { model, input } => commands::fit(*model, input)?,
    };
    let mut paths = write_outputs(&dir, cli.format, &prov, &output)?;
    paths.extend(extra);
    Ok(paths)
}
