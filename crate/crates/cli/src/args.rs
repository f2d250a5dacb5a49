// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line flags and their mapping onto [`RawConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};
use tlsloss::loss::EstimatorMethod;

use crate::config::{Engine, Format, Lifetime, MethodName, Mode, Observables, RawConfig};
use crate::error::CliResult;
use crate::figures::Figure;

#[derive(Debug, Parser)]
#[command(name = "tlsloss", version, about = "Resonator energy loss through a resonant two-level system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Time series of ⟨n⟩, ⟨σ₊₊⟩ and coherences.
    Evolve,
    /// Loss tangent against initial photon number.
    Sweep,
    /// Coupling and saturation regime of a parameter set.
    Regime,
    /// Coupling constant from microscopic TLS parameters.
    Params,
    /// Smallest strong-coupling knee over T1/T2 ratios.
    NsMin,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Evolve => Mode::Evolve,
            Command::Sweep => Mode::Sweep,
            Command::Regime => Mode::Regime,
            Command::Params => Mode::Params,
            Command::NsMin => Mode::NsMin,
        }
    }
}

fn estimator(s: &str) -> Result<EstimatorMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown estimator {s:?} (auto, exponential-fit, linear-fit)"))
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// TOML configuration file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub fig: Option<Figure>,
    #[arg(long, global = true)]
    pub engine: Option<Engine>,
    #[arg(long = "g", global = true, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Couplings of the sweep curves.
    #[arg(long = "g-curves", global = true, value_delimiter = ',')]
    pub g_curves: Option<Vec<f64>>,
    #[arg(long = "T1", global = true)]
    pub t1: Option<f64>,
    #[arg(long = "T2", global = true)]
    pub t2: Option<f64>,
    /// Pure-dephasing time; `inf` for none.
    #[arg(long = "Tphi", global = true)]
    pub tphi: Option<String>,
    #[arg(long, global = true)]
    pub n0: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub fock_cutoff: Option<usize>,
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub method: Option<MethodName>,
    #[arg(long, global = true)]
    pub steps_per_sample: Option<usize>,
    #[arg(long, global = true)]
    pub observables: Option<Observables>,
    #[arg(long, global = true, value_parser = estimator)]
    pub estimator: Option<EstimatorMethod>,
    #[arg(long, global = true)]
    pub n0_min: Option<f64>,
    #[arg(long, global = true)]
    pub n0_max: Option<f64>,
    #[arg(long, global = true)]
    pub n0_points: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub n0_grid: Option<Vec<f64>>,
    /// Omit the classical curve from sweep output.
    #[arg(long, global = true)]
    pub no_classical: bool,
    /// T1/T2 ratios for ns-min.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// g·T1 for ns-min.
    #[arg(long, global = true)]
    pub coupling: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long = "Delta", global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long = "Delta0", global = true)]
    pub delta0: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long = "V", global = true)]
    pub volume: Option<f64>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
}

impl Cli {
    /// Flags as the topmost configuration layer.
    pub fn to_raw(&self) -> RawConfig {
        let f = &self.flags;
        RawConfig {
            mode: self.command.map(Command::mode),
            fig: f.fig,
            engine: f.engine,
            g: f.g,
            g_curves: f.g_curves.clone(),
            t1: f.t1,
            t2: f.t2,
            tphi: f.tphi.clone().map(Lifetime::Word),
            n0: f.n0,
            omega: f.omega,
            fock_cutoff: f.fock_cutoff,
            t_end: f.t_end,
            samples: f.samples,
            rel_tol: f.rel_tol,
            abs_tol: f.abs_tol,
            method: f.method,
            steps_per_sample: f.steps_per_sample,
            observables: f.observables,
            estimator: f.estimator,
            n0_grid: f.n0_grid.clone(),
            n0_min: f.n0_min,
            n0_max: f.n0_max,
            n0_points: f.n0_points,
            classical: f.no_classical.then_some(false),
            ratios: f.ratios.clone(),
            coupling: f.coupling,
            p: f.p,
            theta: f.theta,
            delta: f.delta,
            delta0: f.delta0,
            epsilon: f.epsilon,
            volume: f.volume,
            hbar: f.hbar,
            out: f.out.clone(),
            format: f.format,
            ..RawConfig::default()
        }
    }

    /// Recipe, then config file, then flags.
    pub fn layered(&self) -> CliResult<RawConfig> {
        let file = match &self.flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| crate::error::CliError::config("config", format!("{}: {e}", path.display())))?;
                RawConfig::from_toml(&text)?
            }
            None => RawConfig::default(),
        };
        crate::config::with_recipe(file.overlay(self.to_raw()))
    }
}

/// Accepts single-dash spellings of long flags (`-g 10`, `-T1 1`,
/// `-n0=3`) by rewriting them to the double-dash form. Negative numbers and
/// true short flags are left alone.
pub fn normalize_args<I, T>(args: I) -> Vec<OsString>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cmd = Cli::command();
    let mut longs: Vec<String> = cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
    longs.extend(["help".to_string(), "version".to_string()]);
    args.into_iter()
        .map(Into::into)
        .map(|arg| {
            let Some(s) = arg.to_str() else { return arg };
            let Some(rest) = s.strip_prefix('-').filter(|r| !r.starts_with('-')) else { return arg };
            let name = rest.split('=').next().unwrap_or(rest);
            if longs.iter().any(|l| l == name) {
                OsString::from(format!("-{s}"))
            } else {
                arg
            }
        })
        .collect()
}
