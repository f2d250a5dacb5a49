// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: the flat key-value document, figure recipes layered
//! under it, and validation into a [`RunConfig`].

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tlsloss::analytic::PhysicalParams;
use tlsloss::loss::{default_n0_grid, log_grid, EstimatorMethod, LossEstimatorConfig, NsMinConfig, SweepConfig};
use tlsloss::params::{tphi_from_t2, T2_CONSISTENCY_TOL};
use tlsloss::{IntegratorConfig, IntegratorMethod, ModelParams};

use crate::error::{CliError, CliResult};
use crate::figures::Figure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolve,
    Sweep,
    Regime,
    Params,
    NsMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Master,
    Bloch,
    Manifold,
    Analytic,
    All,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::Master => "master",
            Engine::Bloch => "bloch",
            Engine::Manifold => "manifold",
            Engine::Analytic => "analytic",
            Engine::All => "all",
        }
    }

    /// Engines a run expands to; `all` means master, Bloch and the
    /// closed-form solution on one time grid.
    pub fn expand(self) -> Vec<Engine> {
        match self {
            Engine::All => vec![Engine::Master, Engine::Bloch, Engine::Analytic],
            e => vec![e],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// What the master engine evolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Observables {
    /// Whole density matrix: adds ⟨a⟩, ⟨σ₋⟩, purity and positivity checks.
    Full,
    /// Diagonal excitation sector only: n, σ₊₊, ⟨a†σ₋⟩ and trace.
    Populations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    AdaptiveRk45,
    FixedRk4,
}

/// A lifetime that may be infinite. Written as a number or as `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lifetime {
    Value(f64),
    Word(String),
}

impl Lifetime {
    fn resolve(&self, field: &str) -> CliResult<Option<f64>> {
        match self {
            Lifetime::Value(v) if v.is_infinite() && *v > 0.0 => Ok(None),
            Lifetime::Value(v) => Ok(Some(*v)),
            Lifetime::Word(w) => match w.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "none" => Ok(None),
                _ => w
                    .parse::<f64>()
                    .map(|v| if v.is_infinite() { None } else { Some(v) })
                    .map_err(|_| CliError::config(field, format!("not a time: {w:?}"))),
            },
        }
    }

    fn from_option(t: Option<f64>) -> Self {
        match t {
            Some(v) => Lifetime::Value(v),
            None => Lifetime::Word("inf".into()),
        }
    }
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Value(v) => write!(f, "{v}"),
            Lifetime::Word(w) => f.write_str(w),
        }
    }
}

/// The flat configuration document. Every key is optional; later layers
/// override earlier ones (recipe < file < flags).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub fig: Option<Figure>,
    pub engine: Option<Engine>,
    pub g: Option<f64>,
    /// Couplings of the curves in a sweep; defaults to `[g]`.
    pub g_curves: Option<Vec<f64>>,
    #[serde(rename = "T1")]
    pub t1: Option<f64>,
    #[serde(rename = "T2")]
    pub t2: Option<f64>,
    #[serde(rename = "Tphi")]
    pub tphi: Option<Lifetime>,
    pub n0: Option<f64>,
    pub omega: Option<f64>,
    pub fock_cutoff: Option<usize>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub method: Option<MethodName>,
    pub steps_per_sample: Option<usize>,
    pub observables: Option<Observables>,
    pub estimator: Option<EstimatorMethod>,
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
    pub transient_skip: Option<f64>,
    pub n0_grid: Option<Vec<f64>>,
    pub n0_min: Option<f64>,
    pub n0_max: Option<f64>,
    pub n0_points: Option<usize>,
    pub samples_per_period: Option<usize>,
    pub min_samples: Option<usize>,
    pub time_factor: Option<f64>,
    pub classical: Option<bool>,
    /// T1/T2 ratios searched by ns-min.
    pub ratios: Option<Vec<f64>>,
    /// `g·T1` used by ns-min.
    pub coupling: Option<f64>,
    pub p: Option<f64>,
    pub theta: Option<f64>,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    #[serde(rename = "Delta0")]
    pub delta0: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "V")]
    pub volume: Option<f64>,
    pub hbar: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        RawConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RawConfig {
    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))
    }

    /// Values set in `top` win.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        let base = self;
        overlay_fields!(base, top;
            mode, fig, engine, g, g_curves, t1, t2, tphi, n0, omega, fock_cutoff, t_end,
            samples, rel_tol, abs_tol, method, steps_per_sample, observables, estimator,
            window_start, window_end, transient_skip, n0_grid, n0_min, n0_max, n0_points,
            samples_per_period, min_samples, time_factor, classical, ratios, coupling, p,
            theta, delta, delta0, epsilon, volume, hbar, out, format)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Dimensionless(ModelParams),
    Physical(PhysicalParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    /// One parameter template per curve; `n0` is replaced per point.
    pub curves: Vec<ModelParams>,
    pub n0_grid: Vec<f64>,
    pub config: SweepConfig,
    /// Also emit the classical curve for each template.
    pub classical: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsMinPlan {
    pub t1: f64,
    pub ratios: Vec<f64>,
    pub config: NsMinConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub fig: Option<Figure>,
    pub engine: Engine,
    pub model: Model,
    pub integrator: Option<IntegratorConfig>,
    pub observables: Observables,
    pub estimator: LossEstimatorConfig,
    pub sweep: Option<SweepPlan>,
    pub ns_min: Option<NsMinPlan>,
    pub output: OutputSpec,
}

pub const DEFAULT_SAMPLES: usize = 1001;
pub const DEFAULT_RATIOS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

fn need<T: Copy>(v: Option<T>, field: &str, mode: Mode) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(field, format!("required for mode {mode:?}")))
}

/// Tφ from whichever of T2 and Tφ were given. Neither means no dephasing;
/// both must agree to [`T2_CONSISTENCY_TOL`].
pub fn resolve_dephasing(t1: f64, t2: Option<f64>, tphi: Option<&Lifetime>) -> CliResult<Option<f64>> {
    let from_tphi = tphi.map(|l| l.resolve("Tphi")).transpose()?;
    match (t2, from_tphi) {
        (None, None) => Ok(None),
        (None, Some(tp)) => Ok(tp),
        (Some(t2), None) => Ok(tphi_from_t2(t1, t2)?),
        (Some(t2), Some(tp)) => {
            let implied = 1.0 / (0.5 / t1 + tp.map_or(0.0, |t| 1.0 / t));
            if (implied - t2).abs() > T2_CONSISTENCY_TOL * t2.abs() {
                return Err(CliError::config(
                    "T2",
                    format!("T2 = {t2} disagrees with T1 = {t1} and Tphi (which imply T2 = {implied})"),
                ));
            }
            Ok(tp)
        }
    }
}

fn physical_given(raw: &RawConfig) -> bool {
    raw.p.is_some()
        || raw.theta.is_some()
        || raw.delta.is_some()
        || raw.delta0.is_some()
        || raw.epsilon.is_some()
        || raw.volume.is_some()
}

/// Builds a [`RunConfig`] from a fully layered document.
pub fn resolve(raw: &RawConfig) -> CliResult<RunConfig> {
    let mode = raw
        .mode
        .ok_or_else(|| CliError::config("mode", "missing (evolve, sweep, regime, params or ns-min)"))?;
    let engine = raw.engine.unwrap_or(Engine::Master);
    if engine == Engine::All && mode != Mode::Evolve {
        return Err(CliError::config("engine", "`all` is only valid with mode evolve"));
    }
    if raw.engine.is_some() && !matches!(mode, Mode::Evolve) && engine != Engine::Master {
        return Err(CliError::config("engine", "only mode evolve selects an engine"));
    }
    let omega = raw.omega.unwrap_or(1.0);

    let model = if mode == Mode::Params {
        if raw.g.is_some() && !physical_given(raw) {
            return Err(CliError::config("g", "mode params derives g from p, theta, Delta, Delta0, epsilon, V"));
        }
        let phys = PhysicalParams::new(
            need(raw.p, "p", mode)?,
            raw.theta.unwrap_or(0.0),
            need(raw.delta, "Delta", mode)?,
            need(raw.delta0, "Delta0", mode)?,
            need(raw.epsilon, "epsilon", mode)?,
            need(raw.volume, "V", mode)?,
            raw.omega.unwrap_or_else(|| {
                let e = raw.delta.unwrap_or(0.0).hypot(raw.delta0.unwrap_or(0.0));
                e / raw.hbar.unwrap_or(1.0)
            }),
            raw.hbar.unwrap_or(1.0),
        )?;
        Model::Physical(phys)
    } else {
        if physical_given(raw) {
            return Err(CliError::config("p", "physical parameters are only read by mode params"));
        }
        let t1 = match mode {
            Mode::NsMin => raw.t1.unwrap_or(1.0),
            _ => need(raw.t1, "T1", mode)?,
        };
        let g = match mode {
            Mode::NsMin => raw.coupling.unwrap_or(NsMinConfig::default().coupling) / t1,
            Mode::Sweep => raw.g.or(raw.g_curves.as_ref().and_then(|v| v.first().copied())).ok_or_else(|| {
                CliError::config("g", "required for mode Sweep (or give g_curves)")
            })?,
            _ => need(raw.g, "g", mode)?,
        };
        let tphi = resolve_dephasing(t1, raw.t2, raw.tphi.as_ref())?;
        let n0 = match mode {
            Mode::Evolve | Mode::Regime => need(raw.n0, "n0", mode)?,
            _ => raw.n0.unwrap_or(1.0),
        };
        let mut params = ModelParams::new(g, t1, tphi, omega, n0)?;
        if let Some(n) = raw.fock_cutoff {
            params = params.with_fock_cutoff(n)?;
        }
        Model::Dimensionless(params)
    };

    let integrator = if mode == Mode::Evolve {
        let method = match raw.method.unwrap_or(MethodName::AdaptiveRk45) {
            MethodName::AdaptiveRk45 => IntegratorMethod::AdaptiveRk45,
            MethodName::FixedRk4 => IntegratorMethod::FixedRk4 {
                steps_per_sample: raw.steps_per_sample.unwrap_or(10),
            },
        };
        let cfg = IntegratorConfig {
            rel_tol: raw.rel_tol.unwrap_or(1e-8),
            abs_tol: raw.abs_tol.unwrap_or(1e-10),
            t_end: need(raw.t_end, "t_end", mode)?,
            sample_count: raw.samples.unwrap_or(DEFAULT_SAMPLES),
            method,
        };
        cfg.validate()?;
        Some(cfg)
    } else {
        None
    };

    let defaults = LossEstimatorConfig::default();
    let estimator = LossEstimatorConfig {
        method: raw.estimator.unwrap_or(defaults.method),
        window: (
            raw.window_start.unwrap_or(defaults.window.0),
            raw.window_end.unwrap_or(defaults.window.1),
        ),
        transient_skip: raw.transient_skip.unwrap_or(defaults.transient_skip),
    };
    estimator.validate()?;

    let sweep_defaults = SweepConfig::default();
    let sweep_config = SweepConfig {
        estimator: estimator.clone(),
        rel_tol: raw.rel_tol.unwrap_or(sweep_defaults.rel_tol),
        abs_tol: raw.abs_tol.unwrap_or(sweep_defaults.abs_tol),
        samples_per_period: raw.samples_per_period.unwrap_or(sweep_defaults.samples_per_period),
        min_samples: raw.min_samples.unwrap_or(sweep_defaults.min_samples),
        time_factor: raw.time_factor.unwrap_or(sweep_defaults.time_factor),
        reference: sweep_defaults.reference,
    };
    if sweep_config.samples_per_period == 0 || sweep_config.min_samples < 2 {
        return Err(CliError::config("samples_per_period", "need samples_per_period >= 1 and min_samples >= 2"));
    }
    if !(sweep_config.time_factor > 0.0) {
        return Err(CliError::config("time_factor", "must be positive"));
    }

    let sweep = if mode == Mode::Sweep {
        let Model::Dimensionless(template) = &model else { unreachable!() };
        let couplings = raw.g_curves.clone().unwrap_or_else(|| vec![template.g]);
        if couplings.is_empty() {
            return Err(CliError::config("g_curves", "must not be empty"));
        }
        let curves = couplings
            .iter()
            .map(|&g| ModelParams::new(g, template.t1, template.tphi, template.omega, template.n0))
            .collect::<tlsloss::Result<Vec<_>>>()?;
        Some(SweepPlan {
            curves,
            n0_grid: n0_grid(raw)?,
            config: sweep_config.clone(),
            classical: raw.classical.unwrap_or(true),
        })
    } else {
        None
    };

    let ns_min = if mode == Mode::NsMin {
        let Model::Dimensionless(p) = &model else { unreachable!() };
        let grid = if raw.n0_grid.is_some() || raw.n0_min.is_some() {
            n0_grid(raw)?
        } else {
            NsMinConfig::default().n0_grid
        };
        let ratios = raw.ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
        if ratios.is_empty() || ratios.iter().any(|&r| !(r >= 0.5)) {
            return Err(CliError::config("ratios", "T1/T2 ratios must be non-empty and each >= 0.5"));
        }
        Some(NsMinPlan {
            t1: p.t1,
            ratios,
            config: NsMinConfig {
                coupling: p.g * p.t1,
                n0_grid: grid,
                sweep: sweep_config,
            },
        })
    } else {
        None
    };

    Ok(RunConfig {
        mode,
        fig: raw.fig,
        engine,
        model,
        integrator,
        observables: raw.observables.unwrap_or(Observables::Full),
        estimator,
        sweep,
        ns_min,
        output: OutputSpec {
            path: raw.out.clone(),
            format: raw.format.unwrap_or(Format::Csv),
        },
    })
}

fn n0_grid(raw: &RawConfig) -> CliResult<Vec<f64>> {
    let grid = match &raw.n0_grid {
        Some(g) => g.clone(),
        None if raw.n0_min.is_none() && raw.n0_max.is_none() && raw.n0_points.is_none() => {
            default_n0_grid()
        }
        None => {
            let lo = raw.n0_min.unwrap_or(1e-2);
            let hi = raw.n0_max.unwrap_or(1e3);
            let k = raw.n0_points.unwrap_or(24);
            if !(lo > 0.0 && hi >= lo && k >= 1) || (k == 1 && hi != lo) {
                return Err(CliError::config("n0_min", "need 0 < n0_min <= n0_max and n0_points >= 2"));
            }
            if k == 1 {
                vec![lo]
            } else {
                log_grid(lo, hi, k)
            }
        }
    };
    if grid.is_empty() || grid.iter().any(|&n| !(n > 0.0)) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::config("n0_grid", "must be non-empty, positive and sorted"));
    }
    Ok(grid)
}

/// Parses and validates a configuration document on its own (no recipe or
/// flag layers beyond the recipe its `fig` key names).
pub fn validate_config(text: &str) -> CliResult<RunConfig> {
    let raw = RawConfig::from_toml(text)?;
    resolve(&with_recipe(raw)?)
}

/// Puts the recipe named by `raw.fig` underneath `raw`.
pub fn with_recipe(raw: RawConfig) -> CliResult<RawConfig> {
    let Some(fig) = raw.fig else { return Ok(raw) };
    let mut recipe = fig.recipe();
    if raw.t2.is_some() || raw.tphi.is_some() {
        recipe.t2 = None;
        recipe.tphi = None;
    }
    if raw.g.is_some() {
        recipe.g_curves = None;
    }
    if raw.n0_grid.is_some() {
        recipe.n0_min = None;
        recipe.n0_max = None;
        recipe.n0_points = None;
    }
    if let (Some(m), Some(r)) = (raw.mode, recipe.mode) {
        if m != r {
            return Err(CliError::config(
                "fig",
                format!("{fig} is a {r:?} figure, not a {m:?} one"),
            ));
        }
    }
    Ok(recipe.overlay(raw))
}

impl RunConfig {
    /// The fully resolved document; resolving it again gives an equal
    /// configuration.
    pub fn to_raw(&self) -> RawConfig {
        let mut raw = RawConfig {
            mode: Some(self.mode),
            fig: self.fig,
            engine: Some(self.engine),
            format: Some(self.output.format),
            out: self.output.path.clone(),
            observables: Some(self.observables),
            estimator: Some(self.estimator.method),
            window_start: Some(self.estimator.window.0),
            window_end: Some(self.estimator.window.1),
            transient_skip: Some(self.estimator.transient_skip),
            ..RawConfig::default()
        };
        match &self.model {
            Model::Dimensionless(p) => {
                raw.g = Some(p.g);
                raw.t1 = Some(p.t1);
                raw.tphi = Some(Lifetime::from_option(p.tphi));
                raw.n0 = Some(p.n0);
                raw.omega = Some(p.omega);
                raw.fock_cutoff = Some(p.dims.fock_cutoff());
            }
            Model::Physical(ph) => {
                raw.p = Some(ph.p);
                raw.theta = Some(ph.theta);
                raw.delta = Some(ph.delta);
                raw.delta0 = Some(ph.delta0);
                raw.epsilon = Some(ph.epsilon);
                raw.volume = Some(ph.volume);
                raw.omega = Some(ph.omega);
                raw.hbar = Some(ph.hbar);
            }
        }
        if let Some(cfg) = &self.integrator {
            raw.t_end = Some(cfg.t_end);
            raw.samples = Some(cfg.sample_count);
            raw.rel_tol = Some(cfg.rel_tol);
            raw.abs_tol = Some(cfg.abs_tol);
            match cfg.method {
                IntegratorMethod::AdaptiveRk45 => raw.method = Some(MethodName::AdaptiveRk45),
                IntegratorMethod::FixedRk4 { steps_per_sample } => {
                    raw.method = Some(MethodName::FixedRk4);
                    raw.steps_per_sample = Some(steps_per_sample);
                }
            }
        }
        let sweep_cfg = self
            .sweep
            .as_ref()
            .map(|s| &s.config)
            .or(self.ns_min.as_ref().map(|n| &n.config.sweep));
        if let Some(s) = sweep_cfg {
            raw.rel_tol = Some(s.rel_tol);
            raw.abs_tol = Some(s.abs_tol);
            raw.samples_per_period = Some(s.samples_per_period);
            raw.min_samples = Some(s.min_samples);
            raw.time_factor = Some(s.time_factor);
        }
        if let Some(s) = &self.sweep {
            raw.g_curves = Some(s.curves.iter().map(|c| c.g).collect());
            raw.n0_grid = Some(s.n0_grid.clone());
            raw.classical = Some(s.classical);
        }
        if let Some(n) = &self.ns_min {
            raw.g = None;
            raw.coupling = Some(n.config.coupling);
            raw.ratios = Some(n.ratios.clone());
            raw.n0_grid = Some(n.config.n0_grid.clone());
        }
        raw
    }
}
