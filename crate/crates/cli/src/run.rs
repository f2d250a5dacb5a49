// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Runs a resolved configuration and collects results plus invariant checks.

use serde::{Deserialize, Serialize};
use tlsloss::analytic::{
    classify_regime, compute_coupling, field_per_photon, gamma_effective, knee_weak, loss_classical,
    quasistatic_tls, rabi_parameter, Coupling, RegimeReport,
};
use tlsloss::bloch::{bloch_bound_violation, evolve_bloch, evolve_manifold, manifold_negativity};
use tlsloss::lindblad::{
    energy_flow_residual, energy_increase, evolve_master_with, first_invalid_row, trace_deviation, EngineMode,
    MasterOptions,
};
use tlsloss::loss::{find_ns_min, locate_knee, sweep_loss, LossCurve, NsMinResult};
use tlsloss::{IntegratorConfig, ModelParams, ObservableRecord};

use crate::config::{Engine, Model, Mode, Observables, RunConfig};
use crate::error::CliResult;

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-8;
pub const ENERGY_FLOW_TOL: f64 = 1e-3;
/// Relative to `max(n0, 1)`.
pub const ENERGY_INCREASE_TOL: f64 = 1e-8;
pub const BLOCH_BOUND_TOL: f64 = 1e-9;
/// Relative to `n0`.
pub const NEGATIVITY_TOL: f64 = 1e-9;
/// Density-matrix snapshots per full master run.
pub const SNAPSHOTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

impl InvariantCheck {
    fn at_most(name: String, residual: f64, tol: f64) -> Self {
        Self { name, residual, pass: residual <= tol }
    }
}

#[derive(Clone, Debug)]
pub struct EngineSeries {
    pub engine: Engine,
    pub records: Vec<ObservableRecord>,
}

#[derive(Clone, Debug)]
pub struct SweepCurve {
    pub template: ModelParams,
    pub curve: LossCurve,
    /// `None` when fewer than two end groups of valid points exist.
    pub knee: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub g: f64,
    pub field_per_photon: f64,
}

#[derive(Clone, Debug)]
pub enum Results {
    Evolve(Vec<EngineSeries>),
    Sweep { curves: Vec<SweepCurve>, classical: bool },
    Regime(RegimeReport),
    Params(ParamsReport),
    NsMin(NsMinResult),
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub results: Results,
    pub checks: Vec<InvariantCheck>,
}

impl RunOutput {
    pub fn failed_checks(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn dimensionless(cfg: &RunConfig) -> &ModelParams {
    match &cfg.model {
        Model::Dimensionless(p) => p,
        Model::Physical(_) => unreachable!("physical parameters only reach mode params"),
    }
}

pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    let mut checks = Vec::new();
    let results = match cfg.mode {
        Mode::Evolve => {
            let params = dimensionless(cfg);
            let icfg = cfg.integrator.as_ref().expect("evolve carries an integrator");
            let mut series = Vec::new();
            for engine in cfg.engine.expand() {
                let records = run_engine(engine, params, icfg, cfg.observables, &mut checks)?;
                series.push(EngineSeries { engine, records });
            }
            Results::Evolve(series)
        }
        Mode::Sweep => {
            let plan = cfg.sweep.as_ref().expect("sweep carries a plan");
            let mut curves = Vec::new();
            for template in &plan.curves {
                let curve = sweep_loss(template, &plan.n0_grid, &plan.config)?;
                let tag = format!("sweep.g={}", template.g);
                let failed = curve.points.iter().filter(|p| p.failure.is_some()).count();
                checks.push(InvariantCheck::at_most(format!("{tag}.failed_points"), failed as f64, 0.0));
                let nonpositive = curve
                    .points
                    .iter()
                    .filter(|p| p.q_inv.is_some_and(|q| !(q > 0.0)))
                    .count();
                checks.push(InvariantCheck::at_most(format!("{tag}.q_inv_positive"), nonpositive as f64, 0.0));
                let knee = locate_knee(&curve).ok();
                curves.push(SweepCurve { template: template.clone(), curve, knee });
            }
            Results::Sweep { curves, classical: plan.classical }
        }
        Mode::Regime => Results::Regime(classify_regime(dimensionless(cfg))),
        Mode::Params => {
            let Model::Physical(ph) = &cfg.model else { unreachable!() };
            Results::Params(ParamsReport {
                g: compute_coupling(ph),
                field_per_photon: field_per_photon(ph),
            })
        }
        Mode::NsMin => {
            let plan = cfg.ns_min.as_ref().expect("ns-min carries a plan");
            Results::NsMin(find_ns_min(plan.t1, &plan.ratios, &plan.config)?)
        }
    };
    Ok(RunOutput { config: cfg.clone(), results, checks })
}

fn run_engine(
    engine: Engine,
    params: &ModelParams,
    icfg: &IntegratorConfig,
    observables: Observables,
    checks: &mut Vec<InvariantCheck>,
) -> CliResult<Vec<ObservableRecord>> {
    let tag = engine.tag();
    let records = match engine {
        Engine::Master => {
            let full = observables == Observables::Full;
            let opts = MasterOptions {
                mode: if full { EngineMode::Full } else { EngineMode::Populations },
                snapshot_indices: if full { snapshot_indices(icfg.sample_count) } else { Vec::new() },
                ..MasterOptions::default()
            };
            let run = evolve_master_with(params, icfg, &opts)?;
            checks.push(InvariantCheck::at_most(format!("{tag}.trace"), trace_deviation(&run.records), TRACE_TOL));
            if full {
                let herm = run.snapshots.iter().map(|s| s.rho.hermiticity_residual()).fold(0.0, f64::max);
                checks.push(InvariantCheck::at_most(format!("{tag}.hermiticity"), herm, HERMITICITY_TOL));
                let min_eig = run
                    .snapshots
                    .iter()
                    .map(|s| s.min_eigenvalue())
                    .fold(f64::INFINITY, f64::min);
                checks.push(InvariantCheck {
                    name: format!("{tag}.min_eigenvalue"),
                    residual: min_eig,
                    pass: min_eig > MIN_EIGENVALUE_TOL,
                });
            }
            let rise = energy_increase(&run.records);
            checks.push(InvariantCheck::at_most(
                format!("{tag}.energy_monotone"),
                rise,
                ENERGY_INCREASE_TOL * params.n0.max(1.0),
            ));
            run.records
        }
        Engine::Bloch => {
            let records = evolve_bloch(params, icfg)?;
            checks.push(InvariantCheck::at_most(
                format!("{tag}.bloch_bounds"),
                bloch_bound_violation(&records),
                BLOCH_BOUND_TOL,
            ));
            records
        }
        Engine::Manifold => manifold(params, icfg, tag, checks)?,
        Engine::Analytic => match classify_regime(params).coupling {
            Coupling::Strong => manifold(params, icfg, tag, checks)?,
            Coupling::Weak => weak_closed_form(params, &icfg.sample_times()),
        },
        Engine::All => unreachable!("expanded before running"),
    };
    if let Some(res) = energy_flow_residual(&records, params.t1) {
        if engine != Engine::Analytic {
            checks.push(InvariantCheck::at_most(format!("{tag}.energy_flow"), res, ENERGY_FLOW_TOL));
        }
    }
    let bad = first_invalid_row(&records).map_or(0, |k| {
        records[k..].iter().filter(|r| !r.invariant_violations().is_empty()).count()
    });
    checks.push(InvariantCheck::at_most(format!("{tag}.invalid_rows"), bad as f64, 0.0));
    Ok(records)
}

fn manifold(
    params: &ModelParams,
    icfg: &IntegratorConfig,
    tag: &str,
    checks: &mut Vec<InvariantCheck>,
) -> CliResult<Vec<ObservableRecord>> {
    let records = evolve_manifold(params, &icfg.sample_times())?;
    checks.push(InvariantCheck::at_most(
        format!("{tag}.negativity"),
        manifold_negativity(&records),
        NEGATIVITY_TOL * params.n0,
    ));
    Ok(records)
}

/// `SNAPSHOTS` sample indices spread evenly over `count` samples.
pub fn snapshot_indices(count: usize) -> Vec<usize> {
    let k = SNAPSHOTS.min(count);
    if k <= 1 {
        return vec![0];
    }
    let mut idx: Vec<usize> = (0..k).map(|j| j * (count - 1) / (k - 1)).collect();
    idx.dedup();
    idx
}

/// Weak-coupling closed form. Below the knee `n_w` the photon number decays
/// as `e^{−Γt}`; above it, it first falls on the saturated line
/// `n0 − t/(2T1)` down to `n_w`, where the two slopes coincide, and then
/// decays exponentially. σ₊₊ follows the quasistatic TLS response.
pub fn weak_closed_form(params: &ModelParams, times: &[f64]) -> Vec<ObservableRecord> {
    let t2 = params.t2();
    let gamma = gamma_effective(params.g, params.t1, t2);
    let nw = knee_weak(params.g, params.t1, t2).exact;
    let (n_start, t_start) = if params.n0 > nw {
        (nw, 2.0 * params.t1 * (params.n0 - nw))
    } else {
        (params.n0, 0.0)
    };
    times
        .iter()
        .map(|&t| {
            let n = if t < t_start {
                params.n0 - t / (2.0 * params.t1)
            } else {
                n_start * (-gamma * (t - t_start)).exp()
            };
            let r = rabi_parameter(params.g, n, params.t1, t2);
            ObservableRecord::new(t, n, quasistatic_tls(r, params.t1, t2).0)
        })
        .collect()
}

/// Closed-form classical loss at each point of a curve.
pub fn classical_loss(template: &ModelParams, r0: f64) -> f64 {
    loss_classical(r0, template.g, template.t2(), template.omega)
}
