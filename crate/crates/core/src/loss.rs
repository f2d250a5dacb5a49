// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Loss tangents from trajectories, sweeps over the initial photon number,
//! knee location and the minimum strong-coupling knee.
//!
//! The quality factor is defined through `⟨ṅ⟩ = −ω⟨n⟩/Q`. At `t = 0` the
//! derivative vanishes because resonator-TLS correlations start at zero, so
//! the rate is fitted over a window after a short transient instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    classify_regime, gamma_effective, rabi_parameter, RegimeReport, Saturation,
};
use crate::error::{Error, Result};
use crate::lindblad::{evolve_master_on_grid, MasterOptions};
use crate::params::{uniform_grid, IntegratorConfig, IntegratorMethod, ModelParams};
use crate::record::ObservableRecord;

/// Minimum number of samples a fit needs.
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMethod {
    /// Fit `ln⟨n⟩` against `t`; `q = |slope|/ω`.
    ExponentialFit,
    /// Fit `⟨n⟩` against `t`; `q = |slope|/(ω·n0)`.
    LinearFit,
    /// Exponential when unsaturated, linear in the crossover band and when
    /// saturated.
    Auto,
}

/// The fit that actually produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Exponential,
    Linear,
    /// Exponential fit of the samples at `t = kπ/g`, used when the decay
    /// oscillates at the vacuum Rabi frequency.
    Envelope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEstimatorConfig {
    pub method: EstimatorMethod,
    /// `(start_fraction, end_fraction)` of the initial photon number.
    pub window: (f64, f64),
    /// Transient skipped before fitting, in units of T2.
    pub transient_skip: f64,
}

impl Default for LossEstimatorConfig {
    fn default() -> Self {
        Self {
            method: EstimatorMethod::Auto,
            window: (0.95, 0.60),
            transient_skip: 3.0,
        }
    }
}

impl LossEstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let (start, end) = self.window;
        if !(0.0 < end && end < start && start <= 1.0) {
            return Err(Error::invalid(
                "window",
                "need 0 < end_fraction < start_fraction <= 1",
            ));
        }
        if !(self.transient_skip >= 0.0 && self.transient_skip.is_finite()) {
            return Err(Error::invalid("transient_skip", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub q_inv: f64,
    pub kind: EstimatorKind,
    pub points: usize,
}

/// Least-squares slope and intercept.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `n(t)` at `t`, linearly interpolated between samples.
fn sample_at(records: &[ObservableRecord], t: f64) -> Option<f64> {
    let k = records.partition_point(|r| r.t < t);
    let r = records.get(k)?;
    if (r.t - t).abs() <= 1e-9 * t.abs().max(1.0) || k == 0 {
        return Some(r.n);
    }
    let l = &records[k - 1];
    Some(l.n + (r.n - l.n) * (t - l.t) / (r.t - l.t))
}

fn envelope_fit(
    records: &[ObservableRecord],
    params: &ModelParams,
    cfg: &LossEstimatorConfig,
) -> Result<LossEstimate> {
    if params.g <= 0.0 {
        return Err(Error::NonMonotoneDecay(
            "oscillating decay without coupling".into(),
        ));
    }
    let period = std::f64::consts::PI / params.g;
    let t_last = records.last().map_or(0.0, |r| r.t);
    let floor = cfg.window.1 * params.n0;
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    let mut k = 0usize;
    loop {
        let t = k as f64 * period;
        if t > t_last * (1.0 + 1e-12) {
            break;
        }
        let Some(n) = sample_at(records, t) else { break };
        if n <= 0.0 {
            break;
        }
        ts.push(t);
        ys.push(n.ln());
        if n <= floor {
            break;
        }
        k += 1;
    }
    if ts.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooShort {
            found: ts.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let (slope, _) = linear_fit(&ts, &ys);
    Ok(LossEstimate {
        q_inv: -slope / params.omega,
        kind: EstimatorKind::Envelope,
        points: ts.len(),
    })
}

/// Loss tangent `1/Q` of a trajectory.
pub fn loss_from_trajectory(
    records: &[ObservableRecord],
    params: &ModelParams,
    cfg: &LossEstimatorConfig,
) -> Result<f64> {
    Ok(estimate_loss(records, params, cfg)?.q_inv)
}

pub fn estimate_loss(
    records: &[ObservableRecord],
    params: &ModelParams,
    cfg: &LossEstimatorConfig,
) -> Result<LossEstimate> {
    cfg.validate()?;
    if !(params.n0 > 0.0) {
        return Err(Error::invalid("n0", "loss needs a positive initial photon number"));
    }
    if records.is_empty() {
        return Err(Error::WindowTooShort {
            found: 0,
            needed: MIN_FIT_POINTS,
        });
    }
    let linear = match cfg.method {
        EstimatorMethod::ExponentialFit => false,
        EstimatorMethod::LinearFit => true,
        EstimatorMethod::Auto => {
            let report = classify_regime(params);
            // Across the crossover the decay accelerates as the TLS
            // desaturates; a log-slope over the window then overstates the
            // initial loss, while the line understates it only mildly.
            report.saturation != Saturation::Unsaturated
        }
    };
    let skip = cfg.transient_skip * params.t2();
    let (hi, lo) = (cfg.window.0 * params.n0, cfg.window.1 * params.n0);
    // Any rise before the decay leaves the window means oscillation.
    let last = records.iter().rposition(|r| r.n >= lo).unwrap_or(0);
    let oscillates = records[..=last]
        .windows(2)
        .any(|w| w[1].n > w[0].n * (1.0 + 1e-9) + 1e-300);
    if oscillates && !linear {
        return envelope_fit(records, params, cfg);
    }
    // An oscillating saturated decay is fitted on the total energy, which
    // falls monotonically and differs from n by at most one quantum.
    let value = |r: &ObservableRecord| if oscillates { r.energy() } else { r.n };
    let inside: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.t >= skip && value(r) <= hi && value(r) >= lo)
        .map(|(i, _)| i)
        .collect();
    if inside.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooShort {
            found: inside.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let ts: Vec<f64> = inside.iter().map(|&i| records[i].t).collect();
    if linear {
        let ns: Vec<f64> = inside.iter().map(|&i| value(&records[i])).collect();
        let (slope, _) = linear_fit(&ts, &ns);
        Ok(LossEstimate {
            q_inv: -slope / (params.omega * params.n0),
            kind: EstimatorKind::Linear,
            points: ts.len(),
        })
    } else {
        let ln: Vec<f64> = inside.iter().map(|&i| records[i].n.ln()).collect();
        let (slope, _) = linear_fit(&ts, &ln);
        Ok(LossEstimate {
            q_inv: -slope / params.omega,
            kind: EstimatorKind::Exponential,
            points: ts.len(),
        })
    }
}

/// Sweep settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub estimator: LossEstimatorConfig,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Samples per half vacuum-Rabi period `π/g`.
    pub samples_per_period: usize,
    /// Least number of samples across the estimated decay time.
    pub min_samples: usize,
    /// Safety factor on the estimated time `1/Γ + 2·T1·n0`.
    pub time_factor: f64,
    /// Weak-coupling reference `(g, T1, T2)` whose low-photon loss `Γ/ω`
    /// normalizes the curve.
    pub reference: (f64, f64, f64),
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            estimator: LossEstimatorConfig::default(),
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            samples_per_period: 8,
            min_samples: 400,
            time_factor: 2.0,
            reference: (0.2, 1.0, 0.2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub n0: f64,
    pub r0: f64,
    pub q_inv: Option<f64>,
    pub q_inv_normalized: Option<f64>,
    pub regime: RegimeReport,
    pub estimator: Option<EstimatorKind>,
    /// Error message when the point failed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub points: Vec<LossPoint>,
    pub normalization: f64,
}

impl LossCurve {
    /// `(n0, q_inv)` of the successful points.
    pub fn valid_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.q_inv.map(|q| (p.n0, q)))
            .collect()
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k == 0 {
                lo
            } else if k + 1 == count {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default photon-number grid: 24 log-spaced points over `[1e-2, 1e3]`.
pub fn default_n0_grid() -> Vec<f64> {
    log_grid(1e-2, 1e3, 24)
}

/// Time grid for one sweep point: a multiple of `π/g` long, with spacing
/// dividing `π/g` so that the envelope times are exact samples.
fn sweep_grid(params: &ModelParams, cfg: &SweepConfig) -> Vec<f64> {
    let t2 = params.t2();
    let gamma = gamma_effective(params.g, params.t1, t2);
    let t_est = cfg.time_factor * (1.0 / gamma + 2.0 * params.t1 * params.n0)
        + cfg.estimator.transient_skip * t2;
    let half_period = std::f64::consts::PI / params.g;
    let mut dt = half_period / cfg.samples_per_period as f64;
    let dt_max = t_est / cfg.min_samples as f64;
    if dt > dt_max {
        dt /= (dt / dt_max).ceil();
    }
    let steps = (t_est / dt).ceil() as usize;
    uniform_grid(steps as f64 * dt, steps + 1)
}

/// Runs one sector-0 master evolution and estimates its loss.
pub fn loss_point(params: &ModelParams, cfg: &SweepConfig) -> Result<LossEstimate> {
    if !(params.g > 0.0) {
        return Err(Error::invalid("g", "sweeps need a positive coupling"));
    }
    let times = sweep_grid(params, cfg);
    let icfg = IntegratorConfig {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol * params.n0.clamp(1e-3, 1.0),
        t_end: *times.last().unwrap(),
        sample_count: times.len(),
        method: IntegratorMethod::AdaptiveRk45,
    };
    icfg.validate()?;
    let mut opts = MasterOptions::populations();
    opts.stop_below_energy = Some(0.5 * cfg.estimator.window.1 * params.n0);
    let run = evolve_master_on_grid(params, &icfg, &times, &opts)?;
    estimate_loss(&run.records, params, &cfg.estimator)
}

/// Loss tangent versus initial photon number; points run in parallel and
/// failures are recorded per point.
pub fn sweep_loss(template: &ModelParams, n0_grid: &[f64], cfg: &SweepConfig) -> Result<LossCurve> {
    cfg.estimator.validate()?;
    if n0_grid.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::invalid("n0_grid", "photon numbers must be positive"));
    }
    if n0_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("n0_grid", "must be sorted"));
    }
    let (rg, rt1, rt2) = cfg.reference;
    let normalization = gamma_effective(rg, rt1, rt2) / template.omega;
    let points = n0_grid
        .par_iter()
        .map(|&n0| {
            let (params, regime) = match template.clone().with_n0(n0) {
                Ok(p) => {
                    let r = classify_regime(&p);
                    (p, r)
                }
                Err(e) => return Err(e),
            };
            let r0 = rabi_parameter(params.g, n0, params.t1, params.t2());
            Ok(match loss_point(&params, cfg) {
                Ok(est) => LossPoint {
                    n0,
                    r0,
                    q_inv: Some(est.q_inv),
                    q_inv_normalized: Some(est.q_inv / normalization),
                    regime,
                    estimator: Some(est.kind),
                    failure: None,
                },
                Err(e) => LossPoint {
                    n0,
                    r0,
                    q_inv: None,
                    q_inv_normalized: None,
                    regime,
                    estimator: None,
                    failure: Some(e.to_string()),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LossCurve {
        points,
        normalization,
    })
}

/// Number of curve points averaged at each end by [`locate_knee`].
pub const KNEE_END_POINTS: usize = 3;

/// Intersection of the low-`n0` plateau with the high-`n0` `C/n0` tail,
/// both estimated from the curve: the plateau is the geometric mean of the
/// lowest points' loss, `C` the geometric mean of `q·n0` over the highest.
pub fn locate_knee(curve: &LossCurve) -> Result<f64> {
    let pts = curve.valid_points();
    let k = KNEE_END_POINTS;
    if pts.len() < 2 * k {
        return Err(Error::WindowTooShort {
            found: pts.len(),
            needed: 2 * k,
        });
    }
    let geo = |it: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = it.collect();
        (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
    };
    let plateau = geo(&mut pts[..k].iter().map(|p| p.1));
    let tail = geo(&mut pts[pts.len() - k..].iter().map(|p| p.1 * p.0));
    Ok(tail / plateau)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsMinResult {
    pub min_knee: f64,
    pub argmin_ratio: f64,
    /// `(T1/T2, knee)` per grid ratio.
    pub knees: Vec<(f64, f64)>,
    /// Whether the knee decreases monotonically with T1/T2 on this grid.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsMinConfig {
    /// `g·T1`.
    pub coupling: f64,
    pub n0_grid: Vec<f64>,
    pub sweep: SweepConfig,
}

impl Default for NsMinConfig {
    fn default() -> Self {
        Self {
            coupling: 50.0,
            n0_grid: vec![0.01, 0.02, 0.05, 0.2, 1.0, 5.0, 20.0, 40.0, 80.0],
            sweep: SweepConfig::default(),
        }
    }
}

/// Smallest strong-coupling knee over `T1/T2` ratios (each `≥ 1/2`).
pub fn find_ns_min(t1: f64, ratio_grid: &[f64], cfg: &NsMinConfig) -> Result<NsMinResult> {
    if ratio_grid.is_empty() {
        return Err(Error::invalid("ratio_grid", "must not be empty"));
    }
    let mut knees = Vec::with_capacity(ratio_grid.len());
    for &ratio in ratio_grid {
        if !(ratio >= 0.5) {
            return Err(Error::invalid("ratio_grid", "T1/T2 must be at least 1/2"));
        }
        let params = ModelParams::from_t2(cfg.coupling / t1, t1, t1 / ratio, 1.0, 1.0)?;
        let curve = sweep_loss(&params, &cfg.n0_grid, &cfg.sweep)?;
        knees.push((ratio, locate_knee(&curve)?));
    }
    let (argmin_ratio, min_knee) = knees
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |acc, k| if k.1 < acc.1 { k } else { acc });
    let mut sorted = knees.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(NsMinResult {
        min_knee,
        argmin_ratio,
        knees,
        monotone,
    })
}
