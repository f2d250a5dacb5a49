// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Reduced descriptions of the resonator-TLS dynamics.
//!
//! * Decorrelated Maxwell-Bloch equations for ⟨a⟩, ⟨σ₋⟩ and ⟨σ₊₊⟩, obtained
//!   by factorizing ⟨aσ_z⟩ ≈ ⟨a⟩⟨σ_z⟩. Valid when the resonator field is
//!   nearly classical or nearly empty.
//! * The single-excitation manifold {|0,−⟩, |1,−⟩, |0,+⟩}, where ⟨n⟩,
//!   ⟨σ₊₊⟩ and ⟨a†σ₋⟩ obey a closed linear system.
//!
//! Sign convention for the manifold: with `H = g(a†σ₋ + aσ₊)` the Heisenberg
//! equations give `d⟨n⟩/dt = +2g·Im⟨a†σ₋⟩` and
//! `d⟨σ₊₊⟩/dt = −2g·Im⟨a†σ₋⟩ − ⟨σ₊₊⟩/T1`, together with
//! `d⟨a†σ₋⟩/dt = ig(⟨σ₊₊⟩ − ⟨n⟩) − ⟨a†σ₋⟩/T2`. Starting from `(n0, 0, 0)`,
//! `Im⟨a†σ₋⟩` turns negative and the photon number falls, as it must.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, Control, OdeSystem};
use crate::params::{IntegratorConfig, IntegratorMethod, ModelParams};
use crate::quantum::C64;
use crate::record::ObservableRecord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub a_expect: C64,
    pub sigma_minus: C64,
    pub sigma_pp: f64,
}

impl BlochState {
    pub fn initial(n0: f64) -> Self {
        Self {
            a_expect: C64::new(n0.sqrt(), 0.0),
            sigma_minus: C64::new(0.0, 0.0),
            sigma_pp: 0.0,
        }
    }

    fn to_vec(self) -> [f64; 5] {
        [
            self.a_expect.re,
            self.a_expect.im,
            self.sigma_minus.re,
            self.sigma_minus.im,
            self.sigma_pp,
        ]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self {
            a_expect: C64::new(y[0], y[1]),
            sigma_minus: C64::new(y[2], y[3]),
            sigma_pp: y[4],
        }
    }
}

/// Time derivative of the decorrelated Maxwell-Bloch state.
pub fn bloch_rhs(state: &BlochState, params: &ModelParams) -> BlochState {
    let i = C64::new(0.0, 1.0);
    let g = params.g;
    let a = state.a_expect;
    let sm = state.sigma_minus;
    let s = state.sigma_pp;
    BlochState {
        a_expect: -i * g * sm,
        sigma_minus: 2.0 * i * g * a * s - i * g * a - sm * params.t2_rate(),
        sigma_pp: (-i * g * (a * sm.conj() - a.conj() * sm)).re - s / params.t1,
    }
}

struct BlochSystem<'a>(&'a ModelParams);

impl OdeSystem for BlochSystem<'_> {
    fn dim(&self) -> usize {
        5
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let d = bloch_rhs(&BlochState::from_slice(y), self.0).to_vec();
        dy.copy_from_slice(&d);
    }
}

/// Integrates the decorrelated equations from `⟨a⟩ = √n0`, `⟨σ₋⟩ = 0`,
/// `⟨σ₊₊⟩ = 0`. Records report `n = |⟨a⟩|²`; `corr`, `trace` and
/// `purity` are absent.
pub fn evolve_bloch(params: &ModelParams, cfg: &IntegratorConfig) -> Result<Vec<ObservableRecord>> {
    params.validate()?;
    cfg.validate()?;
    let y0 = BlochState::initial(params.n0).to_vec().to_vec();
    let mut out = Vec::with_capacity(cfg.sample_count);
    integrate(&BlochSystem(params), y0, &cfg.sample_times(), cfg, |_, t, y| {
        let st = BlochState::from_slice(y);
        let mut rec = ObservableRecord::new(t, st.a_expect.norm_sqr(), st.sigma_pp);
        rec.a_expect = Some(st.a_expect);
        rec.sigma_minus = Some(st.sigma_minus);
        out.push(rec);
        Ok(Control::Continue)
    })?;
    Ok(out)
}

/// Largest excursion of ⟨σ₊₊⟩ outside [0, 1] and of |⟨σ₋⟩| above 1/2.
pub fn bloch_bound_violation(records: &[ObservableRecord]) -> f64 {
    records
        .iter()
        .map(|r| {
            let s = (-r.sigma_pp).max(r.sigma_pp - 1.0).max(0.0);
            let c = r.sigma_minus.map_or(0.0, |z| (z.norm() - 0.5).max(0.0));
            s.max(c)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldState {
    pub n: f64,
    pub sigma_pp: f64,
    pub corr: C64,
}

impl ManifoldState {
    pub fn initial(n0: f64) -> Self {
        Self {
            n: n0,
            sigma_pp: 0.0,
            corr: C64::new(0.0, 0.0),
        }
    }
}

/// Time derivative of the single-excitation manifold state.
pub fn manifold_rhs(state: &ManifoldState, params: &ModelParams) -> ManifoldState {
    let g = params.g;
    let i = C64::new(0.0, 1.0);
    ManifoldState {
        n: 2.0 * g * state.corr.im,
        sigma_pp: -2.0 * g * state.corr.im - state.sigma_pp / params.t1,
        corr: i * g * (state.sigma_pp - state.n) - state.corr * params.t2_rate(),
    }
}

/// Generator of `(n, σ₊₊, Im⟨a†σ₋⟩)`; `Re⟨a†σ₋⟩` decays on its own at 1/T2.
fn manifold_generator(params: &ModelParams) -> Matrix3<f64> {
    let g = params.g;
    Matrix3::new(
        0.0,
        0.0,
        2.0 * g,
        0.0,
        -1.0 / params.t1,
        -2.0 * g,
        -g,
        g,
        -params.t2_rate(),
    )
}

/// Exact propagator `exp(A t)` of the manifold system by spectral
/// decomposition (Sylvester's formula over the three eigenvalues).
#[derive(Clone, Debug)]
pub struct ManifoldPropagator {
    eigenvalues: [C64; 3],
    projectors: [[[C64; 3]; 3]; 3],
    re_decay: f64,
}

/// Relative eigenvalue gap below which Sylvester's formula is not used.
/// Rounding in the projectors grows like `ε/gap²`, and near the defective
/// (critically damped) point the computed eigenvalues themselves only
/// separate like `ε^{1/3}`.
pub const DEGENERACY_GAP: f64 = 1e-3;

impl ManifoldPropagator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let a = manifold_generator(params);
        let ev = a.complex_eigenvalues();
        let lambda = [ev[0], ev[1], ev[2]];
        let scale = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let mut gap = f64::INFINITY;
        for i in 0..3 {
            for j in i + 1..3 {
                gap = gap.min((lambda[i] - lambda[j]).norm() / scale);
            }
        }
        if !(gap > DEGENERACY_GAP) {
            return Err(Error::DegenerateEigenproblem { gap });
        }
        let ac: [[C64; 3]; 3] =
            std::array::from_fn(|r| std::array::from_fn(|c| C64::new(a[(r, c)], 0.0)));
        let shifted = |l: C64| -> [[C64; 3]; 3] {
            std::array::from_fn(|r| {
                std::array::from_fn(|c| ac[r][c] - if r == c { l } else { C64::new(0.0, 0.0) })
            })
        };
        let mul = |x: &[[C64; 3]; 3], y: &[[C64; 3]; 3]| -> [[C64; 3]; 3] {
            std::array::from_fn(|r| {
                std::array::from_fn(|c| (0..3).map(|k| x[r][k] * y[k][c]).sum())
            })
        };
        let projectors = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let num = mul(&shifted(lambda[j]), &shifted(lambda[k]));
            let den = (lambda[i] - lambda[j]) * (lambda[i] - lambda[k]);
            num.map(|row| row.map(|z| z / den))
        });
        Ok(Self {
            eigenvalues: lambda,
            projectors,
            re_decay: params.t2_rate(),
        })
    }

    pub fn eigenvalues(&self) -> [C64; 3] {
        self.eigenvalues
    }

    pub fn apply(&self, t: f64, x0: &ManifoldState) -> ManifoldState {
        let x = [x0.n, x0.sigma_pp, x0.corr.im];
        let mut y = [C64::new(0.0, 0.0); 3];
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            let e = (l * t).exp();
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += e * (0..3).map(|c| p[r][c] * x[c]).sum::<C64>();
            }
        }
        ManifoldState {
            n: y[0].re,
            sigma_pp: y[1].re,
            corr: C64::new(x0.corr.re * (-self.re_decay * t).exp(), y[2].re),
        }
    }
}

struct ManifoldSystem(Matrix3<f64>, f64);

impl OdeSystem for ManifoldSystem {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let d = self.0 * Vector3::new(y[0], y[1], y[2]);
        dy[0] = d[0];
        dy[1] = d[1];
        dy[2] = d[2];
        dy[3] = -self.1 * y[3];
    }
}

fn manifold_record(t: f64, st: &ManifoldState) -> ObservableRecord {
    let mut rec = ObservableRecord::new(t, st.n, st.sigma_pp);
    rec.corr = Some(st.corr);
    rec
}

/// Manifold solution on `t_grid` from `(n0, 0, 0)`. Uses the spectral
/// propagator and falls back to tight Runge-Kutta integration when the
/// eigenvalues are (nearly) degenerate.
pub fn evolve_manifold(params: &ModelParams, t_grid: &[f64]) -> Result<Vec<ObservableRecord>> {
    params.validate()?;
    let x0 = ManifoldState::initial(params.n0);
    match ManifoldPropagator::new(params) {
        Ok(prop) => Ok(t_grid
            .iter()
            .map(|&t| manifold_record(t, &prop.apply(t, &x0)))
            .collect()),
        Err(Error::DegenerateEigenproblem { .. }) => evolve_manifold_ode(params, t_grid),
        Err(e) => Err(e),
    }
}

/// Manifold solution by Runge-Kutta integration.
pub fn evolve_manifold_ode(params: &ModelParams, t_grid: &[f64]) -> Result<Vec<ObservableRecord>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let sys = ManifoldSystem(manifold_generator(params), params.t2_rate());
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-15 * params.n0.max(1e-300),
        t_end: *t_grid.last().unwrap(),
        sample_count: t_grid.len().max(2),
        method: IntegratorMethod::AdaptiveRk45,
    };
    let mut grid = t_grid.to_vec();
    let prepend = grid[0] != 0.0;
    if prepend {
        grid.insert(0, 0.0);
    }
    let mut out = Vec::with_capacity(t_grid.len());
    integrate(&sys, vec![params.n0, 0.0, 0.0, 0.0], &grid, &cfg, |k, t, y| {
        if !(prepend && k == 0) {
            let st = ManifoldState {
                n: y[0],
                sigma_pp: y[1],
                corr: C64::new(y[3], y[2]),
            };
            out.push(manifold_record(t, &st));
        }
        Ok(Control::Continue)
    })?;
    Ok(out)
}

/// Most negative ⟨n⟩ or ⟨σ₊₊⟩ in a manifold trajectory (zero if none).
/// A large value signals that n0 is too big for the one-excitation picture.
pub fn manifold_negativity(records: &[ObservableRecord]) -> f64 {
    records
        .iter()
        .map(|r| (-r.n).max(-r.sigma_pp).max(0.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, t1: f64, t2: f64, n0: f64) -> ModelParams {
        ModelParams::from_t2(g, t1, t2, 1.0, n0).unwrap()
    }

    #[test]
    fn bloch_fixed_point_and_substitution() {
        let params = p(0.2, 1.0, 0.2, 3.0);
        let zero = BlochState {
            a_expect: C64::new(0.0, 0.0),
            sigma_minus: C64::new(0.0, 0.0),
            sigma_pp: 0.0,
        };
        assert_eq!(bloch_rhs(&zero, &params), zero);
        let d = bloch_rhs(&BlochState::initial(3.0), &params);
        assert!((d.sigma_minus - C64::new(0.0, -0.2 * 3f64.sqrt())).norm() < 1e-15);
        assert_eq!(d.sigma_pp, 0.0);
        assert_eq!(d.a_expect, C64::new(0.0, 0.0));
    }

    #[test]
    fn bloch_decoupled_rates() {
        let params = p(0.0, 2.0, 0.5, 1.0);
        let st = BlochState {
            a_expect: C64::new(1.0, 0.5),
            sigma_minus: C64::new(0.3, -0.1),
            sigma_pp: 0.4,
        };
        let d = bloch_rhs(&st, &params);
        assert_eq!(d.a_expect, C64::new(0.0, 0.0));
        assert!((d.sigma_minus + st.sigma_minus * 2.0).norm() < 1e-15);
        assert!((d.sigma_pp + 0.2).abs() < 1e-15);
    }

    #[test]
    fn manifold_substitution_and_sum_rule() {
        let params = p(10.0, 1.0, 0.2, 0.005);
        let d = manifold_rhs(&ManifoldState::initial(0.005), &params);
        assert!((d.corr - C64::new(0.0, -0.05)).norm() < 1e-15);
        let st = ManifoldState {
            n: 0.3,
            sigma_pp: 0.1,
            corr: C64::new(0.05, -0.07),
        };
        let d = manifold_rhs(&st, &params);
        assert!((d.n + d.sigma_pp + st.sigma_pp / params.t1).abs() < 1e-15);
    }

    #[test]
    fn propagator_matches_rk() {
        let params = p(3.0, 1.0, 0.4, 0.01);
        let grid: Vec<f64> = (0..50).map(|k| 0.05 * k as f64).collect();
        let exact = evolve_manifold(&params, &grid).unwrap();
        let rk = evolve_manifold_ode(&params, &grid).unwrap();
        for (a, b) in exact.iter().zip(&rk) {
            assert!((a.n - b.n).abs() < 1e-12);
            assert!((a.sigma_pp - b.sigma_pp).abs() < 1e-12);
            assert!((a.corr.unwrap() - b.corr.unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_case_falls_back() {
        // g = 0 and T2 = T1: eigenvalues 0, -1, -1.
        let params = p(0.0, 1.0, 1.0, 0.01);
        assert!(matches!(
            ManifoldPropagator::new(&params),
            Err(Error::DegenerateEigenproblem { .. })
        ));
        let recs = evolve_manifold(&params, &[0.0, 1.0, 2.0]).unwrap();
        assert!(recs.iter().all(|r| (r.n - 0.01).abs() < 1e-14));
    }
}
