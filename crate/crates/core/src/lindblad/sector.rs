// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Master-equation engine on excitation-number sectors.
//!
//! The Jaynes-Cummings coupling, TLS relaxation and dephasing all commute
//! with the total excitation number `a†a + σ₊₊` up to a shift, so the
//! density matrix splits into independent sectors. Manifold `k` is the pair
//! `{|k,−⟩, |k−1,+⟩}` (`k = 0..=N+1`, with the unphysical `|−1,+⟩` and
//! `|N+1,−⟩` kept as identically zero padding). Sector `m` holds the 2×2
//! blocks `X_j = ρ[manifold j, manifold j+m]`; sector `−m` is its adjoint.
//!
//! Within a sector the evolution is real after the TLS-frame change
//! `ρ(−,+) = i·MP`, `ρ(+,−) = −i·PM`, so each block is four real numbers
//! `[mm, mp, pm, pp]` stored structure-of-arrays.
//!
//! Sector 0 alone determines ⟨n⟩, ⟨σ₊₊⟩, ⟨a†σ₋⟩ and the trace, which is
//! what loss sweeps need.

use nalgebra::DMatrix;
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ode::{integrate, Control, OdeSystem};
use crate::params::{IntegratorConfig, ModelParams};
use crate::quantum::{coherent_amplitudes, ComplexMatrix, DensityMatrix, HilbertDims, C64};
use crate::record::ObservableRecord;

/// Largest population allowed in the top Fock level at any sample.
pub const TAIL_POPULATION_LIMIT: f64 = 1e-6;

/// Sectors whose initial trace-norm bound is below this are not evolved.
pub const DEFAULT_SECTOR_DROP: f64 = 1e-15;

/// Which part of the density matrix to evolve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineMode {
    /// Sector 0 only: ⟨n⟩, ⟨σ₊₊⟩, ⟨a†σ₋⟩ and trace.
    Populations,
    /// All sectors: adds ⟨a⟩, ⟨σ₋⟩, purity and density-matrix snapshots.
    Full,
}

#[derive(Clone, Debug)]
pub struct MasterOptions {
    pub mode: EngineMode,
    /// Sample indices at which the full density matrix is reconstructed
    /// (`Full` mode only).
    pub snapshot_indices: Vec<usize>,
    pub sector_drop: f64,
    /// Stop once ⟨n⟩ + ⟨σ₊₊⟩ falls below this value (`Populations` mode
    /// only).
    pub stop_below_energy: Option<f64>,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self {
            mode: EngineMode::Full,
            snapshot_indices: Vec::new(),
            sector_drop: DEFAULT_SECTOR_DROP,
            stop_below_energy: None,
        }
    }
}

impl MasterOptions {
    pub fn populations() -> Self {
        Self {
            mode: EngineMode::Populations,
            ..Self::default()
        }
    }
}

/// Density matrix reconstructed at one sample time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub rho: DensityMatrix,
}

impl Snapshot {
    /// Smallest eigenvalue of ρ.
    ///
    /// `D ρ D†` with `D = diag(i^s)` (s the TLS index) is real symmetric in
    /// this model, so a real eigensolver suffices. Any imaginary residue is
    /// included in the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.rho.dims().total_dim();
        let a = self.rho.matrix().as_array();
        let phase = |i: usize| if i % 2 == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        let real_part = |i: usize, j: usize| (phase(i) * a[[i, j]] * phase(j).conj()).re;
        let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (real_part(i, j) + real_part(j, i)));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest imaginary part of `D ρ D†`; zero when the real-symmetric
    /// shortcut of [`Snapshot::min_eigenvalue`] is exact.
    pub fn real_frame_residual(&self) -> f64 {
        let a = self.rho.matrix().as_array();
        let phase = |i: usize| if i % 2 == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        let d = a.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((phase(i) * a[[i, j]] * phase(j).conj()).im.abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct MasterRun {
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Number of sectors `m ≥ 0` actually evolved.
    pub sectors_evolved: usize,
}

/// One excitation sector as a real linear ODE.
pub struct SectorSystem {
    m: usize,
    len: usize,
    g: f64,
    gamma1: f64,
    gamma2: f64,
    cr: Vec<f64>,
    cc: Vec<f64>,
}

impl SectorSystem {
    pub fn new(params: &ModelParams, m: usize) -> Self {
        let k = manifold_count(params.dims);
        let coupling = manifold_couplings(params.dims);
        let len = k - m;
        Self {
            m,
            len,
            g: params.g,
            gamma1: 1.0 / params.t1,
            gamma2: params.dephasing_rate() + 0.5 / params.t1,
            cr: coupling[..len].to_vec(),
            cc: coupling[m..].to_vec(),
        }
    }

    pub fn blocks(&self) -> usize {
        self.len
    }

    /// Initial blocks for the coherent state |√n0⟩ ⊗ |−⟩.
    pub fn initial_state(&self, amps: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; 4 * self.len];
        for j in 0..self.len {
            let a = amps.get(j).copied().unwrap_or(0.0);
            let b = amps.get(j + self.m).copied().unwrap_or(0.0);
            y[j] = a * b;
        }
        y
    }
}

impl OdeSystem for SectorSystem {
    fn dim(&self) -> usize {
        4 * self.len
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.len;
        let (mm, rest) = y.split_at(n);
        let (mp, rest) = rest.split_at(n);
        let (pm, pp) = rest.split_at(n);
        let (dmm, drest) = dy.split_at_mut(n);
        let (dmp, drest) = drest.split_at_mut(n);
        let (dpm, dpp) = drest.split_at_mut(n);
        let (g, g1, g2) = (self.g, self.gamma1, self.gamma2);
        for j in 0..n {
            let cr = self.cr[j];
            let cc = self.cc[j];
            let feed = if j + 1 < n { pp[j + 1] } else { 0.0 };
            dmm[j] = -g * (cr * pm[j] + cc * mp[j]) + g1 * feed;
            dmp[j] = g * (cc * mm[j] - cr * pp[j]) - g2 * mp[j];
            dpm[j] = g * (cr * mm[j] - cc * pp[j]) - g2 * pm[j];
            dpp[j] = g * (cr * mp[j] + cc * pm[j]) - g1 * pp[j];
        }
    }

    fn project(&self, y: &mut [f64]) {
        // Diagonal blocks are Hermitian: MP = PM.
        if self.m == 0 {
            let n = self.len;
            let (_, rest) = y.split_at_mut(n);
            let (mp, rest) = rest.split_at_mut(n);
            let (pm, _) = rest.split_at_mut(n);
            for (a, b) in mp.iter_mut().zip(pm.iter_mut()) {
                let avg = 0.5 * (*a + *b);
                *a = avg;
                *b = avg;
            }
        }
    }
}

pub fn manifold_count(dims: HilbertDims) -> usize {
    dims.fock_cutoff() + 2
}

/// `c_k = √k` for manifolds inside the truncation, zero for the top one.
pub fn manifold_couplings(dims: HilbertDims) -> Vec<f64> {
    let n = dims.fock_cutoff();
    (0..n + 2)
        .map(|k| if k <= n { (k as f64).sqrt() } else { 0.0 })
        .collect()
}

fn real_amplitudes(params: &ModelParams) -> Result<Vec<f64>> {
    let amps = coherent_amplitudes(C64::new(params.n0.sqrt(), 0.0), params.dims)?;
    Ok(amps.into_iter().map(|z| z.re).collect())
}

struct Sector0Obs {
    n: f64,
    s: f64,
    corr_im: f64,
    trace: f64,
    tail: f64,
    sumsq: f64,
}

fn sector0_observables(y: &[f64], fock_cutoff: usize) -> Sector0Obs {
    let n_blocks = y.len() / 4;
    let (mm, rest) = y.split_at(n_blocks);
    let (_mp, rest) = rest.split_at(n_blocks);
    let (pm, pp) = rest.split_at(n_blocks);
    let mut out = Sector0Obs {
        n: 0.0,
        s: 0.0,
        corr_im: 0.0,
        trace: 0.0,
        tail: mm[fock_cutoff] + pp[fock_cutoff + 1],
        sumsq: 0.0,
    };
    for j in 0..n_blocks {
        let jf = j as f64;
        out.n += jf * mm[j] + (jf - 1.0).max(0.0) * pp[j];
        out.s += pp[j];
        out.trace += mm[j] + pp[j];
        out.corr_im -= jf.sqrt() * pm[j] * if j <= fock_cutoff { 1.0 } else { 0.0 };
    }
    out.sumsq = y.iter().map(|v| v * v).sum();
    out
}

/// Upper bound on the trace norm of sector `m` at all times: the Lindblad
/// map is trace-norm contractive and the initial sector is a sum of rank-one
/// terms of norm `|c_j c_{j+m}|`.
pub fn sector_bound(amps: &[f64], m: usize) -> f64 {
    amps.iter()
        .zip(amps.iter().skip(m))
        .map(|(a, b)| (a * b).abs())
        .sum()
}

struct SectorTrace {
    sumsq: Vec<f64>,
    first_moments: Vec<(C64, C64)>,
    snapshots: Vec<Vec<f64>>,
}

fn evolve_sector(
    params: &ModelParams,
    cfg: &IntegratorConfig,
    times: &[f64],
    amps: &[f64],
    m: usize,
    snapshot_indices: &[usize],
) -> Result<SectorTrace> {
    let sys = SectorSystem::new(params, m);
    let y0 = sys.initial_state(amps);
    let n_blocks = sys.blocks();
    let mut out = SectorTrace {
        sumsq: Vec::with_capacity(times.len()),
        first_moments: Vec::new(),
        snapshots: Vec::new(),
    };
    integrate(&sys, y0, times, cfg, |k, _t, y| {
        out.sumsq.push(y.iter().map(|v| v * v).sum());
        if m == 1 {
            let (mm, rest) = y.split_at(n_blocks);
            let (mp, rest) = rest.split_at(n_blocks);
            let (_pm, pp) = rest.split_at(n_blocks);
            let mut a = 0.0;
            let mut sm = 0.0;
            for j in 0..n_blocks {
                a += ((j + 1) as f64).sqrt() * mm[j] + (j as f64).sqrt() * pp[j];
                sm += mp[j];
            }
            out.first_moments
                .push((C64::new(a, 0.0), C64::new(0.0, -sm)));
        }
        if snapshot_indices.contains(&k) {
            out.snapshots.push(y.to_vec());
        }
        Ok(Control::Continue)
    })?;
    Ok(out)
}

/// Rebuilds ρ from sector states (`sectors[m]` is sector `m`, missing
/// sectors are zero).
fn reconstruct(dims: HilbertDims, sectors: &[Option<&[f64]>]) -> ComplexMatrix {
    let d = dims.total_dim();
    let n = dims.fock_cutoff();
    let k = manifold_count(dims);
    let mut rho = Array2::<C64>::zeros((d, d));
    // Basis index of a manifold state, None for padding.
    let minus = |j: usize| if j <= n { Some(2 * j) } else { None };
    let plus = |j: usize| if j >= 1 { Some(2 * (j - 1) + 1) } else { None };
    for (m, sector) in sectors.iter().enumerate() {
        let Some(y) = sector else { continue };
        let len = k - m;
        for j in 0..len {
            let entries = [
                (minus(j), minus(j + m), C64::new(y[j], 0.0)),
                (minus(j), plus(j + m), C64::new(0.0, y[len + j])),
                (plus(j), minus(j + m), C64::new(0.0, -y[2 * len + j])),
                (plus(j), plus(j + m), C64::new(y[3 * len + j], 0.0)),
            ];
            for (r, c, v) in entries {
                if let (Some(r), Some(c)) = (r, c) {
                    rho[[r, c]] = v;
                    if m > 0 {
                        rho[[c, r]] = v.conj();
                    }
                }
            }
        }
    }
    ComplexMatrix::new(rho).expect("finite reconstruction")
}

fn tail_check(tail: f64, dims: HilbertDims) -> Result<()> {
    if !(tail <= TAIL_POPULATION_LIMIT) {
        return Err(Error::Truncation {
            what: "top Fock level population",
            weight: tail,
            threshold: TAIL_POPULATION_LIMIT,
            fock_cutoff: dims.fock_cutoff(),
        });
    }
    Ok(())
}

/// Integrates the master equation from |√n0⟩ ⊗ |−⟩ and samples on the
/// uniform grid of `cfg`.
pub fn evolve_master(params: &ModelParams, cfg: &IntegratorConfig) -> Result<Vec<ObservableRecord>> {
    Ok(evolve_master_with(params, cfg, &MasterOptions::default())?.records)
}

pub fn evolve_master_with(
    params: &ModelParams,
    cfg: &IntegratorConfig,
    opts: &MasterOptions,
) -> Result<MasterRun> {
    params.validate()?;
    cfg.validate()?;
    let times = cfg.sample_times();
    evolve_master_on_grid(params, cfg, &times, opts)
}

pub fn evolve_master_on_grid(
    params: &ModelParams,
    cfg: &IntegratorConfig,
    times: &[f64],
    opts: &MasterOptions,
) -> Result<MasterRun> {
    let dims = params.dims;
    let amps = real_amplitudes(params)?;
    let full = opts.mode == EngineMode::Full;
    let snapshot_indices: &[usize] = if full { &opts.snapshot_indices } else { &[] };

    let mut records = Vec::with_capacity(times.len());
    let mut sumsq0 = Vec::with_capacity(times.len());
    let mut snaps0 = Vec::new();
    let sys0 = SectorSystem::new(params, 0);
    integrate(&sys0, sys0.initial_state(&amps), times, cfg, |k, t, y| {
        let o = sector0_observables(y, dims.fock_cutoff());
        tail_check(o.tail, dims)?;
        let mut rec = ObservableRecord::new(t, o.n, o.s);
        rec.corr = Some(C64::new(0.0, o.corr_im));
        rec.trace = Some(o.trace);
        records.push(rec);
        sumsq0.push(o.sumsq);
        if snapshot_indices.contains(&k) {
            snaps0.push((t, y.to_vec()));
        }
        let stop = !full && opts.stop_below_energy.is_some_and(|lim| o.n + o.s < lim);
        Ok(if stop { Control::Stop } else { Control::Continue })
    })?;

    if !full {
        return Ok(MasterRun {
            records,
            snapshots: Vec::new(),
            sectors_evolved: 1,
        });
    }

    let k = manifold_count(dims);
    let kept: Vec<usize> = (1..k)
        .filter(|&m| sector_bound(&amps, m) >= opts.sector_drop)
        .collect();
    let traces: Vec<SectorTrace> = kept
        .par_iter()
        .map(|&m| evolve_sector(params, cfg, times, &amps, m, snapshot_indices))
        .collect::<Result<_>>()?;

    for (i, rec) in records.iter_mut().enumerate() {
        let mut purity = sumsq0[i];
        for tr in &traces {
            purity += 2.0 * tr.sumsq[i];
        }
        rec.purity = Some(purity);
        let (a, sm) = match kept.first() {
            Some(1) => traces[0].first_moments[i],
            _ => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        };
        rec.a_expect = Some(a);
        rec.sigma_minus = Some(sm);
    }

    let mut snapshots = Vec::with_capacity(snaps0.len());
    for (s, (t, y0)) in snaps0.into_iter().enumerate() {
        let mut sectors: Vec<Option<&[f64]>> = vec![None; k];
        sectors[0] = Some(&y0);
        for (tr, &m) in traces.iter().zip(&kept) {
            sectors[m] = Some(&tr.snapshots[s]);
        }
        let rho = DensityMatrix::new_unchecked(dims, reconstruct(dims, &sectors))?;
        snapshots.push(Snapshot { t, rho });
    }

    Ok(MasterRun {
        records,
        snapshots,
        sectors_evolved: 1 + kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::coherent_tls_ground;

    #[test]
    fn initial_reconstruction_matches_coherent_state() {
        let p = ModelParams::new(0.5, 1.0, Some(2.0), 1.0, 1.5)
            .unwrap()
            .with_fock_cutoff(12)
            .unwrap();
        let amps = real_amplitudes(&p).unwrap();
        let k = manifold_count(p.dims);
        let states: Vec<Vec<f64>> = (0..k)
            .map(|m| SectorSystem::new(&p, m).initial_state(&amps))
            .collect();
        let refs: Vec<Option<&[f64]>> = states.iter().map(|s| Some(s.as_slice())).collect();
        let rho = reconstruct(p.dims, &refs);
        let want = coherent_tls_ground(C64::new(1.5f64.sqrt(), 0.0), p.dims).unwrap();
        assert!(rho.max_abs_diff(want.matrix()) < 1e-15);
    }

    #[test]
    fn sector_bound_sector_zero_is_one() {
        let amps = vec![0.6, 0.8];
        assert!((sector_bound(&amps, 0) - 1.0).abs() < 1e-15);
        assert!((sector_bound(&amps, 1) - 0.48).abs() < 1e-15);
    }
}
