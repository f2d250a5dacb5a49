// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense master equation: right-hand side, Liouvillian superoperator and the
//! matrix-exponential oracle. Intended for small truncations and as a
//! cross-check of the sector engine.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::expm::{expm_dmatrix, to_dmatrix};
use crate::ode::{integrate, Control, OdeSystem};
use crate::params::{IntegratorConfig, ModelParams};
use crate::quantum::{
    build_operators, coherent_tls_ground, expectation, ComplexMatrix, DensityMatrix, OperatorSet,
    C64,
};
use crate::record::ObservableRecord;

/// Largest joint-space dimension the oracle accepts by default.
pub const ORACLE_DIM_CAP: usize = 64;

fn check_dims(rho: &DensityMatrix, ops: &OperatorSet) -> Result<()> {
    if ops.a.dim() != rho.dims().total_dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dims().total_dim(),
            found: ops.a.dim(),
        });
    }
    Ok(())
}

fn hamiltonian(params: &ModelParams, ops: &OperatorSet) -> ComplexMatrix {
    let h = &ops.a_dag.dot(&ops.sigma_minus) + &ops.a.dot(&ops.sigma_plus);
    &h * params.g
}

fn rhs_matrix(rho: &ComplexMatrix, h: &ComplexMatrix, params: &ModelParams, ops: &OperatorSet) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let mut out = h.commutator(rho).scale(-i);
    let gphi = params.dephasing_rate();
    if gphi > 0.0 {
        let zrz = ops.sigma_z.dot(rho).dot(&ops.sigma_z);
        out = &out + &(&(&zrz - rho) * (0.5 * gphi));
    }
    let g1 = 1.0 / params.t1;
    let jump = ops.sigma_minus.dot(rho).dot(&ops.sigma_plus);
    let anti = &ops.sigma_pp.dot(rho) + &rho.dot(&ops.sigma_pp);
    &out + &(&(&jump * 2.0 - &anti) * (0.5 * g1))
}

/// dρ/dt of the master equation.
pub fn lindblad_rhs(rho: &DensityMatrix, params: &ModelParams, ops: &OperatorSet) -> Result<ComplexMatrix> {
    check_dims(rho, ops)?;
    let h = hamiltonian(params, ops);
    Ok(rhs_matrix(rho.matrix(), &h, params, ops))
}

fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (x, y) = (a.as_array(), b.as_array());
    let (p, q) = (x.nrows(), y.nrows());
    let m = Array2::from_shape_fn((p * q, p * q), |(r, c)| {
        x[[r / q, c / q]] * y[[r % q, c % q]]
    });
    ComplexMatrix::new(m).expect("finite Kronecker product")
}

fn transpose(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::new(a.as_array().t().to_owned()).expect("finite transpose")
}

/// Superoperator `L` with `vec(dρ/dt) = L·vec(ρ)` for column-stacked `vec`.
pub fn liouvillian_matrix(params: &ModelParams, ops: &OperatorSet) -> Result<ComplexMatrix> {
    liouvillian_matrix_capped(params, ops, ORACLE_DIM_CAP)
}

pub fn liouvillian_matrix_capped(
    params: &ModelParams,
    ops: &OperatorSet,
    cap: usize,
) -> Result<ComplexMatrix> {
    let d = ops.a.dim();
    if d > cap {
        return Err(Error::OracleCapExceeded { dim: d, cap });
    }
    let id = ComplexMatrix::identity(d);
    let i = C64::new(0.0, 1.0);
    let h = hamiltonian(params, ops);
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
    let mut l = &kron(&id, &h).scale(-i) + &kron(&transpose(&h), &id).scale(i);
    let gphi = params.dephasing_rate();
    if gphi > 0.0 {
        let deph = &kron(&transpose(&ops.sigma_z), &ops.sigma_z) - &kron(&id, &id);
        l = &l + &(&deph * (0.5 * gphi));
    }
    let g1 = 1.0 / params.t1;
    let jump = kron(&transpose(&ops.sigma_plus), &ops.sigma_minus);
    let anti = &kron(&id, &ops.sigma_pp) + &kron(&transpose(&ops.sigma_pp), &id);
    Ok(&l + &(&(&jump * 2.0 - &anti) * (0.5 * g1)))
}

/// Observables of a dense state.
pub fn observe(t: f64, rho: &DensityMatrix, ops: &OperatorSet) -> Result<ObservableRecord> {
    let mut rec = ObservableRecord::new(
        t,
        expectation(rho, &ops.number_op)?.re,
        expectation(rho, &ops.sigma_pp)?.re,
    );
    rec.sigma_minus = Some(expectation(rho, &ops.sigma_minus)?);
    rec.a_expect = Some(expectation(rho, &ops.a)?);
    rec.corr = Some(expectation(rho, &ops.a_dag.dot(&ops.sigma_minus))?);
    rec.trace = Some(rho.trace());
    rec.purity = Some(rho.purity());
    Ok(rec)
}

/// ρ(t) = expm(L t)·ρ(0) from the coherent initial state.
pub fn evolve_oracle(params: &ModelParams, t_grid: &[f64]) -> Result<Vec<ObservableRecord>> {
    let d = params.dims.total_dim();
    if d > ORACLE_DIM_CAP {
        return Err(Error::OracleCapExceeded { dim: d, cap: ORACLE_DIM_CAP });
    }
    let rho0 = coherent_tls_ground(C64::new(params.n0.sqrt(), 0.0), params.dims)?;
    Ok(evolve_oracle_from(params, &rho0, t_grid)?
        .into_iter()
        .map(|(rec, _)| rec)
        .collect())
}

/// Oracle evolution from an arbitrary initial state. The propagator over
/// each grid interval is an exact matrix exponential; equal intervals share
/// one exponential.
pub fn evolve_oracle_from(
    params: &ModelParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<(ObservableRecord, DensityMatrix)>> {
    params.validate()?;
    let dims = rho0.dims();
    let ops = build_operators(dims);
    let l = to_dmatrix(&liouvillian_matrix(params, &ops)?);
    let d = dims.total_dim();
    let mut v = nalgebra::DVector::from_iterator(d * d, rho0.matrix().vec());
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t_prev = t_grid.first().copied().unwrap_or(0.0);
    if t_prev != 0.0 {
        let p = expm_dmatrix(&(&l * C64::new(t_prev, 0.0)))?;
        v = p * v;
    }
    let mut cached: Option<(f64, nalgebra::DMatrix<C64>)> = None;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt < 0.0 {
            return Err(Error::invalid("t_grid", "times must be non-decreasing"));
        }
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-13 * dt);
            if !reuse {
                cached = Some((dt, expm_dmatrix(&(&l * C64::new(dt, 0.0)))?));
            }
            v = &cached.as_ref().unwrap().1 * v;
        }
        t_prev = t;
        let arr = ndarray::Array1::from_iter(v.iter().copied());
        let rho = DensityMatrix::new_unchecked(dims, ComplexMatrix::unvec(&arr, d)?)?;
        out.push((observe(t, &rho, &ops)?, rho));
    }
    Ok(out)
}

/// The dense master equation as a real ODE (real and imaginary parts
/// interleaved, row-major).
pub struct DenseMaster<'a> {
    params: &'a ModelParams,
    ops: OperatorSet,
    h: ComplexMatrix,
    dim: usize,
}

impl<'a> DenseMaster<'a> {
    pub fn new(params: &'a ModelParams) -> Self {
        let ops = build_operators(params.dims);
        let h = hamiltonian(params, &ops);
        Self {
            params,
            dim: params.dims.total_dim(),
            ops,
            h,
        }
    }

    fn unpack(&self, y: &[f64]) -> ComplexMatrix {
        let d = self.dim;
        let m = Array2::from_shape_fn((d, d), |(i, j)| {
            let k = 2 * (i * d + j);
            C64::new(y[k], y[k + 1])
        });
        ComplexMatrix::new(m).unwrap_or_else(|_| ComplexMatrix::zeros(d))
    }

    fn pack(m: &ComplexMatrix, out: &mut [f64]) {
        for (k, z) in m.as_array().iter().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
    }
}

impl OdeSystem for DenseMaster<'_> {
    fn dim(&self) -> usize {
        2 * self.dim * self.dim
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        if y.iter().any(|v| !v.is_finite()) {
            dy.fill(f64::NAN);
            return;
        }
        let rho = self.unpack(y);
        Self::pack(&rhs_matrix(&rho, &self.h, self.params, &self.ops), dy);
    }

    fn project(&self, y: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            for j in i..d {
                let (a, b) = (2 * (i * d + j), 2 * (j * d + i));
                let re = 0.5 * (y[a] + y[b]);
                let im = 0.5 * (y[a + 1] - y[b + 1]);
                y[a] = re;
                y[b] = re;
                y[a + 1] = im;
                y[b + 1] = -im;
            }
        }
    }
}

/// Integrates the dense master equation from `rho0`.
pub fn evolve_master_dense_from(
    params: &ModelParams,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<Vec<(ObservableRecord, DensityMatrix)>> {
    params.validate()?;
    cfg.validate()?;
    if rho0.dims() != params.dims {
        return Err(Error::DimensionMismatch {
            expected: params.dims.total_dim(),
            found: rho0.dims().total_dim(),
        });
    }
    let sys = DenseMaster::new(params);
    let mut y0 = vec![0.0; sys.dim()];
    DenseMaster::pack(rho0.matrix(), &mut y0);
    let mut out = Vec::new();
    integrate(&sys, y0, &cfg.sample_times(), cfg, |_, t, y| {
        let rho = DensityMatrix::new_unchecked(params.dims, sys.unpack(y))?;
        out.push((observe(t, &rho, &sys.ops)?, rho));
        Ok(Control::Continue)
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::HilbertDims;

    fn params(g: f64, t1: f64, tphi: Option<f64>, n: usize) -> ModelParams {
        ModelParams::new(g, t1, tphi, 1.0, 0.0)
            .unwrap()
            .with_fock_cutoff(n)
            .unwrap()
    }

    #[test]
    fn ground_state_is_stationary() {
        let p = params(0.7, 1.0, Some(0.5), 4);
        let rho = DensityMatrix::basis_state(p.dims, 0, false).unwrap();
        let ops = build_operators(p.dims);
        assert_eq!(lindblad_rhs(&rho, &p, &ops).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn bare_tls_decay_rate() {
        let p = params(0.0, 2.0, None, 2);
        let ops = build_operators(p.dims);
        let rho = DensityMatrix::basis_state(p.dims, 0, true).unwrap();
        let rhs = lindblad_rhs(&rho, &p, &ops).unwrap();
        let ds = rhs.dot(&ops.sigma_pp).trace();
        assert!((ds.re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let p = params(0.7, 1.0, None, 4);
        let rho = DensityMatrix::basis_state(p.dims, 0, false).unwrap();
        let ops = build_operators(HilbertDims::new(3).unwrap());
        assert!(matches!(
            lindblad_rhs(&rho, &p, &ops),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn oracle_cap() {
        let p = params(0.7, 1.0, None, 40);
        let ops = build_operators(p.dims);
        assert!(matches!(
            liouvillian_matrix(&p, &ops),
            Err(Error::OracleCapExceeded { dim: 82, cap: 64 })
        ));
        assert!(matches!(
            evolve_oracle(&p, &[0.0, 1.0]),
            Err(Error::OracleCapExceeded { .. })
        ));
    }

    #[test]
    fn kron_layout() {
        let a = ComplexMatrix::new(Array2::from_shape_fn((2, 2), |(i, j)| C64::new((2 * i + j) as f64, 0.0))).unwrap();
        let id = ComplexMatrix::identity(2);
        let k = kron(&a, &id);
        assert_eq!(k.as_array()[[2, 0]], C64::new(2.0, 0.0));
        assert_eq!(k.as_array()[[3, 1]], C64::new(2.0, 0.0));
        assert_eq!(k.as_array()[[1, 0]], C64::new(0.0, 0.0));
    }
}
