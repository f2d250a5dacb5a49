// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock ⊗ TLS Hilbert space, operators and initial states.
//!
//! Basis ordering is Fock-major, TLS-minor: index `2·n + s` with `s = 0`
//! for the TLS ground state |−⟩ and `s = 1` for the excited state |+⟩.
//! Partial traces over the TLS are therefore sums of contiguous 2×2 blocks.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest truncated-tail weight accepted when preparing a coherent state.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertDims {
    fock_cutoff: usize,
}

impl HilbertDims {
    /// `fock_cutoff` is the largest Fock index kept, so there are
    /// `fock_cutoff + 1` photon states.
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 1 {
            return Err(Error::invalid("fock_cutoff", "must be at least 1"));
        }
        Ok(Self { fock_cutoff })
    }

    /// Default truncation for a coherent state of mean photon number `n0`:
    /// `N = ceil(n0 + 10·sqrt(n0 + 1) + 10)`.
    pub fn for_photon_number(n0: f64) -> Self {
        let n = (n0.max(0.0) + 10.0 * (n0.max(0.0) + 1.0).sqrt() + 10.0).ceil();
        Self {
            fock_cutoff: n as usize,
        }
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn fock_levels(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn total_dim(&self) -> usize {
        2 * (self.fock_cutoff + 1)
    }

    #[inline]
    pub fn index(&self, fock: usize, excited: bool) -> usize {
        2 * fock + excited as usize
    }
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(Array2<C64>);

impl ComplexMatrix {
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix", "non-finite entry"));
        }
        Ok(Self(data))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Array2::zeros((dim, dim)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Array2::eye(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<C64> {
        &mut self.0
    }

    pub fn into_array(self) -> Array2<C64> {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.t().mapv(|z| z.conj()))
    }

    pub fn dot(&self, other: &Self) -> Self {
        Self(self.0.dot(&other.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0.dot(&other.0) - other.0.dot(&self.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.diag().sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// max |A_ij − B_ij|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// max |A_ij − conj(A_ji)|.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.0[[i, j]] - self.0[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Column-stacked vectorization.
    pub fn vec(&self) -> Array1<C64> {
        self.0.t().iter().copied().collect()
    }

    pub fn unvec(v: &Array1<C64>, dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: v.len(),
            });
        }
        let mut m = Array2::zeros((dim, dim));
        for (k, z) in v.iter().enumerate() {
            m[[k % dim, k / dim]] = *z;
        }
        Ok(Self(m))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - &rhs.0)
    }
}

impl Add<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + &rhs.0)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs)
    }
}

/// Density operator on the joint resonator ⊗ TLS space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: HilbertDims,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12) and unit trace (1e-9). Positivity is
    /// not checked here; see [`DensityMatrix::min_eigenvalue`].
    pub fn new(dims: HilbertDims, matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::new_unchecked(dims, matrix)?;
        let herm = rho.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid(
                "rho",
                format!("not Hermitian (residual {herm:.3e})"),
            ));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace {tr} is not 1")));
        }
        Ok(rho)
    }

    /// Only checks dimensions. Used for evolved states, whose invariants are
    /// diagnosed rather than enforced.
    pub fn new_unchecked(dims: HilbertDims, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != dims.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: dims.total_dim(),
                found: matrix.dim(),
            });
        }
        Ok(Self { dims, matrix })
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn pure(dims: HilbertDims, psi: &Array1<C64>) -> Result<Self> {
        let d = dims.total_dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.len(),
            });
        }
        let m = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
        Self::new(dims, ComplexMatrix(m))
    }

    /// |n, s⟩⟨n, s| basis projector.
    pub fn basis_state(dims: HilbertDims, fock: usize, excited: bool) -> Result<Self> {
        if fock > dims.fock_cutoff() {
            return Err(Error::invalid("fock", "above the Fock cutoff"));
        }
        let mut psi = Array1::zeros(dims.total_dim());
        psi[dims.index(fock, excited)] = C64::new(1.0, 0.0);
        Self::pure(dims, &psi)
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.matrix.hermiticity_residual()
    }

    /// tr(ρ²), using Hermiticity: Σ |ρ_ij|².
    pub fn purity(&self) -> f64 {
        self.matrix.as_array().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Smallest eigenvalue of the Hermitian part. O(d³); diagnostics only.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dims.total_dim();
        let a = self.matrix.as_array();
        let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// The operators appearing in the master equation, on the joint space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub sigma_minus: ComplexMatrix,
    pub sigma_plus: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
    pub sigma_pp: ComplexMatrix,
    pub number_op: ComplexMatrix,
}

pub fn build_operators(dims: HilbertDims) -> OperatorSet {
    let d = dims.total_dim();
    let nmax = dims.fock_cutoff();
    let mut a = Array2::<C64>::zeros((d, d));
    let mut sm = Array2::<C64>::zeros((d, d));
    let mut sz = Array2::<C64>::zeros((d, d));
    let mut spp = Array2::<C64>::zeros((d, d));
    let mut num = Array2::<C64>::zeros((d, d));
    for n in 0..=nmax {
        for excited in [false, true] {
            let i = dims.index(n, excited);
            if n >= 1 {
                a[[dims.index(n - 1, excited), i]] = C64::new((n as f64).sqrt(), 0.0);
            }
            num[[i, i]] = C64::new(n as f64, 0.0);
            sz[[i, i]] = C64::new(if excited { 1.0 } else { -1.0 }, 0.0);
            if excited {
                spp[[i, i]] = C64::new(1.0, 0.0);
            }
        }
        sm[[dims.index(n, false), dims.index(n, true)]] = C64::new(1.0, 0.0);
    }
    let a = ComplexMatrix(a);
    let sm = ComplexMatrix(sm);
    OperatorSet {
        a_dag: a.dagger(),
        a,
        sigma_plus: sm.dagger(),
        sigma_minus: sm,
        sigma_z: ComplexMatrix(sz),
        sigma_pp: ComplexMatrix(spp),
        number_op: ComplexMatrix(num),
    }
}

/// Σ_{k > N} e^{−x} x^k / k! for x = |α|², summed directly so that tiny
/// tails are not lost to cancellation.
pub fn poisson_tail(mean: f64, fock_cutoff: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact = (1..=fock_cutoff).map(|k| (k as f64).ln()).sum::<f64>();
    let mut tail = 0.0;
    let mut k = fock_cutoff + 1;
    loop {
        ln_fact += (k as f64).ln();
        let term = (-mean + k as f64 * ln_mean - ln_fact).exp();
        tail += term;
        if k as f64 > mean && term < 1e-20 * tail.max(1e-300) {
            break;
        }
        if term == 0.0 && k as f64 > mean {
            break;
        }
        k += 1;
    }
    tail
}

/// Fock amplitudes of the coherent state |α⟩ truncated at the cutoff and
/// renormalized.
pub fn coherent_amplitudes(alpha: C64, dims: HilbertDims) -> Result<Vec<C64>> {
    let nmax = dims.fock_cutoff();
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, nmax);
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::Truncation {
            what: "coherent-state tail weight",
            weight: tail,
            threshold: COHERENT_TAIL_LIMIT,
            fock_cutoff: nmax,
        });
    }
    let mut amps = Vec::with_capacity(nmax + 1);
    if mean == 0.0 {
        amps.push(C64::new(1.0, 0.0));
        amps.resize(nmax + 1, C64::new(0.0, 0.0));
        return Ok(amps);
    }
    let ln_r = alpha.norm().ln();
    let phase = alpha.arg();
    let mut ln_fact = 0.0;
    for n in 0..=nmax {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let modulus = (-0.5 * mean + n as f64 * ln_r - 0.5 * ln_fact).exp();
        amps.push(C64::from_polar(modulus, n as f64 * phase));
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    Ok(amps)
}

/// Resonator in the (truncated) coherent state |α⟩, TLS in its ground state.
pub fn coherent_tls_ground(alpha: C64, dims: HilbertDims) -> Result<DensityMatrix> {
    let amps = coherent_amplitudes(alpha, dims)?;
    let mut psi = Array1::zeros(dims.total_dim());
    for (n, c) in amps.into_iter().enumerate() {
        psi[dims.index(n, false)] = c;
    }
    DensityMatrix::pure(dims, &psi)
}

/// tr(ρ · op).
pub fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<C64> {
    let d = rho.dims().total_dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let r = rho.matrix().as_array();
    let o = op.as_array();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += r[[i, j]] * o[[j, i]];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dims_validation_and_default_cutoff() {
        assert!(HilbertDims::new(0).is_err());
        assert_eq!(HilbertDims::new(3).unwrap().total_dim(), 8);
        assert_eq!(HilbertDims::for_photon_number(3.0).fock_cutoff(), 33);
        assert_eq!(HilbertDims::for_photon_number(500.0).fock_cutoff(), 734);
    }

    #[test]
    fn lowering_operator_n1() {
        let dims = HilbertDims::new(1).unwrap();
        let ops = build_operators(dims);
        let a = ops.a.as_array();
        assert_eq!(a.dim(), (4, 4));
        for excited in [false, true] {
            assert_eq!(a[[dims.index(0, excited), dims.index(1, excited)]], c(1.0));
        }
        assert_eq!(a.iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn number_operator_spectrum_n2() {
        let ops = build_operators(HilbertDims::new(2).unwrap());
        let diag: Vec<f64> = ops.number_op.as_array().diag().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        assert!(ops.number_op.max_abs_diff(&ops.a_dag.dot(&ops.a)) < 1e-15);
    }

    #[test]
    fn operator_identities() {
        for n in [1, 2, 5, 9] {
            let dims = HilbertDims::new(n).unwrap();
            let ops = build_operators(dims);
            let d = dims.total_dim();
            assert_eq!(ops.sigma_z.trace(), c(0.0));
            let id = ComplexMatrix::identity(d);
            let spp = (&(&id + &ops.sigma_z)) * 0.5;
            assert_eq!(ops.sigma_pp, spp);
            assert_eq!(ops.sigma_plus, ops.sigma_minus.dagger());
            assert_eq!(ops.sigma_plus.dot(&ops.sigma_minus), ops.sigma_pp);
            // [a, a†] = 1 below the top Fock level
            let comm = ops.a.commutator(&ops.a_dag);
            for i in 0..d {
                for j in 0..d {
                    let fock_i = i / 2;
                    if fock_i < n && j / 2 < n {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert_abs_diff_eq!(comm.as_array()[[i, j]].re, expect, epsilon = 1e-14);
                        assert_abs_diff_eq!(comm.as_array()[[i, j]].im, 0.0, epsilon = 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_state() {
        let dims = HilbertDims::new(4).unwrap();
        let rho = coherent_tls_ground(c(0.0), dims).unwrap();
        let vac = DensityMatrix::basis_state(dims, 0, false).unwrap();
        assert_eq!(rho, vac);
        let ops = build_operators(dims);
        assert_eq!(expectation(&rho, &ops.number_op).unwrap(), c(0.0));
    }

    #[test]
    fn coherent_state_photon_numbers() {
        let ops30 = build_operators(HilbertDims::new(30).unwrap());
        let rho = coherent_tls_ground(c(3f64.sqrt()), HilbertDims::new(30).unwrap()).unwrap();
        let n = expectation(&rho, &ops30.number_op).unwrap();
        assert!((n.re - 3.0).abs() < 1e-6);
        assert_eq!(expectation(&rho, &ops30.sigma_pp).unwrap(), c(0.0));

        let dims4 = HilbertDims::new(4).unwrap();
        let rho = coherent_tls_ground(c(0.005f64.sqrt()), dims4).unwrap();
        let n = expectation(&rho, &build_operators(dims4).number_op).unwrap();
        assert!((n.re - 0.005).abs() < 1e-8);
    }

    #[test]
    fn coherent_state_truncation_error() {
        let dims = HilbertDims::new(5).unwrap();
        let err = coherent_tls_ground(c(3.0), dims).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn coherent_state_is_valid_density_matrix() {
        let dims = HilbertDims::new(20).unwrap();
        let rho = coherent_tls_ground(C64::from_polar(2.0, 0.7), dims).unwrap();
        assert!(rho.hermiticity_residual() <= 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-9);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let a = expectation(&rho, &build_operators(dims).a).unwrap();
        assert!((a - C64::from_polar(2.0, 0.7)).norm() < 1e-6);
    }

    #[test]
    fn fock_state_expectation() {
        let dims = HilbertDims::new(3).unwrap();
        let rho = DensityMatrix::basis_state(dims, 1, false).unwrap();
        let ops = build_operators(dims);
        assert_eq!(expectation(&rho, &ops.number_op).unwrap(), c(1.0));
        let bad = ComplexMatrix::identity(4);
        assert!(matches!(
            expectation(&rho, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vec_unvec_column_major() {
        let m = ComplexMatrix::new(Array2::from_shape_fn((3, 3), |(i, j)| {
            C64::new(i as f64, j as f64)
        }))
        .unwrap();
        let v = m.vec();
        assert_eq!(v[1], C64::new(1.0, 0.0));
        assert_eq!(ComplexMatrix::unvec(&v, 3).unwrap(), m);
    }

    #[test]
    fn poisson_tail_matches_complement() {
        let tail = poisson_tail(3.0, 10);
        let mut head = 0.0;
        let mut term = (-3.0f64).exp();
        for k in 0..=10 {
            if k > 0 {
                term *= 3.0 / k as f64;
            }
            head += term;
        }
        assert!((tail - (1.0 - head)).abs() < 1e-12);
    }
}
