// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Energy loss of a superconducting resonator through a single resonant
//! two-level system (TLS).
//!
//! The resonator and the TLS form a Jaynes-Cummings pair; the TLS relaxes
//! (T1) and dephases (Tφ) into zero-temperature reservoirs. The crate offers
//! three dynamical descriptions of increasing approximation:
//!
//! * [`lindblad`]: the full master equation on a truncated Fock ⊗ TLS space,
//!   with a Liouvillian-exponential oracle for small truncations;
//! * [`bloch`]: the decorrelated Maxwell-Bloch equations and the
//!   single-excitation manifold solution;
//! * [`analytic`]: closed-form regime solutions, loss tangents and knee
//!   photon numbers.
//!
//! [`loss`] turns trajectories into loss tangents and sweeps them over the
//! initial photon number.
//!
//! Units: ħ = 1 everywhere; `g`, `1/T1`, `1/T2` and `ω` share one inverse-time
//! unit.

pub mod analytic;
pub mod bloch;
mod error;
pub mod expm;
pub mod lindblad;
pub mod loss;
pub mod ode;
pub mod params;
pub mod quantum;
pub mod record;

pub use error::{Error, ErrorClass, Result};
pub use params::{IntegratorConfig, IntegratorMethod, ModelParams};
pub use quantum::{ComplexMatrix, DensityMatrix, HilbertDims, OperatorSet, C64};
pub use record::ObservableRecord;
