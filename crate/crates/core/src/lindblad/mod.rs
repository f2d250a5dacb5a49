// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! The Lindblad master equation for the resonator-TLS pair.
//!
//! [`evolve_master`] runs the production engine, which evolves the density
//! matrix sector by sector in total excitation number. The dense
//! [`lindblad_rhs`], the superoperator [`liouvillian_matrix`] and the
//! exponential oracle [`evolve_oracle`] work directly on the joint space.

mod checks;
mod dense;
mod sector;

pub use checks::{energy_flow_residual, energy_increase, first_invalid_row, trace_deviation};
pub use dense::{
    evolve_master_dense_from, evolve_oracle, evolve_oracle_from, lindblad_rhs,
    liouvillian_matrix, liouvillian_matrix_capped, observe, DenseMaster, ORACLE_DIM_CAP,
};
pub use sector::{
    evolve_master, evolve_master_on_grid, evolve_master_with, manifold_count,
    manifold_couplings, sector_bound, EngineMode, MasterOptions, MasterRun, SectorSystem,
    Snapshot, DEFAULT_SECTOR_DROP, TAIL_POPULATION_LIMIT,
};
