// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::quantum::C64;

/// Expectation values at one sample time.
///
/// Fields an engine cannot produce are `None` (the decorrelated equations,
/// for example, carry no ⟨a†σ₋⟩ and no purity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub n: f64,
    pub sigma_pp: f64,
    pub sigma_minus: Option<C64>,
    pub a_expect: Option<C64>,
    pub corr: Option<C64>,
    pub trace: Option<f64>,
    pub purity: Option<f64>,
}

impl ObservableRecord {
    pub fn new(t: f64, n: f64, sigma_pp: f64) -> Self {
        Self {
            t,
            n,
            sigma_pp,
            sigma_minus: None,
            a_expect: None,
            corr: None,
            trace: None,
            purity: None,
        }
    }

    /// ⟨n⟩ + ⟨σ₊₊⟩.
    pub fn energy(&self) -> f64 {
        self.n + self.sigma_pp
    }

    /// Names of the violated row invariants:
    /// `0 ≤ σ₊₊ ≤ 1 + 1e-6`, `n ≥ −1e-8`, `|trace − 1| ≤ 1e-6`.
    pub fn invariant_violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if !(self.sigma_pp >= -1e-6 && self.sigma_pp <= 1.0 + 1e-6) {
            bad.push("sigma_pp");
        }
        if !(self.n >= -1e-8) {
            bad.push("n");
        }
        if let Some(tr) = self.trace {
            if !((tr - 1.0).abs() <= 1e-6) {
                bad.push("trace");
            }
        }
        bad
    }
}
