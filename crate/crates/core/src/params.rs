// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation parameters and integrator settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::HilbertDims;

/// Relative tolerance used when a T2 and a Tφ are both supplied.
pub const T2_CONSISTENCY_TOL: f64 = 1e-6;

/// Dimensionless model parameters (ħ = 1).
///
/// `tphi = None` means no pure dephasing. It is kept as an explicit flag so
/// that `1/Tφ` is exactly zero rather than a rounding residue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub t1: f64,
    pub tphi: Option<f64>,
    pub omega: f64,
    pub n0: f64,
    pub dims: HilbertDims,
}

impl ModelParams {
    /// Truncation defaults to [`HilbertDims::for_photon_number`].
    pub fn new(g: f64, t1: f64, tphi: Option<f64>, omega: f64, n0: f64) -> Result<Self> {
        let p = Self {
            g,
            t1,
            tphi,
            omega,
            n0,
            dims: HilbertDims::for_photon_number(n0),
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameter set from T2, back-solving Tφ. `T2 = 2·T1`
    /// (within [`T2_CONSISTENCY_TOL`]) means no dephasing.
    pub fn from_t2(g: f64, t1: f64, t2: f64, omega: f64, n0: f64) -> Result<Self> {
        let tphi = tphi_from_t2(t1, t2)?;
        Self::new(g, t1, tphi, omega, n0)
    }

    pub fn with_fock_cutoff(mut self, fock_cutoff: usize) -> Result<Self> {
        self.dims = HilbertDims::new(fock_cutoff)?;
        Ok(self)
    }

    pub fn with_n0(mut self, n0: f64) -> Result<Self> {
        self.n0 = n0;
        self.dims = HilbertDims::for_photon_number(n0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::invalid("g", "must be finite and non-negative"));
        }
        if !(self.t1.is_finite() && self.t1 > 0.0) {
            return Err(Error::invalid("T1", "must be finite and positive"));
        }
        if let Some(tphi) = self.tphi {
            if !(tphi.is_finite() && tphi > 0.0) {
                return Err(Error::invalid(
                    "Tphi",
                    "must be positive; use no value for infinite Tphi",
                ));
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid("omega", "must be finite and positive"));
        }
        if !(self.n0.is_finite() && self.n0 >= 0.0) {
            return Err(Error::invalid("n0", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// 1/Tφ, exactly zero without dephasing.
    pub fn dephasing_rate(&self) -> f64 {
        self.tphi.map_or(0.0, |t| 1.0 / t)
    }

    /// 1/T2 = 1/(2T1) + 1/Tφ.
    pub fn t2_rate(&self) -> f64 {
        0.5 / self.t1 + self.dephasing_rate()
    }

    pub fn t2(&self) -> f64 {
        1.0 / self.t2_rate()
    }
}

/// Tφ from (T1, T2); `None` when T2 = 2·T1.
pub fn tphi_from_t2(t1: f64, t2: f64) -> Result<Option<f64>> {
    if !(t1.is_finite() && t1 > 0.0) {
        return Err(Error::invalid("T1", "must be finite and positive"));
    }
    if !(t2.is_finite() && t2 > 0.0) {
        return Err(Error::invalid("T2", "must be finite and positive"));
    }
    let limit = 2.0 * t1;
    if (t2 - limit).abs() <= T2_CONSISTENCY_TOL * limit {
        return Ok(None);
    }
    if t2 > limit {
        return Err(Error::invalid(
            "T2",
            format!("T2 = {t2} exceeds 2*T1 = {limit}"),
        ));
    }
    Ok(Some(1.0 / (1.0 / t2 - 0.5 / t1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntegratorMethod {
    /// Dormand-Prince 5(4) with step-size control.
    AdaptiveRk45,
    /// Classical RK4 with a fixed number of steps between samples.
    FixedRk4 { steps_per_sample: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub sample_count: usize,
    pub method: IntegratorMethod,
}

impl IntegratorConfig {
    pub fn new(t_end: f64, sample_count: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_end,
            sample_count,
            method: IntegratorMethod::AdaptiveRk45,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_method(mut self, method: IntegratorMethod) -> Result<Self> {
        self.method = method;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-3) {
                return Err(Error::invalid(field, "must lie in (0, 1e-3]"));
            }
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be finite and positive"));
        }
        if self.sample_count < 2 {
            return Err(Error::invalid("sample_count", "must be at least 2"));
        }
        if let IntegratorMethod::FixedRk4 { steps_per_sample } = self.method {
            if steps_per_sample == 0 {
                return Err(Error::invalid("steps_per_sample", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Uniform grid `t_k = k·t_end/(sample_count−1)`.
    pub fn sample_times(&self) -> Vec<f64> {
        uniform_grid(self.t_end, self.sample_count)
    }
}

pub fn uniform_grid(t_end: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { t_end } else { t_end * k as f64 / last })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t2_from_tphi() {
        let p = ModelParams::new(0.2, 1.0, Some(2.0 / 9.0), 1.0, 3.0).unwrap();
        assert!((p.t2() - 0.2).abs() < 1e-14);
        let p = ModelParams::new(10.0, 1.0, None, 1.0, 0.005).unwrap();
        assert_eq!(p.t2(), 2.0);
    }

    #[test]
    fn tphi_back_solve() {
        let tphi = tphi_from_t2(1.0, 0.2).unwrap().unwrap();
        assert!((tphi - 2.0 / 9.0).abs() < 1e-14);
        assert_eq!(tphi_from_t2(1.0, 2.0).unwrap(), None);
        assert!(tphi_from_t2(1.0, 3.0).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.2, 0.0, None, 1.0, 3.0).is_err());
        assert!(ModelParams::new(0.2, 1.0, Some(0.0), 1.0, 3.0).is_err());
        assert!(ModelParams::new(0.2, 1.0, Some(f64::INFINITY), 1.0, 3.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, None, 1.0, 3.0).is_err());
        assert!(ModelParams::new(0.2, 1.0, None, 0.0, 3.0).is_err());
        assert!(ModelParams::new(0.2, 1.0, None, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, None, 1.0, 3.0).is_ok());
    }

    #[test]
    fn integrator_validation() {
        assert!(IntegratorConfig::new(1.0, 1).is_err());
        assert!(IntegratorConfig::new(0.0, 10).is_err());
        let cfg = IntegratorConfig::new(1.0, 10).unwrap();
        assert!(cfg.clone().with_tolerances(1e-2, 1e-10).is_err());
        assert!(cfg
            .clone()
            .with_method(IntegratorMethod::FixedRk4 { steps_per_sample: 0 })
            .is_err());
        let ts = cfg.sample_times();
        assert_eq!(ts.len(), 10);
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[9], 1.0);
    }
}
