// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form results: the quantization map to `g`, quasistatic TLS
//! response, loss tangents, knee photon numbers and regime classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Relative tolerance of the resonance check `ħω = E`.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Lower and upper factors of the crossover band around the knee.
pub const CROSSOVER_BAND: (f64, f64) = (0.5, 2.0);

/// Microscopic TLS and field parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Dipole moment `p = q·l`.
    pub p: f64,
    /// Angle between the field and the dipole axis (radians).
    pub theta: f64,
    /// Asymmetry energy Δ.
    pub delta: f64,
    /// Tunneling energy Δ0.
    pub delta0: f64,
    pub epsilon: f64,
    /// Effective mode volume.
    pub volume: f64,
    pub omega: f64,
    /// Reduced Planck constant in the caller's units (1 when dimensionless).
    pub hbar: f64,
}

impl PhysicalParams {
    /// Checks `Δ0 > 0`, positivity of ε, V, ω, ħ, and the resonance
    /// condition `ħω = √(Δ² + Δ0²)`.
    pub fn new(
        p: f64,
        theta: f64,
        delta: f64,
        delta0: f64,
        epsilon: f64,
        volume: f64,
        omega: f64,
        hbar: f64,
    ) -> Result<Self> {
        let phys = Self {
            p,
            theta,
            delta,
            delta0,
            epsilon,
            volume,
            omega,
            hbar,
        };
        phys.validate()?;
        Ok(phys)
    }

    /// Resonant parameters with ħ = 1: `ω` is set to `E`.
    pub fn resonant(p: f64, theta: f64, delta: f64, delta0: f64, epsilon: f64, volume: f64) -> Result<Self> {
        let e = delta.hypot(delta0);
        Self::new(p, theta, delta, delta0, epsilon, volume, e, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::invalid("Delta0", "must be finite and positive"));
        }
        if !self.delta.is_finite() || !self.p.is_finite() || !self.theta.is_finite() {
            return Err(Error::invalid("p/theta/Delta", "must be finite"));
        }
        for (field, v) in [
            ("epsilon", self.epsilon),
            ("V", self.volume),
            ("omega", self.omega),
            ("hbar", self.hbar),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::invalid(field, "must be positive"));
            }
        }
        let e = self.energy();
        let hw = self.hbar * self.omega;
        if (hw - e).abs() > RESONANCE_TOL * e {
            return Err(Error::invalid(
                "omega",
                format!("resonance requires hbar*omega = E = {e}, got {hw}"),
            ));
        }
        Ok(())
    }

    /// TLS splitting `E = √(Δ² + Δ0²)`.
    pub fn energy(&self) -> f64 {
        self.delta.hypot(self.delta0)
    }

    /// Mixing angle with `tan α = Δ0/Δ`, in (0, π).
    pub fn mixing_angle(&self) -> f64 {
        self.delta0.atan2(self.delta)
    }
}

/// Electric field per photon `F0' = √(ħω / 2εV)`.
pub fn field_per_photon(phys: &PhysicalParams) -> f64 {
    (phys.hbar * phys.omega / (2.0 * phys.epsilon * phys.volume)).sqrt()
}

/// Jaynes-Cummings coupling `g = p·cosθ·F0'·Δ0 / (2ħE)`.
pub fn compute_coupling(phys: &PhysicalParams) -> f64 {
    phys.p * phys.theta.cos() * field_per_photon(phys) * phys.delta0
        / (2.0 * phys.hbar * phys.energy())
}

/// Dimensionless drive `R = 2g·√n·√(T1·T2)`.
pub fn rabi_parameter(g: f64, n: f64, t1: f64, t2: f64) -> f64 {
    2.0 * g * (n * t1 * t2).sqrt()
}

/// Inverse of [`rabi_parameter`] for the photon number.
pub fn photon_number_for_rabi(r: f64, g: f64, t1: f64, t2: f64) -> f64 {
    let x = r / (2.0 * g);
    x * x / (t1 * t2)
}

/// Steady TLS response to a fixed drive `R`: upper-level population and
/// squared coherence `|⟨σ₊⟩|²`.
pub fn quasistatic_tls(r: f64, t1: f64, t2: f64) -> (f64, f64) {
    let r2 = r * r;
    let pop = 0.5 * r2 / (1.0 + r2);
    let x = r / (1.0 + r2);
    (pop, t2 / (4.0 * t1) * x * x)
}

/// Effective unsaturated decay rate `Γ = [1/(2g²T2) + T1]⁻¹`.
pub fn gamma_effective(g: f64, t1: f64, t2: f64) -> f64 {
    1.0 / (1.0 / (2.0 * g * g * t2) + t1)
}

/// `n0·e^{−Γt}`.
pub fn weak_unsaturated_n(t: f64, n0: f64, gamma: f64) -> f64 {
    n0 * (-gamma * t).exp()
}

/// Linear saturated decay `n0 − t/(2T1)`, unclamped, with a flag that is
/// false once the line has crossed zero (`t > 2T1·n0`).
pub fn saturated_n(t: f64, n0: f64, t1: f64) -> (f64, bool) {
    (n0 - t / (2.0 * t1), t <= 2.0 * t1 * n0)
}

/// Classical loss tangent `2g²T2 / (ω(1 + R0²))`.
pub fn loss_classical(r0: f64, g: f64, t2: f64, omega: f64) -> f64 {
    2.0 * g * g * t2 / (omega * (1.0 + r0 * r0))
}

/// Very-weak-coupling limit `2g²T2/ω` of the unsaturated loss.
pub fn loss_very_weak(g: f64, t2: f64, omega: f64) -> f64 {
    2.0 * g * g * t2 / omega
}

/// Unsaturated weak-coupling loss `Γ/ω`. Rejects strong coupling, where the
/// quasistatic picture behind the formula does not hold.
pub fn loss_weak_unsaturated(g: f64, t1: f64, t2: f64, omega: f64) -> Result<f64> {
    if coupling_kind(g, t1, t2) == Coupling::Strong {
        return Err(Error::invalid(
            "g",
            "weak-coupling loss formula used at strong coupling",
        ));
    }
    Ok(gamma_effective(g, t1, t2) / omega)
}

/// Saturated loss `1/(2·n0·T1·ω)`.
pub fn loss_saturated(n0: f64, t1: f64, omega: f64) -> f64 {
    1.0 / (2.0 * n0 * t1 * omega)
}

/// Strong-coupling unsaturated loss `(1/3ω)(1/T1 + 1/T2)`.
pub fn loss_strong_unsaturated(t1: f64, t2: f64, omega: f64) -> f64 {
    (1.0 / t1 + 1.0 / t2) / (3.0 * omega)
}

/// Same as [`loss_strong_unsaturated`] written with Tφ:
/// `(1/ω)(1/(2T1) + 1/(3Tφ))`.
pub fn loss_strong_unsaturated_tphi(t1: f64, tphi: Option<f64>, omega: f64) -> f64 {
    (0.5 / t1 + tphi.map_or(0.0, |t| 1.0 / (3.0 * t))) / omega
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakKnee {
    /// `1/(2T1Γ)`.
    pub exact: f64,
    /// `1/(4g²T1T2)`.
    pub very_weak: f64,
}

pub fn knee_weak(g: f64, t1: f64, t2: f64) -> WeakKnee {
    WeakKnee {
        exact: 1.0 / (2.0 * t1 * gamma_effective(g, t1, t2)),
        very_weak: 1.0 / (4.0 * g * g * t1 * t2),
    }
}

/// Strong-coupling knee `n_s = (3/2)/(1 + T1/T2)`.
pub fn knee_strong(t1: f64, t2: f64) -> f64 {
    1.5 / (1.0 + t1 / t2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Saturation {
    Unsaturated,
    Crossover,
    Saturated,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Weak => "weak",
            Coupling::Strong => "strong",
        })
    }
}

impl fmt::Display for Saturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Saturation::Unsaturated => "unsaturated",
            Saturation::Crossover => "crossover",
            Saturation::Saturated => "saturated",
        })
    }
}

/// Strong coupling means `g > max(1/T1, 1/T2)`.
pub fn coupling_kind(g: f64, t1: f64, t2: f64) -> Coupling {
    if g > (1.0 / t1).max(1.0 / t2) {
        Coupling::Strong
    } else {
        Coupling::Weak
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub coupling: Coupling,
    pub saturation: Saturation,
    pub r0: f64,
    /// `n_w` at weak coupling, `n_s` at strong coupling.
    pub n_crit: f64,
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.coupling, self.saturation)
    }
}

pub fn classify_regime(params: &ModelParams) -> RegimeReport {
    let t2 = params.t2();
    let coupling = coupling_kind(params.g, params.t1, t2);
    let n_crit = match coupling {
        Coupling::Weak => knee_weak(params.g, params.t1, t2).exact,
        Coupling::Strong => knee_strong(params.t1, t2),
    };
    let saturation = if params.n0 < CROSSOVER_BAND.0 * n_crit {
        Saturation::Unsaturated
    } else if params.n0 > CROSSOVER_BAND.1 * n_crit {
        Saturation::Saturated
    } else {
        Saturation::Crossover
    };
    RegimeReport {
        coupling,
        saturation,
        r0: rabi_parameter(params.g, params.n0, params.t1, t2),
        n_crit,
    }
}

/// Secular no-dephasing photon number `n0·e^{−t/2T1}·cos²(gt)`.
pub fn no_dephasing_n(t: f64, n0: f64, g: f64, t1: f64) -> f64 {
    n0 * (-t / (2.0 * t1)).exp() * (g * t).cos().powi(2)
}

/// Secular no-dephasing TLS population `n0·e^{−t/2T1}·sin²(gt)`.
pub fn no_dephasing_sigma_pp(t: f64, n0: f64, g: f64, t1: f64) -> f64 {
    n0 * (-t / (2.0 * t1)).exp() * (g * t).sin().powi(2)
}

/// No-dephasing `|⟨a†σ₋⟩|²` in the printed form
/// `n0²·e^{−t/2T1}·sin²(2gt)/4`.
pub fn no_dephasing_corr_sq(t: f64, n0: f64, g: f64, t1: f64) -> f64 {
    n0 * n0 * (-t / (2.0 * t1)).exp() * (2.0 * g * t).sin().powi(2) / 4.0
}
