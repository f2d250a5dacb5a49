// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Trajectory-level diagnostics shared by the engines and the CLI.

use crate::record::ObservableRecord;

/// Relative residual of the energy-flow identity
/// `d(n + σ₊₊)/dt = −σ₊₊/T1` on a uniform sample grid.
///
/// The derivative is a five-point centered difference at interior samples;
/// the residual is `max |dE/dt + σ₊₊/T1| / max |σ₊₊/T1|`, or the absolute
/// maximum when σ₊₊ vanishes identically. Returns `None` with fewer than
/// five samples.
pub fn energy_flow_residual(records: &[ObservableRecord], t1: f64) -> Option<f64> {
    if records.len() < 5 {
        return None;
    }
    let h = records[1].t - records[0].t;
    let e: Vec<f64> = records.iter().map(ObservableRecord::energy).collect();
    let mut worst: f64 = 0.0;
    for k in 2..records.len() - 2 {
        let de = (e[k - 2] - 8.0 * e[k - 1] + 8.0 * e[k + 1] - e[k + 2]) / (12.0 * h);
        worst = worst.max((de + records[k].sigma_pp / t1).abs());
    }
    let scale = records
        .iter()
        .map(|r| (r.sigma_pp / t1).abs())
        .fold(0.0, f64::max);
    Some(if scale > 0.0 { worst / scale } else { worst })
}

/// Largest increase of `n + σ₊₊` between consecutive samples (zero for a
/// non-increasing energy).
pub fn energy_increase(records: &[ObservableRecord]) -> f64 {
    records
        .windows(2)
        .map(|w| w[1].energy() - w[0].energy())
        .fold(0.0, f64::max)
}

/// Largest `|trace − 1|` over the records that carry a trace.
pub fn trace_deviation(records: &[ObservableRecord]) -> f64 {
    records
        .iter()
        .filter_map(|r| r.trace)
        .map(|tr| (tr - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Index of the first record violating a row invariant.
pub fn first_invalid_row(records: &[ObservableRecord]) -> Option<usize> {
    records
        .iter()
        .position(|r| !r.invariant_violations().is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_flow_has_small_residual() {
        // n = e^{-t}, s = 0.5 e^{-t}, T1 = 1: dE/dt = -1.5 e^{-t} != -s.
        let bad: Vec<_> = (0..200)
            .map(|k| {
                let t = 0.01 * k as f64;
                ObservableRecord::new(t, (-t).exp(), 0.5 * (-t).exp())
            })
            .collect();
        assert!(energy_flow_residual(&bad, 1.0).unwrap() > 1.0);
        // E = 2 e^{-t/2}, s = e^{-t/2}, T1 = 1: dE/dt = -s exactly.
        let good: Vec<_> = (0..200)
            .map(|k| {
                let t = 0.01 * k as f64;
                ObservableRecord::new(t, (-t / 2.0).exp(), (-t / 2.0).exp())
            })
            .collect();
        assert!(energy_flow_residual(&good, 1.0).unwrap() < 1e-9);
        assert_eq!(energy_increase(&good), 0.0);
    }
}
