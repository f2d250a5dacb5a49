// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Explicit Runge-Kutta integrators on real state vectors.
//!
//! Both integrators step exactly onto the requested sample times, so the
//! sampled values are never interpolated.

use crate::error::{Error, Result};
use crate::params::{IntegratorConfig, IntegratorMethod};

pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Applied to every accepted state before it is used further.
    fn project(&self, _y: &mut [f64]) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Integrates from `times[0]` and calls `observe(k, t_k, y)` at every
/// sample time, starting with the initial state. Returns the last state
/// reached.
pub fn integrate<S, F>(
    sys: &S,
    y0: Vec<f64>,
    times: &[f64],
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<Vec<f64>>
where
    S: OdeSystem,
    F: FnMut(usize, f64, &[f64]) -> Result<Control>,
{
    if y0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: y0.len(),
        });
    }
    if times.is_empty() {
        return Ok(y0);
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("t_grid", "sample times must increase strictly"));
    }
    match cfg.method {
        IntegratorMethod::AdaptiveRk45 => {
            let mut solver = Dopri5::new(sys, cfg.rel_tol, cfg.abs_tol);
            solver.run(y0, times, &mut observe)
        }
        IntegratorMethod::FixedRk4 { steps_per_sample } => {
            rk4_run(sys, y0, times, steps_per_sample, &mut observe)
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

struct Dopri5<'a, S: OdeSystem> {
    sys: &'a S,
    rtol: f64,
    atol: f64,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl<'a, S: OdeSystem> Dopri5<'a, S> {
    fn new(sys: &'a S, rtol: f64, atol: f64) -> Self {
        let d = sys.dim();
        Self {
            sys,
            rtol,
            atol,
            k: std::array::from_fn(|_| vec![0.0; d]),
            ytmp: vec![0.0; d],
            ynew: vec![0.0; d],
        }
    }

    fn weighted_rms(&self, v: &[f64], y: &[f64]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(vi, yi)| {
                let sc = self.atol + self.rtol * yi.abs();
                (vi / sc) * (vi / sc)
            })
            .sum();
        (s / v.len() as f64).sqrt()
    }

    fn initial_step(&mut self, t0: f64, y: &[f64], span: f64) -> f64 {
        let d0 = self.weighted_rms(y, y);
        let d1 = self.weighted_rms(&self.k[0], y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        for i in 0..y.len() {
            self.ytmp[i] = y[i] + h0 * self.k[0][i];
        }
        self.sys.rhs(t0 + h0, &self.ytmp, &mut self.k[1]);
        let diff: Vec<f64> = self.k[1]
            .iter()
            .zip(&self.k[0])
            .map(|(a, b)| a - b)
            .collect();
        let d2 = self.weighted_rms(&diff, y) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// One trial step of size `h` from `(t, y)` with `k[0] = f(t, y)`.
    /// On return `ynew` holds the projected candidate, `k[6]` its slope,
    /// and the result is the scaled error norm.
    fn trial(&mut self, t: f64, y: &[f64], h: f64) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let sys = self.sys;
        let ytmp = &mut self.ytmp;

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, ytmp, k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, ytmp, k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, ytmp, k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, ytmp, k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, ytmp, k6);
        let ynew = &mut self.ynew;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.project(ynew);
        sys.rhs(t + h, ynew, k7);

        let mut acc = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
            acc += (e / sc) * (e / sc);
        }
        if n == 0 {
            0.0
        } else {
            (acc / n as f64).sqrt()
        }
    }

    fn run<F>(&mut self, mut y: Vec<f64>, times: &[f64], observe: &mut F) -> Result<Vec<f64>>
    where
        F: FnMut(usize, f64, &[f64]) -> Result<Control>,
    {
        let mut t = times[0];
        self.sys.project(&mut y);
        if observe(0, t, &y)? == Control::Stop || times.len() == 1 {
            return Ok(y);
        }
        let t_final = *times.last().unwrap();
        self.sys.rhs(t, &y, &mut self.k[0]);
        let mut h = self.initial_step(t, &y, t_final - t);
        let mut steps = 0usize;

        for (idx, &target) in times.iter().enumerate().skip(1) {
            while t < target {
                steps += 1;
                if steps > MAX_STEPS {
                    return Err(Error::Integrator {
                        t,
                        reason: "step budget exhausted".into(),
                    });
                }
                let remaining = target - t;
                let landing = h >= remaining * (1.0 - 1e-12);
                let h_try = if landing { remaining } else { h };
                if h_try <= 1e-14 * t.abs().max(1.0) && !landing {
                    return Err(Error::Integrator {
                        t,
                        reason: format!("step size underflow (h = {h_try:.3e})"),
                    });
                }
                let err = self.trial(t, &y, h_try);
                if !err.is_finite() {
                    h = h_try * FAC_MIN;
                    if h <= 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Integrator {
                            t,
                            reason: "non-finite state".into(),
                        });
                    }
                    continue;
                }
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if err <= 1.0 {
                    t = if landing { target } else { t + h_try };
                    std::mem::swap(&mut y, &mut self.ynew);
                    self.k.swap(0, 6);
                    let proposed = h_try * fac;
                    // A step shortened to land on a sample should not shrink
                    // the step used afterwards.
                    h = if landing { proposed.max(h) } else { proposed };
                } else {
                    h = h_try * fac.min(1.0);
                }
            }
            if observe(idx, t, &y)? == Control::Stop {
                break;
            }
        }
        Ok(y)
    }
}

fn rk4_run<S, F>(
    sys: &S,
    mut y: Vec<f64>,
    times: &[f64],
    steps_per_sample: usize,
    observe: &mut F,
) -> Result<Vec<f64>>
where
    S: OdeSystem,
    F: FnMut(usize, f64, &[f64]) -> Result<Control>,
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    sys.project(&mut y);
    if observe(0, times[0], &y)? == Control::Stop {
        return Ok(y);
    }
    for idx in 1..times.len() {
        let t0 = times[idx - 1];
        let h = (times[idx] - t0) / steps_per_sample as f64;
        for s in 0..steps_per_sample {
            let t = t0 + s as f64 * h;
            sys.rhs(t, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * k3[i];
            }
            sys.rhs(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            sys.project(&mut y);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integrator {
                t: times[idx],
                reason: "non-finite state".into(),
            });
        }
        if observe(idx, times[idx], &y)? == Control::Stop {
            break;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        w: f64,
        damping: f64,
    }

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -self.w * self.w * y[0] - self.damping * y[1];
        }
    }

    fn collect(cfg: &IntegratorConfig, sys: &Oscillator) -> Vec<(f64, f64)> {
        let times = cfg.sample_times();
        let mut out = Vec::new();
        integrate(sys, vec![1.0, 0.0], &times, cfg, |_, t, y| {
            out.push((t, y[0]));
            Ok(Control::Continue)
        })
        .unwrap();
        out
    }

    #[test]
    fn dopri_harmonic_oscillator() {
        let sys = Oscillator { w: 3.0, damping: 0.0 };
        let cfg = IntegratorConfig::new(10.0, 41).unwrap();
        let out = collect(&cfg, &sys);
        assert_eq!(out.len(), 41);
        for (k, (t, x)) in out.iter().enumerate() {
            assert_eq!(*t, cfg.sample_times()[k]);
            assert!((x - (3.0 * t).cos()).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn rk4_damped_oscillator() {
        let sys = Oscillator { w: 1.0, damping: 0.0 };
        let cfg = IntegratorConfig::new(5.0, 11)
            .unwrap()
            .with_method(IntegratorMethod::FixedRk4 { steps_per_sample: 50 })
            .unwrap();
        for (t, x) in collect(&cfg, &sys) {
            assert!((x - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        struct Decay;
        impl OdeSystem for Decay {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
                dy[0] = -2.0 * y[0];
            }
        }
        let cfg = IntegratorConfig::new(3.0, 4).unwrap();
        let times = cfg.sample_times();
        let last = integrate(&Decay, vec![1.0], &times, &cfg, |_, _, _| {
            Ok(Control::Continue)
        })
        .unwrap();
        assert!((last[0] - (-6.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn observer_can_stop() {
        let sys = Oscillator { w: 1.0, damping: 0.1 };
        let cfg = IntegratorConfig::new(10.0, 11).unwrap();
        let mut seen = 0;
        integrate(&sys, vec![1.0, 0.0], &cfg.sample_times(), &cfg, |k, _, _| {
            seen += 1;
            Ok(if k == 3 { Control::Stop } else { Control::Continue })
        })
        .unwrap();
        assert_eq!(seen, 4);
    }

    #[test]
    fn rejects_non_increasing_grid() {
        let sys = Oscillator { w: 1.0, damping: 0.0 };
        let cfg = IntegratorConfig::new(1.0, 2).unwrap();
        let r = integrate(&sys, vec![1.0, 0.0], &[0.0, 0.0], &cfg, |_, _, _| {
            Ok(Control::Continue)
        });
        assert!(r.is_err());
    }

    #[test]
    fn blow_up_reports_integrator_error() {
        struct Blow;
        impl OdeSystem for Blow {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
                dy[0] = y[0] * y[0];
            }
        }
        let cfg = IntegratorConfig::new(2.0, 3).unwrap();
        let r = integrate(&Blow, vec![1.0], &cfg.sample_times(), &cfg, |_, _, _| {
            Ok(Control::Continue)
        });
        assert!(matches!(r, Err(Error::Integrator { .. })));
    }
}
