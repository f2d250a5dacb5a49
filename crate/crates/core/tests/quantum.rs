// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_relative_eq;
use proptest::prelude::*;
use tlsloss::quantum::*;

fn dims(cutoff: usize) -> HilbertDims {
    HilbertDims::new(cutoff).unwrap()
}

#[test]
fn canonical_commutator_below_the_cutoff() {
    let d = dims(6);
    let ops = build_operators(d);
    let c = ops.a.commutator(&ops.a_dag);
    for n in 0..=6 {
        for s in [false, true] {
            let i = d.index(n, s);
            let want = if n < 6 { 1.0 } else { -6.0 };
            assert_relative_eq!(c.as_array()[[i, i]].re, want, epsilon = 1e-12);
        }
    }
    let pp = ops.sigma_plus.dot(&ops.sigma_minus);
    assert!(pp.max_abs_diff(&ops.sigma_pp) < 1e-15);
    let z = ops.sigma_plus.commutator(&ops.sigma_minus);
    assert!(z.max_abs_diff(&ops.sigma_z) < 1e-15);
}

#[test]
fn poisson_tail_sums() {
    // P(n > N) for mean 1 and N = 2: 1 − e⁻¹(1 + 1 + 1/2).
    let want = 1.0 - (-1.0f64).exp() * 2.5;
    assert_relative_eq!(poisson_tail(1.0, 2), want, epsilon = 1e-14);
}

proptest! {
    #[test]
    fn coherent_state_moments(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let alpha = C64::new(re, im);
        let d = HilbertDims::for_photon_number(alpha.norm_sqr());
        let rho = coherent_tls_ground(alpha, d).unwrap();
        let ops = build_operators(d);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!((expectation(&rho, &ops.number_op).unwrap().re - alpha.norm_sqr()).abs() < 1e-6);
        prop_assert!((expectation(&rho, &ops.a).unwrap() - alpha).norm() < 1e-6);
        prop_assert!(expectation(&rho, &ops.sigma_pp).unwrap().norm() == 0.0);
        prop_assert!((rho.purity() - 1.0).abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn expectation_is_linear(x in -2.0f64..2.0, y in -2.0f64..2.0, n in 0usize..4, s: bool) {
        let d = dims(4);
        let ops = build_operators(d);
        let rho = DensityMatrix::basis_state(d, n, s).unwrap();
        let combo = &ops.number_op * x + &(&ops.sigma_z * y);
        let lhs = expectation(&rho, &combo).unwrap();
        let rhs = expectation(&rho, &ops.number_op).unwrap() * x
            + expectation(&rho, &ops.sigma_z).unwrap() * y;
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // Hermitian operators have real expectation values.
        prop_assert_eq!(expectation(&rho, &ops.number_op).unwrap().im, 0.0);
    }

    #[test]
    fn basis_index_is_a_bijection(cutoff in 1usize..30) {
        let d = dims(cutoff);
        let mut seen = vec![false; d.total_dim()];
        for n in 0..=cutoff {
            for s in [false, true] {
                let i = d.index(n, s);
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.into_iter().all(|v| v));
    }
}
