// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, C64};

const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm_dmatrix(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::invalid("matrix", "non-finite entry"));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(s), 0.0);
    let b = |k: usize| C64::new(PADE_13[k], 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::invalid("matrix", "singular Padé denominator"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

pub fn to_dmatrix(m: &ComplexMatrix) -> DMatrix<C64> {
    let a = m.as_array();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_dmatrix(m: &DMatrix<C64>) -> ComplexMatrix {
    let arr = ndarray::Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]);
    ComplexMatrix::new(arr).expect("square finite matrix")
}

pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(from_dmatrix(&expm_dmatrix(&to_dmatrix(m))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rotation_generator() {
        for theta in [0.3, 2.0, 17.0, 150.0] {
            let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)]);
            let e = expm_dmatrix(&a).unwrap();
            let tol = 1e-13 * theta.max(1.0);
            assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < tol);
            assert!((e[(1, 0)] - c(theta.sin(), 0.0)).norm() < tol);
            assert!((e[(0, 1)] + c(theta.sin(), 0.0)).norm() < tol);
        }
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(-3.0, 1.0),
            c(0.5, 0.0),
            c(-40.0, 0.0),
        ]));
        let e = expm_dmatrix(&d).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13 * e[(i, i)].norm().max(1e-300) + 1e-300);
        }
        let mut n = DMatrix::<C64>::zeros(3, 3);
        n[(0, 1)] = c(2.0, 0.0);
        n[(1, 2)] = c(3.0, 0.0);
        let e = expm_dmatrix(&n).unwrap();
        assert!((e[(0, 2)] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_property() {
        let a = DMatrix::from_fn(5, 5, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let e = expm_dmatrix(&a).unwrap();
        let f = expm_dmatrix(&(-&a)).unwrap();
        let p = e * f;
        let id = DMatrix::<C64>::identity(5, 5);
        assert!((p - id).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }
}
