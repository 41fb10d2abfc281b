// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M − M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U − I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u;
    max_abs(&(g - CMatrix::identity(n, n)))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// matrix. Only the lower triangle is read.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    (values, vectors)
}

/// `V · diag(f(e)) · V†`.
pub fn spectral_apply(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &e) in values.iter().enumerate() {
        let s = f(e);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(−i·t·H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    spectral_apply(&values, &vectors, |e| Complex64::from_polar(1.0, -t * e))
}

/// Gap below which eigenvalues of the Hermitian part are treated as one
/// cluster in [`normal_eigen`].
const CLUSTER_GAP: f64 = 1e-8;
const NEGLIGIBLE: f64 = 1e-14;

/// Eigenvalues and orthonormal eigenvectors of a normal matrix.
///
/// The Hermitian part `(N + N†)/2` and the anti-Hermitian part
/// `(N − N†)/2i` commute. The first is diagonalized, then the second is
/// diagonalized inside each cluster of nearly equal eigenvalues. Values
/// are Rayleigh quotients `v†Nv`. Unlike a general Schur iteration this
/// handles highly degenerate spectra such as reflections.
pub fn normal_eigen(u: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let n = u.nrows();
    let re = hermitize(u);
    let im = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    let (a, va) = hermitian_eigen(&re);
    let mut vectors = va.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && a[end] - a[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = va.columns(start, end - start).into_owned();
            let mut restricted = hermitize(&(block.adjoint() * &im * &block));
            // Denormal-scale entries break the tridiagonal sweep.
            restricted.iter_mut().for_each(|z| {
                if z.norm() < NEGLIGIBLE {
                    *z = Complex64::new(0.0, 0.0);
                }
            });
            if max_abs(&restricted) > 0.0 {
                let (_, w) = hermitian_eigen(&restricted);
                vectors.columns_mut(start, end - start).copy_from(&(&block * w));
            }
        }
        start = end;
    }
    let values = (0..n)
        .map(|j| {
            let v = vectors.column(j);
            v.dotc(&(u * v))
        })
        .collect();
    (values, vectors)
}

pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_pauli_x() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let t = 0.37_f64;
        let u = expm_hermitian(&x, t);
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos(), 0.), c(0., -t.sin()), c(0., -t.sin()), c(t.cos(), 0.)],
        );
        assert!(max_abs(&(u - want)) < 1e-14);
    }

    #[test]
    fn normal_eigen_survives_tiny_cluster_noise() {
        // Reflection-like: ±i on two states, 1 on the rest, with roundoff coupling.
        let n = 30;
        let mut u = CMatrix::identity(n, n);
        u[(0, 0)] = c(0.0, 0.0);
        u[(1, 1)] = c(0.0, 0.0);
        u[(0, 1)] = c(1.0, 0.0);
        u[(1, 0)] = c(1.0, 0.0);
        let h = hermitize(&CMatrix::from_fn(n, n, |i, j| c(((i * 7 + j * 3) % 11) as f64, ((i + j) % 5) as f64 - 2.0)));
        let q = expm_hermitian(&h, 0.37);
        let mut u = &q * u * q.adjoint();
        u[(5, 9)] += c(1e-80, 0.0);
        u[(9, 5)] += c(1e-80, 0.0);
        u[(20, 21)] += c(0.0, 3e-95);
        let (vals, v) = normal_eigen(&u);
        assert!(vals.iter().all(|z| z.is_finite()));
        let d = CMatrix::from_diagonal(&CVector::from_vec(vals));
        assert!(max_abs(&(&v * d * v.adjoint() - &u)) < 1e-10);
    }

    #[test]
    fn normal_eigen_reconstructs_unitary() {
        let h = CMatrix::from_fn(5, 5, |i, j| c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let h = hermitize(&h);
        let u = expm_hermitian(&h, 1.3);
        let (vals, q) = normal_eigen(&u);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vals));
        assert!(max_abs(&(&q * d * q.adjoint() - &u)) < 1e-12);
        assert!(unitarity_defect(&q) < 1e-13);
    }

    fn check_decomposition(u: &CMatrix, tol: f64) {
        let (vals, q) = normal_eigen(u);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vals));
        assert!(max_abs(&(&q * d * q.adjoint() - u)) < tol);
        assert!(unitarity_defect(&q) < tol);
    }

    #[test]
    fn normal_eigen_handles_degenerate_reflections() {
        // I − 2vv† has eigenvalue 1 with multiplicity n − 1.
        let n = 32;
        let v = CVector::from_fn(n, |i, _| c((0.3 * i as f64).cos(), (0.7 * i as f64).sin()));
        let v = &v / Complex64::new(v.norm(), 0.0);
        let r = CMatrix::identity(n, n) - (&v * v.adjoint()) * c(2.0, 0.0);
        check_decomposition(&r, 1e-12);
        check_decomposition(&(r * c(0.0, 1.0)), 1e-12);
        check_decomposition(&CMatrix::identity(n, n), 1e-15);
    }

    #[test]
    fn normal_eigen_separates_conjugate_pairs() {
        // Eigenvalues e^{±iθ} share a real part.
        let t = 0.9_f64;
        let rot = CMatrix::from_row_slice(2, 2, &[c(t.cos(), 0.), c(-t.sin(), 0.), c(t.sin(), 0.), c(t.cos(), 0.)]);
        let (vals, _) = normal_eigen(&rot);
        let mut args: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
        args.sort_by(f64::total_cmp);
        assert!((args[0] + t).abs() < 1e-14 && (args[1] - t).abs() < 1e-14);
        check_decomposition(&rot, 1e-14);
    }
}
