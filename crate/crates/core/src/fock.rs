// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space numerics: the space descriptor, pure and mixed
//! states, ladder and quadrature operators, and displacement operators from
//! their closed-form Laguerre matrix elements.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMatrix, CVector};
use crate::special::ln_factorial;

/// Tolerance on `‖ψ‖ − 1` accepted by [`QuantumState::new`].
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFockSpace")]
pub struct FockSpace {
    dim: usize,
    lambda: f64,
    pad: usize,
}

#[derive(Deserialize)]
struct RawFockSpace {
    dim: usize,
    lambda: f64,
    pad: usize,
}

impl TryFrom<RawFockSpace> for FockSpace {
    type Error = Error;
    fn try_from(raw: RawFockSpace) -> Result<Self> {
        if raw.dim.checked_add(raw.pad).is_none() {
            return Err(Error::param("pad", "dim + pad overflows"));
        }
        Ok(FockSpace::new(raw.dim, raw.lambda)?.with_pad(raw.pad))
    }
}

impl FockSpace {
    /// Space spanned by `|0⟩ … |dim−1⟩` with Planck-constant analog
    /// `lambda`. Padding defaults to `max(16, dim/2)` extra levels.
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", format!("must be ≥ 2, got {dim}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(FockSpace {
            dim,
            lambda,
            pad: (dim / 2).max(16),
        })
    }

    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn padded_dim(&self) -> usize {
        self.dim + self.pad
    }

    pub(crate) fn check_same(&self, other: &FockSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        for found in [m.nrows(), m.ncols()] {
            if found != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct QuantumState {
    space: FockSpace,
    #[serde(with = "io::cvector")]
    amplitudes: CVector,
}

#[derive(Deserialize)]
struct RawState {
    space: FockSpace,
    #[serde(with = "io::cvector")]
    amplitudes: CVector,
}

impl TryFrom<RawState> for QuantumState {
    type Error = Error;
    fn try_from(raw: RawState) -> Result<Self> {
        QuantumState::new(raw.space, raw.amplitudes)
    }
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized; anything off by more
    /// than [`NORM_TOL`] is rejected.
    pub fn new(space: FockSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(QuantumState { space, amplitudes })
    }

    /// Explicitly rescales `amplitudes` to unit norm.
    pub fn normalized(space: FockSpace, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        QuantumState::new(space, amplitudes.unscale(norm))
    }

    /// Result of a unitary evolution whose norm drift the caller has
    /// already bounded.
    pub(crate) fn from_evolution(space: FockSpace, amplitudes: CVector) -> Self {
        QuantumState { space, amplitudes }
    }

    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim() {
            return Err(Error::param("n", format!("Fock index {n} outside dim {}", space.dim())));
        }
        let mut v = CVector::zeros(space.dim());
        v[n] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            space,
            amplitudes: v,
        })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        QuantumState::fock(space, 0).expect("dim ≥ 2")
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &QuantumState) -> Result<Complex64> {
        self.space.check_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum()
    }

    /// Zero-pads the state into a larger space.
    pub fn embed(&self, space: FockSpace) -> Result<Self> {
        if space.dim() < self.space.dim() {
            return Err(Error::InsufficientDimension {
                dim: space.dim(),
                needed: self.space.dim(),
            });
        }
        let mut v = CVector::zeros(space.dim());
        v.rows_mut(0, self.space.dim()).copy_from(&self.amplitudes);
        Ok(QuantumState {
            space,
            amplitudes: v,
        })
    }

    pub fn to_density(&self) -> DensityState {
        DensityState {
            space: self.space,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity_state(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityState {
    space: FockSpace,
    #[serde(with = "io::cmatrix")]
    matrix: CMatrix,
}

impl DensityState {
    /// Validates Hermiticity (1e-10), unit trace (1e-8) and positivity
    /// (eigenvalues ≥ −1e-8).
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        space.check_matrix(&matrix)?;
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > 1e-10 {
            return Err(Error::param("rho", format!("not Hermitian (defect {herm:.2e})")));
        }
        let rho = DensityState { space, matrix };
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::param("rho", format!("trace {tr} ≠ 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -1e-8 {
            return Err(Error::param("rho", format!("negative eigenvalue {min_eig:.2e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(space: FockSpace, matrix: CMatrix) -> Self {
        DensityState { space, matrix }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (values, _) = linalg::hermitian_eigen(&linalg::hermitize(&self.matrix));
        values[0]
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_pure(&self, psi: &QuantumState) -> Result<f64> {
        self.space.check_same(psi.space())?;
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.matrix * v)[(0, 0)].re)
    }

    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        self.space.check_matrix(op)?;
        Ok((&self.matrix * op).trace())
    }

    pub fn mean_photon_number(&self) -> f64 {
        (0..self.space.dim())
            .map(|n| n as f64 * self.matrix[(n, n)].re)
            .sum()
    }
}

/// Operator on a [`FockSpace`], truncated to `dim × dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorMatrix {
    space: FockSpace,
    #[serde(with = "io::cmatrix")]
    matrix: CMatrix,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn new(space: FockSpace, matrix: CMatrix, hermitian: bool) -> Result<Self> {
        space.check_matrix(&matrix)?;
        if hermitian {
            let defect = linalg::hermiticity_defect(&matrix);
            if defect >= 1e-10 {
                return Err(Error::param(
                    "matrix",
                    format!("flagged Hermitian but ‖M − M†‖ = {defect:.2e}"),
                ));
            }
        }
        Ok(OperatorMatrix {
            space,
            matrix,
            hermitian,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            space: self.space,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }
}

fn annihilation(size: usize) -> CMatrix {
    let mut a = CMatrix::zeros(size, size);
    for n in 1..size {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `(â, â†)` on the truncated basis.
pub fn ladder_ops(space: &FockSpace) -> (OperatorMatrix, OperatorMatrix) {
    let a = annihilation(space.dim());
    let ad = a.adjoint();
    (
        OperatorMatrix {
            space: *space,
            matrix: a,
            hermitian: false,
        },
        OperatorMatrix {
            space: *space,
            matrix: ad,
            hermitian: false,
        },
    )
}

pub fn number_op(space: &FockSpace) -> OperatorMatrix {
    let m = CMatrix::from_diagonal(&CVector::from_fn(space.dim(), |n, _| {
        Complex64::new(n as f64, 0.0)
    }));
    OperatorMatrix {
        space: *space,
        matrix: m,
        hermitian: true,
    }
}

/// `x̂ = √(λ/2)(â† + â)`, `p̂ = i√(λ/2)(â† − â)`.
pub fn quadratures(space: &FockSpace) -> (OperatorMatrix, OperatorMatrix) {
    let s = (space.lambda() / 2.0).sqrt();
    let a = annihilation(space.dim());
    let ad = a.adjoint();
    let x = (&ad + &a).scale(s);
    let p = (&ad - &a) * Complex64::new(0.0, s);
    (
        OperatorMatrix {
            space: *space,
            matrix: x,
            hermitian: true,
        },
        OperatorMatrix {
            space: *space,
            matrix: p,
            hermitian: true,
        },
    )
}

/// Closed-form `⟨m|D(α)|n⟩` for `0 ≤ m, n < size`:
/// `√(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)` for `m ≥ n`, and the
/// mirrored expression with `−α*` otherwise. Magnitudes are combined in log
/// space so large `|α|` underflows cleanly to zero instead of producing
/// `inf · 0`.
pub fn displacement_matrix(size: usize, alpha: Complex64) -> CMatrix {
    let x = alpha.norm_sqr();
    let mut out = CMatrix::zeros(size, size);
    if x == 0.0 {
        return CMatrix::identity(size, size);
    }
    let ln_abs = alpha.norm().ln();
    let unit = alpha / alpha.norm();
    let unit_lower = unit; // m > n
    let unit_upper = -unit.conj(); // m < n
    for d in 0..size {
        let df = d as f64;
        let mut l_prev = 0.0;
        let mut l_cur = 1.0;
        let phase_lower = unit_lower.powu(d as u32);
        let phase_upper = unit_upper.powu(d as u32);
        for lo in 0..size - d {
            if lo == 1 {
                l_prev = 1.0;
                l_cur = 1.0 + df - x;
            } else if lo > 1 {
                let k = (lo - 1) as f64;
                let next = ((2.0 * k + 1.0 + df - x) * l_cur - (k + df) * l_prev) / (k + 1.0);
                l_prev = l_cur;
                l_cur = next;
            }
            let hi = lo + d;
            let log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + df * ln_abs - 0.5 * x;
            let mag = if log_mag < -745.0 { 0.0 } else { log_mag.exp() * l_cur };
            out[(hi, lo)] = phase_lower * mag;
            if d > 0 {
                out[(lo, hi)] = phase_upper * mag;
            }
        }
    }
    out
}

pub(crate) fn truncate(m: &CMatrix, dim: usize) -> CMatrix {
    m.view((0, 0), (dim, dim)).into_owned()
}

/// `D(α) = exp(α â† − α* â)`, built from closed-form elements in the
/// padded space and truncated to `dim`.
pub fn displacement(space: &FockSpace, alpha: Complex64) -> OperatorMatrix {
    let full = displacement_matrix(space.padded_dim(), alpha);
    OperatorMatrix {
        space: *space,
        matrix: truncate(&full, space.dim()),
        hermitian: false,
    }
}

/// Displacement amplitude equivalent to `exp(i(k_x x̂ + k_p p̂))`:
/// `α = i√(λ/2)(k_x + i k_p)`.
pub fn plane_wave_alpha(lambda: f64, kx: f64, kp: f64) -> Complex64 {
    Complex64::new(0.0, (lambda / 2.0).sqrt()) * Complex64::new(kx, kp)
}

/// `exp(i(k_x x̂ + k_p p̂))`.
pub fn plane_wave(space: &FockSpace, kx: f64, kp: f64) -> OperatorMatrix {
    displacement(space, plane_wave_alpha(space.lambda(), kx, kp))
}

/// Coherent state `D(α)|0⟩` restricted to the first `size` levels (exact
/// amplitudes `e^{−|α|²/2} αⁿ/√n!`, not renormalized).
pub fn coherent_amplitudes(size: usize, alpha: Complex64) -> CVector {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        let mut v = CVector::zeros(size);
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    let ln_abs = alpha.norm().ln();
    let unit = alpha / alpha.norm();
    CVector::from_fn(size, |n, _| {
        let log_mag = n as f64 * ln_abs - 0.5 * ln_factorial(n) - 0.5 * x;
        if log_mag < -745.0 {
            Complex64::new(0.0, 0.0)
        } else {
            unit.powu(n as u32) * log_mag.exp()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};

    fn space(dim: usize) -> FockSpace {
        FockSpace::new(dim, 1.0).unwrap()
    }

    #[test]
    fn ladder_dim2() {
        let (a, _) = ladder_ops(&space(2));
        let want = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(a.matrix(), &want);
    }

    #[test]
    fn creation_element_dim3() {
        let (_, ad) = ladder_ops(&space(3));
        assert!((ad.matrix()[(2, 1)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn commutator_corner_defect() {
        let s = space(16);
        let (a, ad) = ladder_ops(&s);
        let comm = a.matrix() * ad.matrix() - ad.matrix() * a.matrix();
        for i in 0..16 {
            for j in 0..16 {
                let want = match (i, j) {
                    (15, 15) => -15.0,
                    _ if i == j => 1.0,
                    _ => 0.0,
                };
                assert!((comm[(i, j)] - c(want, 0.)).norm() < 1e-13, "({i},{j})");
            }
        }
    }

    #[test]
    fn quadratures_dim2_and_scaling() {
        let (x, p) = quadratures(&space(2));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x.matrix()[(0, 1)].re - h).abs() < 1e-15);
        assert!((x.matrix()[(1, 0)].re - h).abs() < 1e-15);
        assert_eq!(linalg::hermiticity_defect(p.matrix()), 0.0);
        let (x2, _) = quadratures(&FockSpace::new(2, 2.0).unwrap());
        assert!((x2.matrix()[(0, 1)].re - 2f64.sqrt() * h).abs() < 1e-15);
    }

    #[test]
    fn canonical_commutator_interior() {
        let s = space(32);
        let (x, p) = quadratures(&s);
        let comm = x.matrix() * p.matrix() - p.matrix() * x.matrix();
        for i in 0..31 {
            for j in 0..31 {
                let want = if i == j { c(0., 1.) } else { c(0., 0.) };
                assert!((comm[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_vacuum_element_and_identity() {
        let s = space(12);
        let alpha = c(0.8, -0.4);
        let d = displacement(&s, alpha);
        let want = (-alpha.norm_sqr() / 2.0).exp();
        assert!((d.matrix()[(0, 0)] - c(want, 0.)).norm() < 1e-15);
        assert_eq!(displacement(&s, c(0., 0.)).matrix(), &CMatrix::identity(12, 12));
    }

    #[test]
    fn displacement_inverse_pair() {
        for &alpha in &[c(2.0, 0.0), c(0.3, -1.4), c(-1.2, 1.5)] {
            let big = displacement_matrix(120, alpha);
            let inv = displacement_matrix(120, -alpha);
            let prod = truncate(&(big * inv), 32);
            assert!(max_abs(&(prod - CMatrix::identity(32, 32))) < 1e-8, "alpha={alpha}");
        }
    }

    #[test]
    fn displacement_matches_series_exponential() {
        // exp(αâ† − α*â) via eigen-decomposition of the Hermitian generator
        // i(αâ† − α*â) in a large space.
        let n = 60;
        let alpha = c(0.9, 0.5);
        let a = annihilation(n);
        let gen = (a.adjoint() * alpha - &a * alpha.conj()) * c(0., 1.);
        let exact = linalg::expm_hermitian(&linalg::hermitize(&gen), 1.0);
        let closed = displacement_matrix(n, alpha);
        let diff = truncate(&(exact - closed), 20);
        assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn plane_wave_matches_displacement_and_vacuum_gaussian() {
        let s = space(24);
        let k = 1.7;
        let pw = plane_wave(&s, k, 0.0);
        let d = displacement(&s, c(0.0, k * (0.5f64).sqrt()));
        assert!(max_abs(&(pw.matrix() - d.matrix())) < 1e-15);
        assert!(max_abs(&(plane_wave(&s, 0.0, 0.0).matrix() - CMatrix::identity(24, 24))) == 0.0);
        for &lambda in &[0.5, 1.0, 2.0] {
            let s = FockSpace::new(24, lambda).unwrap();
            // Vacuum wavefunction |ψ(x)|² = e^{−x²/λ}/√(πλ); ⟨e^{ikx}⟩ by quadrature.
            let n = 4001;
            let h = 20.0 / (n - 1) as f64;
            let quad: f64 = (0..n)
                .map(|i| {
                    let x = -10.0 + i as f64 * h;
                    (k * x).cos() * (-x * x / lambda).exp() / (std::f64::consts::PI * lambda).sqrt()
                })
                .sum::<f64>()
                * h;
            let elem = plane_wave(&s, k, 0.0).matrix()[(0, 0)];
            assert!((elem.re - quad).abs() < 1e-12);
            assert!((quad - (-lambda * k * k / 4.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_unitarity_inner_block() {
        let d = displacement_matrix(120, c(1.5, 1.5));
        let inner = truncate(&(d.adjoint() * &d), 32);
        assert!(max_abs(&(inner - CMatrix::identity(32, 32))) < 1e-10);
        // Low-lying columns of the truncated operator are already orthonormal.
        let s = FockSpace::new(32, 1.0).unwrap();
        let small = displacement(&s, c(0.5, 0.2));
        let cols = small.matrix().columns(0, 8).into_owned();
        assert!(max_abs(&(cols.adjoint() * &cols - CMatrix::identity(8, 8))) < 1e-10);
    }

    #[test]
    fn fidelity_cases() {
        let s = space(32);
        let a = QuantumState::fock(s, 3).unwrap();
        assert_eq!(fidelity_state(&a, &a).unwrap(), 1.0);
        let b = QuantumState::fock(s, 4).unwrap();
        assert_eq!(fidelity_state(&a, &b).unwrap(), 0.0);
        let coh = QuantumState::normalized(s, displacement(&s, c(1.0, 0.0)).matrix().column(0).into_owned())
            .unwrap();
        let f = fidelity_state(&QuantumState::vacuum(s), &coh).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-6);
        let other = QuantumState::vacuum(space(8));
        assert!(matches!(fidelity_state(&a, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn state_validation() {
        let s = space(4);
        let v = CVector::from_element(4, c(1.0, 0.0));
        assert!(matches!(QuantumState::new(s, v.clone()), Err(Error::NotNormalized { .. })));
        let st = QuantumState::normalized(s, v).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-15);
        assert!(QuantumState::normalized(s, CVector::zeros(4)).is_err());
        assert!(FockSpace::new(1, 1.0).is_err());
        assert!(FockSpace::new(4, 0.0).is_err());
    }

    #[test]
    fn coherent_amplitudes_match_displacement_column() {
        let alpha = c(-1.1, 0.7);
        let v = coherent_amplitudes(30, alpha);
        let d = displacement_matrix(30, alpha);
        for n in 0..30 {
            assert!((v[n] - d[(n, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn huge_displacement_underflows_cleanly() {
        let d = displacement_matrix(96, c(0.0, 40.0 * 0.5f64.sqrt()));
        assert!(d.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}
