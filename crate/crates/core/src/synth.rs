// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Unitary synthesis: Householder state maps, principal-branch generators
//! and logical-gate embeddings.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, OperatorMatrix, QuantumState};
use crate::io;
use crate::linalg::{self, CMatrix, CVector};

/// Unitarity tolerance accepted by [`TargetUnitary::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Eigenphases within this distance of `±π` are flagged.
pub const BRANCH_CUT_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUnitary")]
pub struct TargetUnitary {
    space: FockSpace,
    #[serde(with = "io::cmatrix")]
    matrix: CMatrix,
}

#[derive(Deserialize)]
struct RawUnitary {
    space: FockSpace,
    #[serde(with = "io::cmatrix")]
    matrix: CMatrix,
}

impl TryFrom<RawUnitary> for TargetUnitary {
    type Error = Error;
    fn try_from(r: RawUnitary) -> Result<Self> {
        TargetUnitary::new(r.space, r.matrix)
    }
}

impl TargetUnitary {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        space.check_matrix(&matrix)?;
        let defect = linalg::unitarity_defect(&matrix);
        if !(defect < UNITARY_TOL) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(TargetUnitary { space, matrix })
    }

    /// Wraps a product of unitaries whose accumulated rounding may exceed
    /// [`UNITARY_TOL`]; the caller checks the defect it cares about.
    pub(crate) fn from_product(space: FockSpace, matrix: CMatrix) -> Self {
        TargetUnitary { space, matrix }
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

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<QuantumState> {
        self.space.check_same(psi.space())?;
        QuantumState::new(self.space, &self.matrix * psi.amplitudes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("unitary serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Unitary mapping `psi0` onto `psi_tar`:
/// `U = [I + (e^{−iφ}−1)|ψ_tar⟩⟨ψ_tar|](I − 2|u⟩⟨u|)` with
/// `e^{iφ} = r/|r|`, `r = ⟨ψ_tar|ψ_0⟩`, `u ∝ ψ_0 − e^{iφ}ψ_tar`.
/// Collinear inputs reduce to the rank-one phase `I + (e^{iθ}−1)|ψ_0⟩⟨ψ_0|`.
pub fn householder_unitary(psi0: &QuantumState, psi_tar: &QuantumState) -> Result<TargetUnitary> {
    let space = *psi0.space();
    space.check_same(psi_tar.space())?;
    let (a, b) = (psi0.amplitudes(), psi_tar.amplitudes());
    let dim = space.dim();
    let eye = CMatrix::identity(dim, dim);
    let r = b.dotc(a);
    if 1.0 - r.norm() < 1e-14 {
        let phase = r.conj() / r.norm();
        let u = &eye + outer(a, a) * (phase - 1.0);
        return Ok(TargetUnitary { space, matrix: u });
    }
    let e_phi = if r.norm() > 0.0 { r / r.norm() } else { Complex64::new(1.0, 0.0) };
    let v = a - b * e_phi;
    let u = v.unscale(v.norm());
    let reflect = &eye - outer(&u, &u) * Complex64::new(2.0, 0.0);
    let fix = &eye + outer(b, b) * (e_phi.conj() - 1.0);
    Ok(TargetUnitary {
        space,
        matrix: fix * reflect,
    })
}

/// Hermitian generator with `exp(−iHT/λ) = U`.
#[derive(Debug, Clone)]
pub struct PrincipalHamiltonian {
    pub hamiltonian: OperatorMatrix,
    /// Principal eigenphases of `HT/λ`, in `(−π, π]`.
    pub eigenphases: Vec<f64>,
    /// Set when an eigenphase lies within [`BRANCH_CUT_MARGIN`] of `π`; the
    /// generator is then still principal but sensitive to rounding.
    pub near_branch_cut: bool,
}

/// `H = iλ log(U)/T` on the principal branch.
pub fn principal_hamiltonian(u: &TargetUnitary, t: f64) -> Result<PrincipalHamiltonian> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("T", format!("must be positive, got {t}")));
    }
    let space = *u.space();
    let (values, vectors) = linalg::normal_eigen(u.matrix());
    let eigenphases: Vec<f64> = values
        .iter()
        .map(|z| {
            let theta = -z.arg();
            if theta <= -PI { theta + 2.0 * PI } else { theta }
        })
        .collect();
    let near_branch_cut = eigenphases.iter().any(|th| th.abs() > PI - BRANCH_CUT_MARGIN);
    let scale = space.lambda() / t;
    let h = linalg::spectral_apply(&eigenphases, &vectors, |th| Complex64::new(scale * th, 0.0));
    let hamiltonian = OperatorMatrix::new(space, linalg::hermitize(&h), true)?;
    Ok(PrincipalHamiltonian {
        hamiltonian,
        eigenphases,
        near_branch_cut,
    })
}

/// Orthonormalized code basis `Q = C G^{−1/2}`, `G = C†C`, and projector
/// `P = QQ†`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalEmbedding {
    space: FockSpace,
    #[serde(with = "io::cmatrix")]
    q: CMatrix,
    #[serde(with = "io::cmatrix")]
    projector: CMatrix,
    gram_min_eigenvalue: f64,
}

impl LogicalEmbedding {
    pub fn from_codewords(zero: &QuantumState, one: &QuantumState) -> Result<Self> {
        let space = *zero.space();
        space.check_same(one.space())?;
        let c = CMatrix::from_columns(&[zero.amplitudes().clone(), one.amplitudes().clone()]);
        let gram = c.adjoint() * &c;
        let (values, vectors) = linalg::hermitian_eigen(&linalg::hermitize(&gram));
        if values[0] < 1e-8 {
            return Err(Error::DegenerateGram {
                min_eigenvalue: values[0],
            });
        }
        let inv_sqrt = linalg::spectral_apply(&values, &vectors, |e| Complex64::new(e.sqrt().recip(), 0.0));
        let q = c * inv_sqrt;
        let projector = &q * q.adjoint();
        Ok(LogicalEmbedding {
            space,
            q,
            projector,
            gram_min_eigenvalue: values[0],
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// `dim × 2` orthonormal basis of the code space.
    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    pub fn gram_min_eigenvalue(&self) -> f64 {
        self.gram_min_eigenvalue
    }

    /// `Q† M Q`.
    pub fn restrict(&self, m: &CMatrix) -> Result<CMatrix> {
        self.space.check_matrix(m)?;
        Ok(self.q.adjoint() * m * &self.q)
    }
}

fn check_2x2_unitary(m: &CMatrix) -> Result<()> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.nrows().max(m.ncols()),
        });
    }
    let defect = linalg::unitarity_defect(m);
    if !(defect < UNITARY_TOL) {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// `U = Q U_L Q† + (I − P)`: acts as `U_L` on the code space and as the
/// identity on its complement.
pub fn embed_logical_gate(embedding: &LogicalEmbedding, ul: &CMatrix) -> Result<TargetUnitary> {
    check_2x2_unitary(ul)?;
    let dim = embedding.space.dim();
    let q = &embedding.q;
    let m = q * ul * q.adjoint() + CMatrix::identity(dim, dim) - &embedding.projector;
    TargetUnitary::new(embedding.space, m)
}

/// Average gate fidelity `(|Tr(G_tar† G_eff)|² + 2)/6` on a qubit.
pub fn gate_fidelity(g_tar: &CMatrix, g_eff: &CMatrix) -> f64 {
    let overlap = (g_tar.adjoint() * g_eff).trace();
    (overlap.norm_sqr() + 2.0) / 6.0
}

/// Named single-qubit gates, as their determinant-one representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedGate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
}

impl NamedGate {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "I" => NamedGate::I,
            "X" => NamedGate::X,
            "Y" => NamedGate::Y,
            "Z" => NamedGate::Z,
            "H" => NamedGate::H,
            "S" => NamedGate::S,
            "T" => NamedGate::T,
            _ => return None,
        })
    }

    pub fn matrix(self) -> CMatrix {
        let c = |re, im| Complex64::new(re, im);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b, cc, d) = match self {
            NamedGate::I => (c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)),
            NamedGate::X => (c(0., 0.), c(0., -1.), c(0., -1.), c(0., 0.)),
            NamedGate::Y => (c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)),
            NamedGate::Z => (c(0., -1.), c(0., 0.), c(0., 0.), c(0., 1.)),
            NamedGate::H => (c(0., -h), c(0., -h), c(0., -h), c(0., h)),
            NamedGate::S => (
                Complex64::from_polar(1.0, -PI / 4.0),
                c(0., 0.),
                c(0., 0.),
                Complex64::from_polar(1.0, PI / 4.0),
            ),
            NamedGate::T => (
                Complex64::from_polar(1.0, -PI / 8.0),
                c(0., 0.),
                c(0., 0.),
                Complex64::from_polar(1.0, PI / 8.0),
            ),
        };
        CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
    }
}

/// Haar-random element of SU(2) from a uniformly random unit quaternion.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let mut q = [0.0f64; 4];
    loop {
        for x in q.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            q.iter_mut().for_each(|x| *x /= n);
            break;
        }
    }
    let a = Complex64::new(q[0], q[1]);
    let b = Complex64::new(q[2], q[3]);
    CMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::{c, max_abs};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(dim: usize) -> FockSpace {
        FockSpace::new(dim, 1.0).unwrap()
    }

    fn random_state(space: FockSpace, seed: u64) -> QuantumState {
        haar::sample_haar_state(space, space.dim(), seed, 0).unwrap()
    }

    #[test]
    fn householder_identity_when_equal() {
        let s = space(6);
        let psi = random_state(s, 3);
        let u = householder_unitary(&psi, &psi).unwrap();
        assert!(max_abs(&(u.matrix() - CMatrix::identity(6, 6))) < 1e-14);
    }

    #[test]
    fn householder_orthogonal_pair() {
        let s = space(8);
        let zero = QuantumState::fock(s, 0).unwrap();
        let one = QuantumState::fock(s, 1).unwrap();
        let u = householder_unitary(&zero, &one).unwrap();
        assert!((u.apply(&zero).unwrap().amplitudes() - one.amplitudes()).norm() < 1e-15);
        let mut phase = None;
        for n in 2..8 {
            let col = u.matrix().column(n);
            let z = col[n];
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((col.norm() - 1.0).abs() < 1e-14);
            let p = *phase.get_or_insert(z);
            assert!((z - p).norm() < 1e-14);
        }
    }

    #[test]
    fn householder_collinear_phase() {
        let s = space(5);
        let psi = random_state(s, 11);
        let w = Complex64::from_polar(1.0, 0.7);
        let tar = QuantumState::new(s, psi.amplitudes() * w).unwrap();
        let u = householder_unitary(&psi, &tar).unwrap();
        assert!((u.apply(&psi).unwrap().amplitudes() - tar.amplitudes()).norm() < 1e-14);
        assert!(u.unitarity_defect() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn householder_generic_pairs(seed in any::<u64>()) {
            let s = space(32);
            let a = haar::sample_haar_state(s, 32, seed, 0).unwrap();
            let b = haar::sample_haar_state(s, 32, seed, 1).unwrap();
            let u = householder_unitary(&a, &b).unwrap();
            let mapped = u.matrix() * a.amplitudes();
            prop_assert!((mapped - b.amplitudes()).norm() < 1e-12);
            prop_assert!(u.unitarity_defect() < 1e-12);
            // Fixes the orthogonal complement of span{a, b} up to one phase.
            let basis = CMatrix::from_columns(&[a.amplitudes().clone(), b.amplitudes().clone()]);
            let q = basis.qr().q();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut phase: Option<Complex64> = None;
            for _ in 0..3 {
                let g = haar::gaussian_vector(32, &mut rng);
                let w = &g - &q * (q.adjoint() * &g);
                let w = w.unscale(w.norm());
                let uw = u.matrix() * &w;
                let z = w.dotc(&uw);
                prop_assert!((uw - &w * z).norm() < 1e-12);
                let p = *phase.get_or_insert(z);
                prop_assert!((z - p).norm() < 1e-12);
            }
        }

        #[test]
        fn principal_log_round_trip(seed in any::<u64>()) {
            let s = space(8);
            let mut rng = haar::sample_rng(seed, 0);
            let u = TargetUnitary::new(s, haar::haar_unitary(8, &mut rng)).unwrap();
            let t = 2.0 * PI;
            let ph = principal_hamiltonian(&u, t).unwrap();
            let back = linalg::expm_hermitian(ph.hamiltonian.matrix(), t / s.lambda());
            prop_assert!(max_abs(&(back - u.matrix())) < 1e-9);
            prop_assert!(ph.eigenphases.iter().all(|&th| th > -PI && th <= PI));
        }

        #[test]
        fn gate_fidelity_invariances(seed in any::<u64>(), phi in -PI..PI, psi in -PI..PI) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_su2(&mut rng);
            let b = random_su2(&mut rng);
            let v = random_su2(&mut rng);
            let f = gate_fidelity(&a, &b);
            let pa = &a * Complex64::from_polar(1.0, phi);
            let pb = &b * Complex64::from_polar(1.0, psi);
            prop_assert!((gate_fidelity(&pa, &pb) - f).abs() < 1e-12);
            let va = &v * &a * v.adjoint();
            let vb = &v * &b * v.adjoint();
            prop_assert!((gate_fidelity(&va, &vb) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn principal_trivial_cases() {
        let s = space(4);
        let t = 2.0 * PI;
        let id = TargetUnitary::new(s, CMatrix::identity(4, 4)).unwrap();
        let ph = principal_hamiltonian(&id, t).unwrap();
        assert!(max_abs(ph.hamiltonian.matrix()) < 1e-15);
        assert!(!ph.near_branch_cut);
        let scalar = TargetUnitary::new(s, CMatrix::identity(4, 4) * c(0., -1.)).unwrap();
        let ph = principal_hamiltonian(&scalar, t).unwrap();
        let want = CMatrix::identity(4, 4) * c(PI / 2.0 / t, 0.);
        assert!(max_abs(&(ph.hamiltonian.matrix() - want)) < 1e-14);
    }

    #[test]
    fn branch_cut_is_flagged() {
        let s = space(3);
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(-1., 0.), c(1., 0.), c(0., 1.)]));
        let ph = principal_hamiltonian(&TargetUnitary::new(s, m).unwrap(), 1.0).unwrap();
        assert!(ph.near_branch_cut);
        assert!(ph.eigenphases.contains(&PI));
    }

    #[test]
    fn principal_reextraction_is_stable() {
        let s = space(6);
        let mut rng = haar::sample_rng(99, 0);
        let u = TargetUnitary::new(s, haar::haar_unitary(6, &mut rng)).unwrap();
        let h1 = principal_hamiltonian(&u, 1.0).unwrap();
        assert!(h1.eigenphases.iter().all(|th| th.abs() < PI - 1e-6));
        let u2 = TargetUnitary::new(s, linalg::expm_hermitian(h1.hamiltonian.matrix(), 1.0)).unwrap();
        let h2 = principal_hamiltonian(&u2, 1.0).unwrap();
        assert!(max_abs(&(h1.hamiltonian.matrix() - h2.hamiltonian.matrix())) < 1e-9);
    }

    #[test]
    fn unitary_json_round_trip_and_rejection() {
        let s = space(3);
        let mut rng = haar::sample_rng(5, 2);
        let u = TargetUnitary::new(s, haar::haar_unitary(3, &mut rng)).unwrap();
        assert_eq!(TargetUnitary::from_json(&u.to_json()).unwrap(), u);
        let bad = r#"{"space":{"dim":2,"lambda":1.0,"pad":16},"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(TargetUnitary::from_json(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn embedding_of_fock_pair() {
        let s = space(6);
        let zero = QuantumState::fock(s, 0).unwrap();
        let one = QuantumState::fock(s, 3).unwrap();
        let emb = LogicalEmbedding::from_codewords(&zero, &one).unwrap();
        let u = embed_logical_gate(&emb, &CMatrix::identity(2, 2)).unwrap();
        assert!(max_abs(&(u.matrix() - CMatrix::identity(6, 6))) < 1e-15);
        let x = NamedGate::X.matrix();
        let ux = embed_logical_gate(&emb, &x).unwrap();
        assert!(max_abs(&(emb.restrict(ux.matrix()).unwrap() - &x)) < 1e-12);
        let p = emb.projector();
        assert!(max_abs(&(p * p - p)) < 1e-12);
    }

    #[test]
    fn degenerate_codewords_rejected() {
        let s = space(4);
        let zero = QuantumState::fock(s, 1).unwrap();
        assert!(matches!(
            LogicalEmbedding::from_codewords(&zero, &zero),
            Err(Error::DegenerateGram { .. })
        ));
    }

    #[test]
    fn gate_fidelity_trivial_values() {
        let h = NamedGate::H.matrix();
        assert!((gate_fidelity(&h, &h) - 1.0).abs() < 1e-15);
        let z = CMatrix::zeros(2, 2);
        assert!((gate_fidelity(&h, &z) - 1.0 / 3.0).abs() < 1e-15);
        let ph = &h * Complex64::from_polar(1.0, 1.234);
        assert!((gate_fidelity(&h, &ph) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn named_gates_are_special_unitary() {
        for g in [NamedGate::I, NamedGate::X, NamedGate::Y, NamedGate::Z, NamedGate::H, NamedGate::S, NamedGate::T] {
            let m = g.matrix();
            assert!(linalg::unitarity_defect(&m) < 1e-15, "{g:?}");
            assert!((m.determinant() - c(1., 0.)).norm() < 1e-15, "{g:?}");
        }
        assert_eq!(NamedGate::parse("h"), Some(NamedGate::H));
        assert_eq!(NamedGate::parse("cnot"), None);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_su2(&mut rng);
        assert!((r.determinant() - c(1., 0.)).norm() < 1e-14);
    }
}
