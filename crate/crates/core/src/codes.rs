// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Bosonic codewords (binomial, four-component cat, finite-energy GKP) and
//! Knill–Laflamme diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, OperatorMatrix, QuantumState};
use crate::io;
use crate::linalg::{CMatrix, CVector};
use crate::synth::{self, LogicalEmbedding, TargetUnitary};

/// Second sweet spot of the four-component cat code.
pub const CAT_ALPHA: f64 = 2.3447;
pub const GKP_SIGMA: f64 = 0.35;
pub const GKP_N_RANGE: usize = 5;

/// Norm weight allowed outside the truncated space for cat codewords.
const CAT_LEAKAGE_TOL: f64 = 1e-8;
/// GKP codewords carry a slowly decaying Fock tail; at σ = 0.35 about
/// 5e-4 of the weight lies beyond 32 levels.
pub const GKP_LEAKAGE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Binomial,
    Cat,
    Gkp,
}

impl CodeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binomial" => Some(CodeKind::Binomial),
            "cat" => Some(CodeKind::Cat),
            "gkp" => Some(CodeKind::Gkp),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Binomial => "binomial",
            CodeKind::Cat => "cat",
            CodeKind::Gkp => "gkp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub n_range: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CodeSpec {
    kind: CodeKind,
    params: CodeParams,
    zero: QuantumState,
    one: QuantumState,
    embedding: LogicalEmbedding,
}

impl CodeSpec {
    fn assemble(kind: CodeKind, params: CodeParams, zero: QuantumState, one: QuantumState) -> Result<Self> {
        let embedding = LogicalEmbedding::from_codewords(&zero, &one)?;
        Ok(CodeSpec {
            kind,
            params,
            zero,
            one,
            embedding,
        })
    }

    /// Default construction for `kind`.
    pub fn build(kind: CodeKind, space: FockSpace) -> Result<Self> {
        match kind {
            CodeKind::Binomial => binomial_code(space),
            CodeKind::Cat => cat_code(space, CAT_ALPHA),
            CodeKind::Gkp => gkp_code(space, GKP_SIGMA, GKP_N_RANGE),
        }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn space(&self) -> &FockSpace {
        self.zero.space()
    }

    pub fn zero(&self) -> &QuantumState {
        &self.zero
    }

    pub fn one(&self) -> &QuantumState {
        &self.one
    }

    pub fn embedding(&self) -> &LogicalEmbedding {
        &self.embedding
    }

    pub fn embed_gate(&self, ul: &CMatrix) -> Result<TargetUnitary> {
        synth::embed_logical_gate(&self.embedding, ul)
    }

    /// CSV `n,zero_re,zero_im,one_re,one_im`.
    pub fn amplitudes_csv(&self) -> String {
        let (z, o) = (self.zero.amplitudes(), self.one.amplitudes());
        let rows = (0..z.len()).map(|n| [n as f64, z[n].re, z[n].im, o[n].re, o[n].im]);
        io::csv_string(&["n", "zero_re", "zero_im", "one_re", "one_im"], rows)
    }
}

/// `|0̄⟩ = (|0⟩ + √3|4⟩)/2`, `|1̄⟩ = (√3|2⟩ + |6⟩)/2`.
pub fn binomial_code(space: FockSpace) -> Result<CodeSpec> {
    if space.dim() < 7 {
        return Err(Error::InsufficientDimension {
            dim: space.dim(),
            needed: 7,
        });
    }
    let r3 = 3f64.sqrt() / 2.0;
    let mut z = CVector::zeros(space.dim());
    z[0] = Complex64::new(0.5, 0.0);
    z[4] = Complex64::new(r3, 0.0);
    let mut o = CVector::zeros(space.dim());
    o[2] = Complex64::new(r3, 0.0);
    o[6] = Complex64::new(0.5, 0.0);
    CodeSpec::assemble(
        CodeKind::Binomial,
        CodeParams {
            alpha: None,
            sigma: None,
            n_range: None,
        },
        QuantumState::new(space, z)?,
        QuantumState::new(space, o)?,
    )
}

/// `D(β)|0⟩` on the padded space (exact coherent amplitudes).
fn coherent(space: &FockSpace, beta: Complex64) -> CVector {
    fock::displacement_matrix(space.padded_dim(), beta).column(0).into_owned()
}

/// Truncates a padded-space vector to `space`, failing if more than
/// `tol` of its weight lies beyond the cutoff.
fn truncate_checked(space: FockSpace, v: &CVector, tol: f64) -> Result<QuantumState> {
    let total = v.norm_squared();
    let inside = v.rows(0, space.dim()).norm_squared();
    if total - inside > tol * total {
        let mut acc = 0.0;
        let needed = v
            .iter()
            .position(|z| {
                acc += z.norm_sqr();
                total - acc <= tol * total
            })
            .map_or(v.len() + 1, |n| n + 1);
        return Err(Error::InsufficientDimension {
            dim: space.dim(),
            needed,
        });
    }
    QuantumState::normalized(space, v.rows(0, space.dim()).into_owned())
}

/// `N_m = 8e^{−α²}[cosh α² + (−1)^m cos α²]`, the squared norm of the
/// unnormalized four-component superposition.
pub fn cat_norm_squared(alpha: f64, m: usize) -> f64 {
    let a2 = alpha * alpha;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    8.0 * (-a2).exp() * (a2.cosh() + sign * a2.cos())
}

/// Unnormalized `|α⟩ + |−α⟩ ± (|iα⟩ + |−iα⟩)` on the padded space.
pub fn cat_superposition(space: &FockSpace, alpha: f64, m: usize) -> CVector {
    let sign = Complex64::new(if m.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    let a = Complex64::new(alpha, 0.0);
    let ia = Complex64::new(0.0, alpha);
    coherent(space, a) + coherent(space, -a) + (coherent(space, ia) + coherent(space, -ia)) * sign
}

/// Four-component cat code; `|0̄⟩` is supported on `n ≡ 0 (mod 4)` and
/// `|1̄⟩` on `n ≡ 2 (mod 4)`.
pub fn cat_code(space: FockSpace, alpha: f64) -> Result<CodeSpec> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    let needed = (alpha * alpha + 6.0 * alpha + 10.0).ceil() as usize;
    if space.dim() < needed {
        return Err(Error::InsufficientDimension {
            dim: space.dim(),
            needed,
        });
    }
    let zero = truncate_checked(space, &cat_superposition(&space, alpha, 0), CAT_LEAKAGE_TOL)?;
    let one = truncate_checked(space, &cat_superposition(&space, alpha, 1), CAT_LEAKAGE_TOL)?;
    CodeSpec::assemble(
        CodeKind::Cat,
        CodeParams {
            alpha: Some(alpha),
            sigma: None,
            n_range: None,
        },
        zero,
        one,
    )
}

/// Unnormalized finite-energy GKP codeword on the padded space:
/// `Σ e^{−σ²|K|²} e^{−i Re K Im K} D(K)|0⟩` over
/// `K = √(π/2)(2n₁+μ) + i√(π/2)n₂`, `n₁, n₂ ∈ [−n_range, n_range]`.
pub fn gkp_superposition(space: &FockSpace, sigma: f64, n_range: usize, mu: usize) -> CVector {
    let s = (PI / 2.0).sqrt();
    let r = n_range as i64;
    let mut v = CVector::zeros(space.padded_dim());
    for n1 in -r..=r {
        for n2 in -r..=r {
            let k = Complex64::new(s * (2 * n1 + mu as i64) as f64, s * n2 as f64);
            let weight = (-sigma * sigma * k.norm_sqr()).exp();
            let phase = Complex64::from_polar(weight, -k.re * k.im);
            v += coherent(space, k) * phase;
        }
    }
    v
}

pub fn gkp_code(space: FockSpace, sigma: f64, n_range: usize) -> Result<CodeSpec> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::param("sigma", format!("must lie in (0, 1], got {sigma}")));
    }
    if n_range < 3 {
        return Err(Error::param("n_range", format!("must be ≥ 3, got {n_range}")));
    }
    let zero = truncate_checked(space, &gkp_superposition(&space, sigma, n_range, 0), GKP_LEAKAGE_TOL)?;
    let one = truncate_checked(space, &gkp_superposition(&space, sigma, n_range, 1), GKP_LEAKAGE_TOL)?;
    CodeSpec::assemble(
        CodeKind::Gkp,
        CodeParams {
            alpha: None,
            sigma: Some(sigma),
            n_range: Some(n_range),
        },
        zero,
        one,
    )
}

/// Knill–Laflamme deviations over all error pairs `(ε_k, ε_l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlReport {
    /// `max |⟨0̄|ε_k†ε_l|0̄⟩ − ⟨1̄|ε_k†ε_l|1̄⟩|`.
    pub diagonal: f64,
    /// `max |⟨0̄|ε_k†ε_l|1̄⟩|`.
    pub off_diagonal: f64,
}

pub fn kl_check_states(zero: &QuantumState, one: &QuantumState, errors: &[OperatorMatrix]) -> Result<KlReport> {
    zero.space().check_same(one.space())?;
    for e in errors {
        zero.space().check_same(e.space())?;
    }
    let applied0: Vec<CVector> = errors.iter().map(|e| e.matrix() * zero.amplitudes()).collect();
    let applied1: Vec<CVector> = errors.iter().map(|e| e.matrix() * one.amplitudes()).collect();
    let mut report = KlReport {
        diagonal: 0.0,
        off_diagonal: 0.0,
    };
    for k in 0..errors.len() {
        for l in 0..errors.len() {
            let d00 = applied0[k].dotc(&applied0[l]);
            let d11 = applied1[k].dotc(&applied1[l]);
            let d01 = applied0[k].dotc(&applied1[l]);
            report.diagonal = report.diagonal.max((d00 - d11).norm());
            report.off_diagonal = report.off_diagonal.max(d01.norm());
        }
    }
    Ok(report)
}

pub fn kl_check(code: &CodeSpec, errors: &[OperatorMatrix]) -> Result<KlReport> {
    kl_check_states(&code.zero, &code.one, errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn space(dim: usize) -> FockSpace {
        FockSpace::new(dim, 1.0).unwrap()
    }

    fn identity_and_loss(s: &FockSpace) -> Vec<OperatorMatrix> {
        let id = OperatorMatrix::new(*s, CMatrix::identity(s.dim(), s.dim()), true).unwrap();
        let (a, _) = fock::ladder_ops(s);
        vec![id, a]
    }

    #[test]
    fn binomial_amplitudes_and_photon_number() {
        let code = binomial_code(space(8)).unwrap();
        assert_eq!(code.zero().amplitudes()[4].re, 3f64.sqrt() / 2.0);
        assert_eq!(code.zero().overlap(code.one()).unwrap().norm(), 0.0);
        assert!((code.zero().mean_photon_number() - 3.0).abs() < 1e-15);
        assert!((code.one().mean_photon_number() - 3.0).abs() < 1e-15);
        assert!(matches!(binomial_code(space(6)), Err(Error::InsufficientDimension { .. })));
    }

    #[test]
    fn binomial_kl_diagonal_exact() {
        let s = space(10);
        let code = binomial_code(s).unwrap();
        let r = kl_check(&code, &identity_and_loss(&s)).unwrap();
        assert!(r.diagonal < 1e-15, "{r:?}");
        assert!(r.off_diagonal < 1e-15);
    }

    #[test]
    fn fock_pair_kl_values() {
        let s = space(4);
        let zero = QuantumState::fock(s, 0).unwrap();
        let one = QuantumState::fock(s, 1).unwrap();
        let (a, _) = fock::ladder_ops(&s);
        let r = kl_check_states(&zero, &one, &[a]).unwrap();
        assert_eq!(r.off_diagonal, 0.0);
        assert!((r.diagonal - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cat_mod_four_support() {
        let code = cat_code(space(32), CAT_ALPHA).unwrap();
        for (n, (z, o)) in code.zero().amplitudes().iter().zip(code.one().amplitudes()).enumerate() {
            if n % 4 != 0 {
                assert!(z.norm() < 1e-10, "zero n={n}");
            }
            if n % 4 != 2 {
                assert!(o.norm() < 1e-10, "one n={n}");
            }
        }
    }

    #[test]
    fn cat_norm_formula() {
        let s = FockSpace::new(32, 1.0).unwrap().with_pad(64);
        for m in 0..2 {
            let v = cat_superposition(&s, CAT_ALPHA, m);
            assert!((v.norm() - cat_norm_squared(CAT_ALPHA, m).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_sweet_spot() {
        let s = space(32);
        let code = cat_code(s, CAT_ALPHA).unwrap();
        let r = kl_check(&code, &identity_and_loss(&s)).unwrap();
        assert!(r.diagonal < 1e-3, "{r:?}");
        let a2 = CAT_ALPHA * CAT_ALPHA;
        assert!((a2.tan() + a2.tanh()).abs() < 1e-3);
    }

    #[test]
    fn cat_requires_room() {
        assert!(matches!(cat_code(space(20), CAT_ALPHA), Err(Error::InsufficientDimension { .. })));
    }

    #[test]
    fn rotational_symmetry() {
        let s = space(32);
        let quarter = CVector::from_fn(32, |n, _| Complex64::from_polar(1.0, PI / 2.0 * n as f64));
        let check = |psi: &QuantumState| {
            let rotated = psi.amplitudes().component_mul(&quarter);
            let ov = psi.amplitudes().dotc(&rotated);
            assert!((ov.norm() - 1.0).abs() < 1e-10);
        };
        let cat = cat_code(s, CAT_ALPHA).unwrap();
        check(cat.zero());
        check(cat.one());
        check(binomial_code(s).unwrap().zero());
    }

    #[test]
    fn gkp_overlap_and_orthonormal_basis() {
        let code = gkp_code(space(32), GKP_SIGMA, GKP_N_RANGE).unwrap();
        let bound = 1.5 * (-PI / (4.0 * GKP_SIGMA * GKP_SIGMA)).exp();
        let ov = code.zero().overlap(code.one()).unwrap().norm();
        assert!(ov <= bound, "{ov} > {bound}");
        let q = code.embedding().q();
        assert!(max_abs(&(q.adjoint() * q - CMatrix::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn gkp_grid_convergence() {
        let s = space(32);
        let diff = |r1: usize, r2: usize| {
            let a = gkp_code(s, GKP_SIGMA, r1).unwrap();
            let b = gkp_code(s, GKP_SIGMA, r2).unwrap();
            let z = (a.zero().amplitudes() - b.zero().amplitudes()).norm();
            let o = (a.one().amplitudes() - b.one().amplitudes()).norm();
            z.max(o)
        };
        // The n₂ = ±4 shell still carries weight e^{−σ²·8π} ≈ 0.05.
        assert!(diff(3, 8) > 1e-2);
        assert!(diff(5, 8) < 1e-5);
        assert!(diff(6, 8) < 1e-8);
    }

    #[test]
    fn gkp_rejects_small_space_and_bad_params() {
        assert!(matches!(gkp_code(space(6), GKP_SIGMA, 5), Err(Error::InsufficientDimension { .. })));
        assert!(gkp_code(space(32), 0.0, 5).is_err());
        assert!(gkp_code(space(32), GKP_SIGMA, 2).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let s = space(32);
        let a = gkp_code(s, GKP_SIGMA, 5).unwrap();
        let b = gkp_code(s, GKP_SIGMA, 5).unwrap();
        assert_eq!(a.zero(), b.zero());
        assert_eq!(a.one(), b.one());
    }

    #[test]
    fn binomial_pauli_x_maps_codewords() {
        let code = binomial_code(space(10)).unwrap();
        let x = synth::NamedGate::X.matrix();
        let u = code.embed_gate(&x).unwrap();
        let mapped = u.matrix() * code.zero().amplitudes();
        // The determinant-one X carries a −i phase.
        let ov = code.one().amplitudes().dotc(&mapped);
        assert!((ov.norm() - 1.0).abs() < 1e-12);
        assert!((mapped - code.one().amplitudes() * ov).norm() < 1e-12);
    }

    #[test]
    fn amplitudes_csv_shape() {
        let code = binomial_code(space(8)).unwrap();
        let csv = code.amplitudes_csv();
        assert!(csv.starts_with("n,zero_re,zero_im,one_re,one_im\n"));
        assert_eq!(csv.lines().count(), 9);
    }
}
