// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum lattice gates: synthesis of bosonic unitaries as sequences of
//! kicked-cosine gates in a rotating frame, with the supporting Fock-space
//! numerics, pulse design, optimal envelope search and noise models.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codes;
pub mod error;
pub mod fock;
pub mod haar;
pub mod io;
pub mod linalg;
pub mod ncft;
pub mod noise;
pub mod ope;
pub mod pipeline;
pub mod qlg;
pub mod special;
pub mod sweep;
pub mod synth;
pub mod wigner;

pub use error::{Error, Result};
