// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Run orchestration behind the `qlg` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod target;

pub use config::RunConfig;
pub use error::CliError;
