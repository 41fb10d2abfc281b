// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_core::sweep::{parse_sweep, MAX_POINTS};

fuzz_target!(|data: &str| {
    if let Ok(v) = parse_sweep(data) {
        assert!(!v.is_empty() && v.len() <= MAX_POINTS);
        assert!(v.iter().all(|x| x.is_finite()));
    }
});
