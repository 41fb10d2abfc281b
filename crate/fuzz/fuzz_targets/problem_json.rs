// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_core::ope::OptimizationProblem;

fuzz_target!(|data: &str| {
    if let Ok(p) = OptimizationProblem::from_json(data) {
        assert!(p.validate().is_ok());
        assert!(p.lower() <= p.upper());
        let _ = OptimizationProblem::from_json(&p.to_json()).expect("serialized problem parses");
    }
});
