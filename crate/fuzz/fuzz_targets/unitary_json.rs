// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_core::synth::TargetUnitary;

fuzz_target!(|data: &str| {
    if let Ok(u) = TargetUnitary::from_json(data) {
        assert!(u.unitarity_defect() < 1e-10);
        assert_eq!(u.matrix().nrows(), u.space().dim());
        let again = TargetUnitary::from_json(&u.to_json()).expect("serialized unitary parses");
        assert_eq!(again, u);
    }
});
