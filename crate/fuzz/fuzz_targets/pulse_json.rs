// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_core::ncft::DrivePulse;

fuzz_target!(|data: &str| {
    if let Ok(p) = DrivePulse::from_json(data) {
        assert!(p.validate().is_ok());
        let again = DrivePulse::from_json(&p.to_json()).expect("serialized pulse parses");
        assert_eq!(again, p);
        let _ = p.to_csv();
    }
});
