// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_cli::target::parse_amplitudes;

fuzz_target!(|data: &str| {
    if let Ok(amps) = parse_amplitudes(data) {
        assert!(!amps.is_empty());
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-9, "norm² = {norm}");
    }
});
