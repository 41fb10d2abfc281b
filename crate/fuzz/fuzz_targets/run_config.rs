// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_cli::RunConfig;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = RunConfig::from_json(data) {
        let again = RunConfig::from_json(&cfg.canonical_json()).expect("canonical config parses");
        assert_eq!(again.canonical_json(), cfg.canonical_json());
        let _ = cfg.drive();
        let _ = cfg.lambda();
        let _ = cfg.dim_or(16);
        let _ = cfg.delta_abs(1.0, 1.0);
        let _ = qlg_cli::output::config_hash("fuzz", &cfg);
    }
});
