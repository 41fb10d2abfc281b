// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qlg_core::qlg::GateSequence;

fuzz_target!(|data: &str| {
    if let Ok(seq) = GateSequence::from_json(data) {
        assert_eq!(seq.len(), seq.meta().n_t * seq.meta().n_k);
        let again = GateSequence::from_json(&seq.to_json()).expect("serialized sequence parses");
        assert_eq!(again, seq);
    }
});
