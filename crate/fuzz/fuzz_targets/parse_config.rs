// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use thermogate::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config(text) {
        // a parsed config serializes and parses back to the same hash
        let again = parse_config(&cfg.to_toml_string()).expect("round trip");
        assert_eq!(cfg.hash(), again.hash());
    }
});
