// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use thermogate::io::{fields_csv, parse_fields_csv};
use thermogate::models::Shape;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = parse_fields_csv(text, Shape::gaussian(1.0, 1e-4)) {
        assert!(field.amplitudes.iter().flatten().all(|v| v.is_finite()));
        let _ = fields_csv(&field);
    }
});
