// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use thermogate::io::{read_trajectory_dump, trajectory_dump_bytes};

fuzz_target!(|data: &[u8]| {
    if let Ok(dump) = read_trajectory_dump(data) {
        let bytes = trajectory_dump_bytes(&dump.times, &dump.maps).expect("re-encode");
        assert_eq!(bytes, data);
    }
});
