// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(thermogate::cli::main_with_args(std::env::args_os()));
}
