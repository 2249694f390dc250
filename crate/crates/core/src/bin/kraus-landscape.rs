// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use kraus_landscape::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
