// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use tlsloss_cli::args::{normalize_args, Cli};

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    let cli = Cli::parse_from(normalize_args(std::env::args_os()));
    match tlsloss_cli::run_parsed(&cli, &mut stdout, &mut stderr) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
