// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `tlsloss`: layered configuration (figure
//! recipe, TOML file, flags), run orchestration, and CSV/JSON plot data
//! with a metadata sidecar of parameters and invariant checks.

pub mod args;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use config::{resolve, validate_config, RawConfig, RunConfig};
pub use error::{CliError, CliResult};
pub use output::{from_sidecar, render, table, Table};
pub use run::{execute, RunOutput};

/// Parses, runs and writes outputs. Argument errors (including `--help`)
/// come back as configuration errors.
pub fn run_cli<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> CliResult<RunOutput>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = args::Cli::try_parse_from(args::normalize_args(argv))
        .map_err(|e| CliError::config("arguments", e.to_string()))?;
    run_parsed(&cli, stdout, stderr)
}

/// Runs parsed arguments. Invariant-check failures are reported on
/// `stderr` but do not change the result.
pub fn run_parsed(cli: &args::Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> CliResult<RunOutput> {
    let cfg = resolve(&cli.layered()?)?;
    let out = execute(&cfg)?;
    output::emit(&out, stdout)?;
    for c in out.failed_checks() {
        let _ = writeln!(stderr, "warning: invariant check {} failed (residual {:e})", c.name, c.residual);
    }
    Ok(out)
}
