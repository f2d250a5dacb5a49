// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Reporting for the acceptance suite in `tests/acceptance.rs`, which runs
//! every criterion, prints one `PASS`/`FAIL` line each and fails if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("{tag} criterion {}: {} [{:.1} s]", self.id, self.detail, self.seconds)
    }
}

/// Runs one criterion; a panic counts as a failure with its message.
pub fn evaluate(id: u32, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            (false, format!("error: {msg}"))
        }
    };
    Outcome { id, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

/// `|a − b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
