//! The `verify` report: deterministic rows plus a timestamp object that
//! holds everything run-dependent.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::verify::{run_suite, Counts, Ctx, Limits, Row, Tolerances};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub tool: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            tool: "matto-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: 1,
        }
    }
}

/// Wall-clock data; the only part of a report that varies between runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub limits: Limits,
    pub counts: Counts,
    pub tolerances: Tolerances,
    pub grid: Option<usize>,
    pub pass: bool,
    pub rows: Vec<Row>,
    pub environment: Environment,
    pub timestamp: Timestamp,
}

pub fn verify_report(ctx: &Ctx) -> VerifyReport {
    let (rows, elapsed) = run_suite(ctx);
    let unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    VerifyReport {
        seed: ctx.seed,
        limits: ctx.limits,
        counts: ctx.counts,
        tolerances: ctx.tol,
        grid: ctx.grid,
        pass: rows.iter().all(|r| r.pass),
        rows,
        environment: Environment::current(),
        timestamp: Timestamp {
            unix_seconds,
            elapsed_ms: elapsed as u64,
        },
    }
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        crate::io::to_json(self)
    }

    /// JSON with the timestamp object removed, for byte comparisons.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("timestamp");
        }
        crate::io::to_json(&v)
    }

    pub fn table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(9);
        let mut t = String::new();
        writeln!(
            t,
            "matto-lab verify  seed {}  d <= {}  degree <= {}",
            self.seed, self.limits.max_d, self.limits.max_degree
        )
        .unwrap();
        writeln!(
            t,
            "{:<width$}  {:>11}  {:>9}  {:>5}  result",
            "invariant", "max resid", "threshold", "cases"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                t,
                "{:<width$}  {:>11.3e}  {:>9.1e}  {:>5}  {}{}",
                r.name,
                r.max_residual,
                r.threshold,
                r.cases,
                if r.pass { "PASS" } else { "FAIL" },
                r.error
                    .as_deref()
                    .map(|e| format!("  ({e})"))
                    .unwrap_or_default()
            )
            .unwrap();
        }
        let passed = self.rows.iter().filter(|r| r.pass).count();
        writeln!(
            t,
            "{passed}/{} rows pass: {}",
            self.rows.len(),
            if self.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
        t
    }
}
