//! Subcommands of the `demon` binary.
//!
//! Commands return an exit status instead of exiting so that they can be
//! driven from tests. Results go to stdout or a file; logs go to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use demon_core::engine::{Algorithm, SimConfig, SimRun};
use demon_core::expr::Verdict;

pub mod check;
pub mod experiment;
pub mod gen;
pub mod run;

/// The property checked holds, or the command succeeded.
pub const EXIT_OK: u8 = 0;
/// The property checked does not hold.
pub const EXIT_FAILS: u8 = 1;
/// Unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Simulation settings given on the command line or in an experiment
/// config. Unset fields keep the engine defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SimOverrides {
    /// Rounds a message spends in transit.
    #[arg(long)]
    pub comm_delay: Option<u32>,
    /// Monitors active at round 1 (migration).
    #[arg(long = "active")]
    #[serde(alias = "active")]
    pub initial_active: Option<usize>,
    /// Extra rounds after the trace before a run times out.
    #[arg(long)]
    pub timeout_slack: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SimOverrides {
    /// `other` wins where it is set.
    pub fn or(&self, other: &SimOverrides) -> SimOverrides {
        SimOverrides {
            comm_delay: other.comm_delay.or(self.comm_delay),
            initial_active: other.initial_active.or(self.initial_active),
            timeout_slack: other.timeout_slack.or(self.timeout_slack),
            seed: other.seed.or(self.seed),
        }
    }

    pub fn config(&self, algorithm: Algorithm) -> SimConfig {
        let mut c = SimConfig::new(algorithm);
        if let Some(d) = self.comm_delay {
            c.comm_delay = d;
        }
        if let Some(a) = self.initial_active {
            c.initial_active = a;
        }
        if let Some(s) = self.timeout_slack {
            c.timeout_slack = s;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c
    }
}

/// One line of a metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub algorithm: Algorithm,
    pub components: usize,
    pub spec_id: String,
    pub trace_id: String,
    pub delay: f64,
    pub msgs: f64,
    pub data: f64,
    pub s_crit: f64,
    pub s_max: u64,
    pub conv: f64,
    pub verdict: Verdict,
    pub stop_round: u32,
}

impl Row {
    pub fn new(run: &SimRun, spec_id: &str, trace_id: &str) -> Row {
        let r = &run.report;
        Row {
            algorithm: run.algorithm,
            components: run.metrics.components.len(),
            spec_id: spec_id.to_string(),
            trace_id: trace_id.to_string(),
            delay: r.delay,
            msgs: r.msgs,
            data: r.data,
            s_crit: r.s_crit,
            s_max: r.s_max,
            conv: r.conv,
            verdict: run.verdict,
            stop_round: run.stop_round,
        }
    }

    /// Sort key of experiment output.
    pub fn key(&self) -> (Algorithm, usize, &str, &str) {
        (self.algorithm, self.components, &self.spec_id, &self.trace_id)
    }
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// `path` relative to `base` unless absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// File name without extension, used as an id.
pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}
