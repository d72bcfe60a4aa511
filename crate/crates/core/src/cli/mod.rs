//! Description files, analyses and canonical JSON reports.
//!
//! A report is one JSON object `{command, inputs, results, seed, version}`
//! written with sorted keys and no insignificant whitespace, so identical
//! configurations give byte-identical output. Rationals appear as `m/n`
//! strings and indices as decimal strings or `"inf"`.

mod parse;
mod report;

pub use parse::{parse, serialize, serialize_endo_body, Document, NamedDraft, ParseError, ValidationError};
pub use report::canonical_json;

use std::path::PathBuf;

use serde_json::{json, Value};

use crate::exec::Exec;

/// Exit code on success.
pub const EXIT_OK: i32 = 0;
/// Exit code on bad flags, unreadable or malformed input.
pub const EXIT_USAGE: i32 = 1;
/// Exit code when an oracle contradicts a verdict.
pub const EXIT_CONTRADICTION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Check,
    Decompose,
    Oracle,
    Defect,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Check => "check",
            Command::Decompose => "decompose",
            Command::Oracle => "oracle",
            Command::Defect => "defect",
        }
    }
}

/// Defaults: levels `2,4,6,8`, 100 samples, seed 0, witness budget 8
/// levels for `oracle` and a `p^n` cap of 256 for `defect`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub levels: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub budget: Option<u64>,
    pub out: Option<PathBuf>,
    pub enumerate_all: bool,
    /// Restricts endo-level commands to one endo name.
    pub endo: Option<String>,
    /// Field of the matrix for `defect`: `Q` or a prime.
    pub field: Option<String>,
    pub exec: Exec,
    /// Test hook: the oracle command reads every verdict negated.
    pub inject_wrong_verdict: bool,
}

impl SessionConfig {
    pub fn new(command: Command, inputs: Vec<PathBuf>) -> SessionConfig {
        SessionConfig {
            command,
            inputs,
            levels: vec![2, 4, 6, 8],
            samples: 100,
            seed: 0,
            budget: None,
            out: None,
            enumerate_all: false,
            endo: None,
            field: None,
            exec: Exec::Parallel,
            inject_wrong_verdict: false,
        }
    }
}

/// Exit code with the report text or a usage message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<String>,
    pub error: Option<String>,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Outcome {
        Outcome { code: EXIT_USAGE, report: None, error: Some(msg.into()) }
    }
}

fn check_config(cfg: &SessionConfig) -> Result<(), String> {
    if cfg.inputs.is_empty() {
        return Err("no input files".into());
    }
    if cfg.levels.is_empty() || cfg.levels[0] == 0 || cfg.levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err("levels must be positive and strictly ascending".into());
    }
    if cfg.samples == 0 {
        return Err("samples must be at least 1".into());
    }
    Ok(())
}

/// Runs one command over its inputs and assembles the report.
pub fn run(cfg: &SessionConfig) -> Outcome {
    if let Err(e) = check_config(cfg) {
        return Outcome::usage(e);
    }
    let mut results = Vec::new();
    let mut contradiction = false;
    for path in &cfg.inputs {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return Outcome::usage(format!("{}: {e}", path.display())),
        };
        let r = match cfg.command {
            Command::Defect => report::defect(cfg, &text),
            _ => report::document(cfg, &text),
        };
        match r {
            Ok((v, bad)) => {
                contradiction |= bad;
                results.push(json!({ "input": path.display().to_string(), "result": v }));
            }
            Err(e) => return Outcome::usage(format!("{}: {e}", path.display())),
        }
    }
    let inputs: Vec<Value> = cfg.inputs.iter().map(|p| Value::String(p.display().to_string())).collect();
    let doc = json!({
        "command": cfg.command.name(),
        "inputs": inputs,
        "results": results,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    Outcome {
        code: if contradiction { EXIT_CONTRADICTION } else { EXIT_OK },
        report: Some(canonical_json(&doc)),
        error: None,
    }
}

#[cfg(test)]
mod tests;
