use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::interp::{ExecutionResult, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Only crashes of the mutant are observable.
    #[serde(alias = "crash")]
    CrashOnly,
    /// Crash status and printed output are both observable.
    #[serde(alias = "diff")]
    Differential,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::CrashOnly => "crash",
            OracleKind::Differential => "diff",
        })
    }
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "crash" | "crash_only" => Ok(OracleKind::CrashOnly),
            "diff" | "differential" => Ok(OracleKind::Differential),
            other => Err(format!("unknown oracle `{other}` (expected `crash` or `diff`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleMode {
    pub kind: OracleKind,
    #[serde(default)]
    pub hangs_are_kills: bool,
}

impl OracleMode {
    pub const CRASH: OracleMode = OracleMode { kind: OracleKind::CrashOnly, hangs_are_kills: false };
    pub const DIFFERENTIAL: OracleMode = OracleMode { kind: OracleKind::Differential, hangs_are_kills: false };

    fn crashed(&self, outcome: &Outcome) -> bool {
        match outcome {
            Outcome::Crash { .. } => true,
            Outcome::FuelExhausted => self.hangs_are_kills,
            Outcome::Exit => false,
        }
    }
}

impl Default for OracleMode {
    fn default() -> Self {
        OracleMode::CRASH
    }
}

/// Whether `mutant` is distinguishable from `original` under `mode`.
///
/// Both results must come from the same input and fuel budget.
pub fn kills(original: &ExecutionResult, mutant: &ExecutionResult, mode: OracleMode) -> bool {
    let (o, m) = (mode.crashed(&original.outcome), mode.crashed(&mutant.outcome));
    match mode.kind {
        OracleKind::CrashOnly => m && !o,
        OracleKind::Differential => o != m || original.output != mutant.output,
    }
}
