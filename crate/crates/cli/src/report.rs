//! JSON reports. Every field is always present (`null` when absent) so the
//! shipped schema can require all of them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tosyn_core::oracle::{FailReason, TraceStep, Verdict};
use tosyn_core::Valuation;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Witness,
    Unknown,
    InfeasibleAtK,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReport {
    pub module: String,
    pub message: String,
}

impl From<&CliError> for ErrorReport {
    fn from(e: &CliError) -> Self {
        ErrorReport {
            module: e.module().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictReport {
    pub status: Status,
    pub states: usize,
    pub zeno_suspect: Option<usize>,
    pub reason: Option<FailReason>,
    pub trace: Option<Vec<TraceStep>>,
    pub trace_file: Option<String>,
}

impl From<&Verdict> for VerdictReport {
    fn from(v: &Verdict) -> Self {
        match v {
            Verdict::Ok { states, zeno_suspect } => VerdictReport {
                status: Status::Ok,
                states: *states,
                zeno_suspect: Some(*zeno_suspect),
                reason: None,
                trace: None,
                trace_file: None,
            },
            Verdict::Fails { reason, path, states } => VerdictReport {
                status: Status::Failed,
                states: *states,
                zeno_suspect: None,
                reason: Some(*reason),
                trace: Some(path.clone()),
                trace_file: None,
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Statistics {
    pub iterations: usize,
    pub learned: usize,
    pub abs_states: usize,
    pub monitor_locations: usize,
    pub fence_nodes: usize,
    pub exists_ints: usize,
    pub forall_reals: usize,
    pub forall_bools: usize,
    pub hyp_size: usize,
    pub goal_size: usize,
    pub search_nodes: u64,
    pub assemble_ms: f64,
    pub e_solver_ms: f64,
    pub f_solver_ms: f64,
    pub verify_ms: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub k: u32,
    /// The unrolling bound when it was requested (decimal; `null` on overflow).
    pub k_star: Option<String>,
    pub k_hist: usize,
    pub fences: bool,
    pub epsilon: Option<String>,
    pub objective: Vec<String>,
    pub backend: String,
    pub ltl: Option<String>,
    pub state: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthReport {
    pub command: String,
    pub outcome: Outcome,
    pub valuation: Option<Valuation>,
    pub verdict: Option<VerdictReport>,
    pub statistics: Statistics,
    pub config: ConfigEcho,
    pub hint: Option<String>,
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateReport {
    pub command: String,
    pub valid: bool,
    pub components: usize,
    pub clocks: Vec<String>,
    pub interactions: Vec<String>,
    pub parameters: BTreeMap<String, [i64; 2]>,
    pub mode: String,
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorEdge {
    pub from: String,
    pub symbol: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorReport {
    pub command: String,
    pub k: u32,
    pub k_star: Option<String>,
    pub buchi_states: usize,
    pub initial: String,
    pub locations: Vec<String>,
    pub risk: Option<String>,
    pub symbols: Vec<String>,
    pub edges: Vec<MonitorEdge>,
    pub dot_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSize {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsReport {
    pub command: String,
    pub statistics: Statistics,
    pub sections: Vec<SectionSize>,
    pub smt_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub command: String,
    pub valuation: Valuation,
    pub verdict: VerdictReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportReport {
    pub command: String,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub valuation: Valuation,
    pub status: Status,
    pub reason: Option<FailReason>,
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub command: String,
    pub total: usize,
    pub ok: usize,
    pub failed: usize,
    pub results: Vec<SweepEntry>,
}

/// Any error, for commands that fail before producing their own report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureReport {
    pub command: String,
    pub outcome: Outcome,
    pub error: ErrorReport,
}
