//! End-to-end synthesis: property to monitor, monitor to query, query to
//! witness, witness to oracle verdict.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::constraints::{assemble, ConstraintError, EfQuery, EncodeOptions, QueryInfo};
use crate::efsmt::{solve_traced, SolveConfig, SolveOutcome, SolveTrace};
use crate::ltl::{ltl_to_buchi, parse_ltl, Ltl, LtlError};
use crate::model::System;
use crate::monitor::{augment, build_monitor, compute_k_star, AugmentedSystem, MonitorError};
use crate::oracle::{verify_augmented, ExploreOptions, OracleError, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Constraints(#[from] ConstraintError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// How far to unroll the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unrolling {
    Fixed(u32),
    /// The bound beyond which unrolling further cannot help.
    KStar,
}

impl Default for Unrolling {
    fn default() -> Self {
        Unrolling::Fixed(1)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub unrolling: Unrolling,
    pub encode: EncodeOptions,
    pub solve: SolveConfig,
    pub explore: ExploreOptions,
}

/// Attaches the monitor of `property` (if any), unrolled `k` times.
pub fn monitored(sys: &System, property: Option<&str>, k: u32) -> Result<AugmentedSystem, PipelineError> {
    let Some(text) = property else {
        return Ok(AugmentedSystem::plain(sys.clone()));
    };
    let phi = parse_ltl(text)?;
    phi.check_atoms(sys.interaction_names())?;
    let b = ltl_to_buchi(&Ltl::not(phi.clone()));
    Ok(augment(sys, build_monitor(&b, k), &phi.atoms())?)
}

/// Resolves the unrolling depth for `property` on `sys`.
pub fn unrolling_depth(sys: &System, property: Option<&str>, u: Unrolling) -> Result<u32, PipelineError> {
    match (u, property) {
        (Unrolling::Fixed(k), _) => Ok(k),
        (Unrolling::KStar, None) => Ok(1),
        (Unrolling::KStar, Some(text)) => {
            let phi = parse_ltl(text)?;
            let b = ltl_to_buchi(&Ltl::not(phi));
            let k = compute_k_star(sys, &b)?;
            u32::try_from(k).map_err(|_| PipelineError::Monitor(MonitorError::Overflow))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub k: u32,
    pub query: EfQuery,
    pub outcome: SolveOutcome,
    pub trace: SolveTrace,
    /// Oracle verdict for the witness, if there is one.
    pub verdict: Option<Verdict>,
    pub assemble_time: Duration,
    pub verify_time: Duration,
}

impl Synthesis {
    pub fn info(&self) -> &QueryInfo {
        &self.query.info
    }

    /// A witness that the oracle confirmed.
    pub fn verified(&self) -> bool {
        self.outcome.witness().is_some() && self.verdict.as_ref().is_some_and(Verdict::is_ok)
    }
}

/// Runs the whole pipeline. The witness, if any, is always checked by the oracle.
pub fn synthesize(sys: &System, property: Option<&str>, cfg: &SynthesisConfig) -> Result<Synthesis, PipelineError> {
    let k = unrolling_depth(sys, property, cfg.unrolling)?;
    let aug = monitored(sys, property, k)?;
    let t0 = Instant::now();
    let query = assemble(&aug, &cfg.encode)?;
    let assemble_time = t0.elapsed();
    let (outcome, trace) = solve_traced(&query, &cfg.solve);
    let t1 = Instant::now();
    let verdict = match outcome.witness() {
        Some(v) => Some(verify_augmented(&aug, v, &cfg.explore)?),
        None => None,
    };
    let verify_time = t1.elapsed();
    info!(status = ?outcome, verdict = ?verdict, "synthesis finished");
    Ok(Synthesis {
        k,
        query,
        outcome,
        trace,
        verdict,
        assemble_time,
        verify_time,
    })
}
