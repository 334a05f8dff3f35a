//! Exists-forall solving by counterexample-guided refinement.
//!
//! The E-solver proposes integer parameter values over the box; the F-solver
//! looks for a universal assignment violating the matrix. Each counterexample
//! is instantiated into the matrix and learned as a constraint on the
//! parameters. The box is finite, so the loop terminates.

pub mod esolver;
pub mod external;
pub mod fsolver;
pub mod sat;
pub mod simplex;
pub mod smtlib;

use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, info};

use crate::constraints::formula::{Assignment, Formula, LinExpr, Rel, Val, VarId};
use crate::constraints::EfQuery;
use crate::model::Valuation;
use crate::rational::{fmt_rat, is_integer, Rat};
pub use esolver::Order;
use fsolver::FResult;

/// Where the universal checks run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Builtin,
    /// External SMT-LIB solver; the command line is split on whitespace.
    /// `None` reads `TOSYN_SMT_CMD` and falls back to `z3 -in`.
    Command(Option<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveMode {
    /// Stop at the first verified candidate.
    #[default]
    FirstWitness,
    /// Propose lexicographically minimal candidates; the first verified one is optimal.
    MinimizeThenStop,
    /// Keep searching below every verified witness until the space is exhausted.
    GlobalMinimum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub backend: Backend,
    pub max_iterations: usize,
    pub mode: ObjectiveMode,
    pub order: Order,
    /// Shuffles the branching order of the parameters; `None` keeps declaration order.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            backend: Backend::Builtin,
            max_iterations: 10_000,
            mode: ObjectiveMode::FirstWitness,
            order: Order::Asc,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolveOutcome {
    Witness {
        valuation: Valuation,
        iterations: usize,
        /// Constraints learned from counterexamples.
        learned: usize,
    },
    /// No parameter valuation in the box satisfies the query.
    Exhausted { iterations: usize },
    IterationCapped { iterations: usize },
    BackendError { message: String, iterations: usize },
}

impl SolveOutcome {
    pub fn witness(&self) -> Option<&Valuation> {
        match self {
            SolveOutcome::Witness { valuation, .. } => Some(valuation),
            _ => None,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            SolveOutcome::Witness { iterations, .. }
            | SolveOutcome::Exhausted { iterations }
            | SolveOutcome::IterationCapped { iterations }
            | SolveOutcome::BackendError { iterations, .. } => *iterations,
        }
    }
}

/// Record of one refinement step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub candidate: Valuation,
    /// Counterexample values (rationals as `p` or `p/q`); `None` if the candidate verified.
    pub counterexample: Option<IndexMap<String, String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveTrace {
    pub steps: Vec<Step>,
    /// Conflicts met by the candidate search.
    pub search_nodes: u64,
    pub e_time: Duration,
    pub f_time: Duration,
}

/// Upper bound on the number of refinement iterations: the size of the box.
pub fn iteration_bound(q: &EfQuery) -> u128 {
    q.ranges()
        .iter()
        .map(|(lo, hi)| (hi - lo + 1) as u128)
        .fold(1u128, |a, b| a.saturating_mul(b))
}

pub fn solve(q: &EfQuery, cfg: &SolveConfig) -> SolveOutcome {
    solve_traced(q, cfg).0
}

fn f_check(q: &EfQuery, f: &Formula, cfg: &SolveConfig) -> Result<FResult, String> {
    match &cfg.backend {
        Backend::Builtin => Ok(fsolver::check_sat(f, &q.vars)),
        Backend::Command(cmd) => {
            let cmd = external::resolve_command(cmd.as_deref());
            external::check_sat_external(f, &q.vars, &cmd).map_err(|e| e.to_string())
        }
    }
}

fn candidate_valuation(q: &EfQuery, x: &Assignment) -> Valuation {
    Valuation(
        q.exists
            .iter()
            .map(|v| {
                let r = x.num(*v).expect("candidate assigns every parameter");
                (q.vars.name(*v).to_string(), *r.numer() as i64)
            })
            .collect(),
    )
}

/// Total assignment of the universal variables taken from a model.
fn complete(q: &EfQuery, model: &Assignment) -> Assignment {
    let mut y = Assignment::default();
    for v in &q.forall {
        let val = model.get(*v).unwrap_or(if q.vars.kind(*v).is_bool() {
            Val::Bool(false)
        } else {
            Val::Num(Rat::from_integer(0))
        });
        y.set(*v, val);
    }
    y
}

fn render_cex(q: &EfQuery, y: &Assignment) -> IndexMap<String, String> {
    y.0.iter()
        .map(|(v, val)| {
            let s = match val {
                Val::Num(r) => fmt_rat(r),
                Val::Bool(b) => b.to_string(),
            };
            (q.vars.name(*v).to_string(), s)
        })
        .collect()
}

/// `objective <_lex best`.
fn lex_below(objective: &[LinExpr], best: &[Rat]) -> Formula {
    let mut alts = Vec::new();
    for i in 0..objective.len() {
        let mut conj: Vec<Formula> = (0..i)
            .map(|j| Formula::atom(objective[j].clone(), Rel::Eq, LinExpr::constant(best[j])))
            .collect();
        conj.push(Formula::atom(objective[i].clone(), Rel::Lt, LinExpr::constant(best[i])));
        alts.push(Formula::and(conj));
    }
    Formula::or(alts)
}

/// Runs the refinement loop and also returns the per-iteration record.
pub fn solve_traced(q: &EfQuery, cfg: &SolveConfig) -> (SolveOutcome, SolveTrace) {
    let mut exists: Vec<VarId> = q.exists.clone();
    if let Some(seed) = cfg.seed {
        exists.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let ranges: Vec<(i64, i64)> = exists
        .iter()
        .map(|v| q.ranges()[q.exists.iter().position(|x| x == v).unwrap()])
        .collect();
    let exists: &[VarId] = &exists;
    let matrix = q.matrix();
    let mut learned = 0usize;
    let mut trace = SolveTrace::default();
    let mut cands = esolver::Candidates::new(exists, &ranges, cfg.order);
    cands.add(&q.side);
    let mut best: Option<(Valuation, Vec<Rat>)> = None;
    let minimize = cfg.mode == ObjectiveMode::MinimizeThenStop && !q.objective.is_empty();
    info!(
        exists = exists.len(),
        forall = q.forall.len(),
        bound = %iteration_bound(q),
        "starting refinement"
    );

    for iter in 1..=cfg.max_iterations {
        let t0 = Instant::now();
        let before = cands.conflicts();
        let cand = if minimize {
            esolver::find_min_point(&cands, &q.objective, &mut trace.search_nodes)
        } else {
            cands.next()
        };
        trace.search_nodes += cands.conflicts() - before;
        trace.e_time += t0.elapsed();
        let Some(x) = cand else {
            let outcome = match best {
                Some((valuation, _)) => SolveOutcome::Witness {
                    valuation,
                    iterations: iter - 1,
                    learned,
                },
                None => SolveOutcome::Exhausted { iterations: iter - 1 },
            };
            return (outcome, trace);
        };
        let valuation = candidate_valuation(q, &x);
        info!(iteration = iter, candidate = %valuation, "candidate");

        let h = q.hyp.substitute(&x);
        let g = q.goal.substitute(&x);
        let t1 = Instant::now();
        let res = f_check(q, &Formula::and([h.clone(), Formula::not(g.clone())]), cfg);
        trace.f_time += t1.elapsed();
        match res {
            Err(message) => {
                return (
                    SolveOutcome::BackendError {
                        message,
                        iterations: iter,
                    },
                    trace,
                )
            }
            Ok(FResult::Sat(model)) => {
                let y = complete(q, &model);
                let lemma = matrix.substitute(&y);
                debug!(counterexample = ?render_cex(q, &y), "learned constraint");
                if lemma.eval(&x) != Some(false) {
                    return (
                        SolveOutcome::BackendError {
                            message: "counterexample does not exclude the candidate".into(),
                            iterations: iter,
                        },
                        trace,
                    );
                }
                trace.steps.push(Step {
                    candidate: valuation,
                    counterexample: Some(render_cex(q, &y)),
                });
                cands.add(&lemma);
                learned += 1;
            }
            Ok(FResult::Unsat) => {
                // Re-check with the negated goal pushed into negation normal form.
                let again = f_check(q, &Formula::and([h, Formula::not(g).nnf()]), cfg);
                if !matches!(again, Ok(FResult::Unsat)) {
                    return (
                        SolveOutcome::BackendError {
                            message: "witness failed the confirming check".into(),
                            iterations: iter,
                        },
                        trace,
                    );
                }
                trace.steps.push(Step {
                    candidate: valuation.clone(),
                    counterexample: None,
                });
                if cfg.mode != ObjectiveMode::GlobalMinimum || q.objective.is_empty() {
                    return (
                        SolveOutcome::Witness {
                            valuation,
                            iterations: iter,
                            learned,
                        },
                        trace,
                    );
                }
                let vals: Vec<Rat> = q
                    .objective
                    .iter()
                    .map(|o| o.eval(&|v| x.num(v)).expect("objective over parameters"))
                    .collect();
                debug_assert!(vals.iter().all(is_integer));
                cands.add(&lex_below(&q.objective, &vals));
                best = Some((valuation, vals));
            }
        }
    }
    let iterations = cfg.max_iterations;
    match best {
        Some((valuation, _)) => (
            SolveOutcome::Witness {
                valuation,
                iterations,
                learned,
            },
            trace,
        ),
        None => (SolveOutcome::IterationCapped { iterations }, trace),
    }
}
