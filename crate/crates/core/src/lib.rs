//! Parameter synthesis for systems of interacting parametric timed automata.
//!
//! The pipeline turns an interaction-level LTL property into a safety monitor,
//! builds a compositional over-approximation of the reachable states, and
//! solves the resulting exists-forall constraint with a counterexample-guided
//! pair of solvers. Every synthesized valuation can be checked against an
//! exact zone-graph exploration of the concrete system.
//!
//! Module map:
//!
//! * [`model`]: systems, components, the JSON model format, instantiation.
//! * [`ltl`]: LTL parsing and translation to Büchi automata.
//! * [`monitor`]: unrolled risk monitors and system augmentation.
//! * [`constraints`]: formula IR and invariant / deadlock / fence generation.
//! * [`efsmt`]: the exists-forall solving loop and its backends.
//! * [`oracle`]: DBM-based verification of concrete valuations.
//! * [`bench_models`]: the robot and worker model families.

pub mod bench_models;
pub mod constraints;
pub mod efsmt;
pub mod ltl;
pub mod model;
pub mod monitor;
pub mod oracle;
pub mod pipeline;
pub mod rational;

pub use constraints::formula::{Atom, Formula, LinExpr, Rel, VarId, VarKind, Vars};
pub use constraints::{assemble, EfQuery, EncodeOptions};
pub use efsmt::{solve, SolveConfig, SolveOutcome};
pub use ltl::{ltl_to_buchi, parse_ltl, BuchiAutomaton, Ltl};
pub use model::{instantiate, load_system, ConcreteSystem, System, Valuation};
pub use monitor::{augment, build_monitor, AugmentedSystem, MonitorComponent};
pub use oracle::{explore, simulate_word, verify_witness, Verdict};
pub use rational::Rat;
