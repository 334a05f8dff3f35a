use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tosyn", version, about = "Timing-parameter synthesis for interacting parametric timed automata")]
pub struct Cli {
    /// TOML file whose keys mirror the long flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a model.
    Validate { model: PathBuf },
    /// Build the unrolled monitor of a property.
    Monitor {
        model: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        /// Write the monitor as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Assemble the constraint query and report its shape.
    Constraints {
        model: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        /// Write the named sections as SMT-LIB2.
        #[arg(long)]
        smt: Option<PathBuf>,
    },
    /// Synthesize a parameter valuation and verify it.
    Synth {
        model: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Check one valuation with the zone oracle.
    Verify {
        model: PathBuf,
        /// JSON object mapping every parameter to an integer.
        valuation: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        /// Where to write the failing trace (default: next to the valuation).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Write monitor, abstract graph and query files.
    Export {
        model: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Verify many valuations in parallel.
    Sweep {
        model: PathBuf,
        #[command(flatten)]
        enc: EncodeArgs,
        /// JSON array of valuations.
        #[arg(long, conflicts_with = "samples")]
        valuations: Option<PathBuf>,
        /// Number of uniformly random valuations.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EncodeArgs {
    /// Interaction-level LTL property.
    #[arg(long)]
    pub ltl: Option<String>,
    /// Monitor unrolling depth.
    #[arg(long)]
    pub k: Option<u32>,
    /// Unroll to the computed bound, capped by --k-cap.
    #[arg(long)]
    pub k_star: bool,
    /// Largest depth --k-star may pick (default 16).
    #[arg(long)]
    pub k_cap: Option<u32>,
    /// Depth of the interaction history encoding.
    #[arg(long)]
    pub history: Option<usize>,
    #[arg(long, value_enum)]
    pub fence: Option<OnOff>,
    /// State property, e.g. "t1 + t2 <= 60".
    #[arg(long)]
    pub state: Option<String>,
    /// Lexicographic objective, e.g. "min alpha1,beta1 + beta2".
    #[arg(long)]
    pub objective: Option<String>,
    /// Guard perturbation bound (integer, fraction or decimal).
    #[arg(long)]
    pub robust: Option<String>,
    /// Extra linear constraint over parameters (repeatable).
    #[arg(long = "param-constraint")]
    pub param_constraints: Vec<String>,
    /// Encoding of abstract reachability: dnf, cnf or auto.
    #[arg(long)]
    pub abs: Option<String>,
    /// Enabling-condition style: exact or latest.
    #[arg(long)]
    pub ten: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolveArgs {
    /// `builtin`, `external` (TOSYN_SMT_CMD or `z3 -in`) or `cmd:<command line>`.
    #[arg(long)]
    pub backend: Option<String>,
    /// Candidate order over parameter values: asc or desc.
    #[arg(long)]
    pub order: Option<String>,
    /// Give up (unknown) after this many candidates.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Shuffles the branching order of the parameters.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep searching below verified witnesses for the global minimum.
    #[arg(long)]
    pub global_min: bool,
    /// Zone-graph state cap for the oracle.
    #[arg(long)]
    pub oracle_cap: Option<usize>,
}
