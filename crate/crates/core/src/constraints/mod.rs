//! Constraint generation: builds the exists-forall query whose solutions are
//! parameter valuations making the augmented system deadlock-free and safe.

pub mod abs;
pub mod fences;
pub mod formula;
pub mod invariants;
pub mod stateprop;
pub mod ten;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info};

use crate::model::{BoundTerm, InvariantAtom, System, Valuation, MONITOR_NAME};
use crate::monitor::{AugmentedSystem, MonitorComponent};
use crate::rational::Rat;
use formula::{Assignment, Formula, LinExpr, Rel, Val, VarId, VarKind, Vars};

pub use abs::{AbsEncoding, ReachSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("abstract reachability exceeded {cap} location vectors; reduce the model or raise the cap")]
    AbsCap { cap: usize },
    #[error("cannot parse '{text}': {message}")]
    Parse { text: String, message: String },
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("{0}")]
    Unsupported(String),
}

/// `∃ exists ∀ forall . side(exists) ∧ (hyp → goal)`.
#[derive(Debug, Clone)]
pub struct EfQuery {
    pub vars: Vars,
    /// Existential variables; every one is an integer parameter.
    pub exists: Vec<VarId>,
    pub forall: Vec<VarId>,
    pub hyp: Formula,
    pub goal: Formula,
    /// Extra constraints on the existential variables alone.
    pub side: Formula,
    /// Lexicographic minimization targets.
    pub objective: Vec<LinExpr>,
    /// Named pieces of `hyp` and `goal`, for inspection and export.
    pub sections: Vec<(String, Formula)>,
    pub info: QueryInfo,
}

/// Sizes reported alongside a query.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInfo {
    pub abs_states: usize,
    pub monitor_locations: usize,
    pub fence_nodes: usize,
    pub fences_skipped: bool,
    pub hyp_size: usize,
    pub goal_size: usize,
    pub exists_ints: usize,
    pub forall_reals: usize,
    pub forall_bools: usize,
}

impl EfQuery {
    pub fn matrix(&self) -> Formula {
        Formula::implies(self.hyp.clone(), self.goal.clone())
    }

    /// Inclusive integer ranges of the existential variables.
    pub fn ranges(&self) -> Vec<(i64, i64)> {
        self.exists
            .iter()
            .map(|v| match self.vars.kind(*v) {
                VarKind::Param { lo, hi } => (*lo, *hi),
                k => panic!("existential variable {} has kind {k:?}", self.vars.name(*v)),
            })
            .collect()
    }

    /// The existential variables set from `v` (missing names are left out).
    pub fn assignment(&self, v: &Valuation) -> Assignment {
        let mut a = Assignment::default();
        for id in &self.exists {
            if let Some(x) = v.get(self.vars.name(*id)) {
                a.set(*id, Val::Num(Rat::from_integer(x as i128)));
            }
        }
        a
    }

    /// The hypothesis under `v` with the negated goal: satisfiable exactly
    /// when some state consistent with the hypothesis violates the goal.
    pub fn negated_claim(&self, v: &Valuation) -> Formula {
        let a = self.assignment(v);
        Formula::and([self.hyp.substitute(&a), Formula::not(self.goal.substitute(&a))])
    }

    pub fn section(&self, name: &str) -> Option<&Formula> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TenStyle {
    /// Fire at the latest delay allowed by the participants' source
    /// invariants when they bound it; exact elimination otherwise.
    Latest,
    /// Exact elimination of the delay in every case.
    #[default]
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeOptions {
    /// Depth of the interaction history encoding.
    pub history: usize,
    pub fences: bool,
    pub abs: AbsEncoding,
    pub abs_cap: usize,
    /// State property over clocks and locations.
    pub state: Option<String>,
    /// Extra constraints over parameters.
    pub param_constraints: Vec<String>,
    /// Linear expressions over parameters, minimized lexicographically.
    pub objective: Vec<String>,
    /// Guard perturbation bound.
    pub robust: Option<Rat>,
    pub ten: TenStyle,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            history: 0,
            fences: false,
            abs: AbsEncoding::Auto,
            abs_cap: 1_000_000,
            state: None,
            param_constraints: vec![],
            objective: vec![],
            robust: None,
            ten: TenStyle::Exact,
        }
    }
}

/// Variable table and name resolution shared by the generators.
pub struct Ctx<'a> {
    pub sys: &'a System,
    pub monitor: Option<&'a MonitorComponent>,
    pub vars: Vars,
    robust: Option<Rat>,
    perturb: BTreeMap<(usize, usize, usize), VarId>,
    pub ten_style: TenStyle,
}

pub fn flag_name(component: &str, location: &str) -> String {
    format!("{component}.{location}")
}

pub fn monitor_flag_name(m: &MonitorComponent, loc: usize) -> String {
    if m.is_risk(loc) {
        format!("{MONITOR_NAME}.risk")
    } else {
        format!("{MONITOR_NAME}.m{loc}")
    }
}

pub fn history_name(sigma: &str, depth: usize) -> String {
    format!("prev{depth}_{sigma}")
}

impl<'a> Ctx<'a> {
    pub fn new(aug: &'a AugmentedSystem, robust: Option<Rat>) -> Self {
        let sys = &aug.base;
        let mut vars = Vars::new();
        for (p, r) in &sys.parameters {
            vars.declare(p, VarKind::Param { lo: r.lo, hi: r.hi });
        }
        for c in sys.clocks() {
            vars.declare(c, VarKind::Clock);
        }
        for c in &sys.components {
            for l in &c.locations {
                vars.declare(
                    &flag_name(&c.name, l),
                    VarKind::LocFlag {
                        component: c.name.clone(),
                        location: l.clone(),
                    },
                );
            }
        }
        if let Some(m) = &aug.monitor {
            for i in 0..m.num_locations() {
                let name = monitor_flag_name(m, i);
                vars.declare(
                    &name,
                    VarKind::LocFlag {
                        component: MONITOR_NAME.into(),
                        location: m.names[i].clone(),
                    },
                );
            }
        }
        Ctx {
            sys,
            monitor: aug.monitor.as_ref(),
            vars,
            robust,
            perturb: BTreeMap::new(),
            ten_style: TenStyle::Exact,
        }
    }

    pub fn clock(&self, name: &str) -> VarId {
        self.vars.id(name).expect("declared clock")
    }

    pub fn clock_expr(&self, name: &str) -> LinExpr {
        LinExpr::var(self.clock(name))
    }

    pub fn term(&self, t: &BoundTerm) -> LinExpr {
        match t {
            BoundTerm::Lit(v) => LinExpr::int(*v),
            BoundTerm::Param(p) => LinExpr::var(self.vars.id(p).expect("declared parameter")),
        }
    }

    pub fn flag_id(&self, comp: usize, loc: &str) -> VarId {
        let c = &self.sys.components[comp];
        self.vars.id(&flag_name(&c.name, loc)).expect("declared flag")
    }

    pub fn flag(&self, comp: usize, loc: &str) -> Formula {
        Formula::var(self.flag_id(comp, loc))
    }

    pub fn monitor_flag(&self, loc: usize) -> Formula {
        let m = self.monitor.expect("monitor present");
        Formula::var(self.vars.id(&monitor_flag_name(m, loc)).expect("declared flag"))
    }

    /// Right side of guard atom `atom` of jump `jump` in component `comp`,
    /// perturbed when robustness is enabled.
    pub fn guard_rhs(&mut self, comp: usize, jump: usize, atom: usize) -> LinExpr {
        let j = &self.sys.components[comp].jumps[jump];
        let base = self.term(&j.guard[atom].rhs);
        match self.robust {
            None => base,
            Some(eps) => {
                let key = (comp, jump, atom);
                let id = match self.perturb.get(&key) {
                    Some(id) => *id,
                    None => {
                        let c = &self.sys.components[comp];
                        let name = format!("d.{}.{}.{}", c.name, j.port, atom);
                        let id = self.vars.declare(&name, VarKind::Perturb { eps });
                        self.perturb.insert(key, id);
                        id
                    }
                };
                base + LinExpr::var(id)
            }
        }
    }

    pub fn jump_index(&self, comp: usize, port: &str) -> usize {
        self.sys.components[comp]
            .jumps
            .iter()
            .position(|j| j.port == port)
            .expect("validated port")
    }

    pub fn inv_atom(&self, a: &InvariantAtom) -> Formula {
        Formula::atom(self.clock_expr(&a.clock), Rel::Le, self.term(&a.le))
    }

    /// Range of a bound expression over the parameter box.
    pub fn interval(&self, e: &LinExpr) -> (Rat, Rat) {
        e.interval(&|v| self.vars.range(v).expect("bounded variable"))
    }

    /// `a ≤ b` for every parameter valuation in the box.
    pub fn provably_le(&self, a: &LinExpr, b: &LinExpr) -> bool {
        self.interval(&(b.clone() - a.clone())).0 >= Rat::from_integer(0)
    }

    /// Declared perturbation variables with their bounds as a formula.
    fn perturb_bounds(&self) -> Formula {
        Formula::and(self.perturb.values().map(|v| {
            let eps = match self.vars.kind(*v) {
                VarKind::Perturb { eps } => *eps,
                _ => unreachable!(),
            };
            Formula::and([
                Formula::atom(LinExpr::var(*v), Rel::Ge, LinExpr::constant(-eps)),
                Formula::atom(LinExpr::var(*v), Rel::Le, LinExpr::constant(eps)),
            ])
        }))
    }
}

/// Builds the query for `aug` under `opts`.
pub fn assemble(aug: &AugmentedSystem, opts: &EncodeOptions) -> Result<EfQuery, ConstraintError> {
    let sys = &aug.base;
    let mut ctx = Ctx::new(aug, opts.robust);
    ctx.ten_style = opts.ten;

    let reach = abs::explore_abs(aug, opts.history, opts.abs_cap)?;
    let hist = abs::declare_history(&mut ctx, opts.history);

    let clocks_nonneg = Formula::and(
        sys.clocks()
            .into_iter()
            .map(|c| Formula::atom(ctx.clock_expr(c), Rel::Ge, LinExpr::zero())),
    );
    let one_hot = abs::one_hot(&ctx);
    let abs_f = abs::abs_formula(&ctx, &reach, opts.abs);
    let history_f = abs::history_formula(&ctx, &reach, &hist);
    let ci = Formula::and((0..sys.components.len()).map(|i| invariants::component_invariants(&mut ctx, i)));
    let pi = invariants::jump_invariants(&mut ctx, opts.history > 0);

    let deadlock = ten::deadlock(&mut ctx);
    let state = match &opts.state {
        Some(text) => stateprop::parse_state(&ctx, text)?,
        None => Formula::True,
    };
    let risk = match aug.monitor.as_ref().and_then(|m| m.risk) {
        Some(r) => Formula::not(ctx.monitor_flag(r)),
        None => Formula::True,
    };
    let (fence_f, fence_info) = if opts.fences && aug.monitor.is_some() {
        fences::fences(&mut ctx, &reach)
    } else {
        (Formula::True, fences::FenceInfo::default())
    };
    // After every generator, so that all guard perturbations are declared.
    let perturb = ctx.perturb_bounds();

    let hyp = Formula::and([
        clocks_nonneg.clone(),
        one_hot.clone(),
        abs_f.clone(),
        history_f.clone(),
        ci.clone(),
        pi.clone(),
        perturb.clone(),
    ]);
    let goal = Formula::and([
        state.clone(),
        Formula::not(deadlock.clone()),
        risk.clone(),
        fence_f.clone(),
    ]);

    let mut side = Vec::new();
    for text in &opts.param_constraints {
        side.push(stateprop::parse_param_constraint(&ctx, text)?);
    }
    let side = Formula::and(side);
    let mut objective = Vec::new();
    for text in &opts.objective {
        objective.push(stateprop::parse_param_expr(&ctx, text)?);
    }

    let exists = ctx.vars.ids_where(|k| k.is_int());
    let forall: Vec<VarId> = ctx.vars.ids_where(|k| !k.is_int());
    let info = QueryInfo {
        abs_states: reach.vectors.len(),
        monitor_locations: aug.monitor.as_ref().map_or(0, |m| m.num_locations()),
        fence_nodes: fence_info.nodes,
        fences_skipped: fence_info.skipped,
        hyp_size: hyp.size(),
        goal_size: goal.size(),
        exists_ints: exists.len(),
        forall_reals: forall.iter().filter(|v| ctx.vars.kind(**v).is_real()).count(),
        forall_bools: forall.iter().filter(|v| ctx.vars.kind(**v).is_bool()).count(),
    };
    info!(?info, "assembled query");
    debug!(hyp = %hyp.display(&ctx.vars), "hypothesis");

    let sections = vec![
        ("clocks".to_string(), clocks_nonneg),
        ("one-hot".to_string(), one_hot),
        ("abs".to_string(), abs_f),
        ("history".to_string(), history_f),
        ("component-invariants".to_string(), ci),
        ("jump-invariants".to_string(), pi),
        ("perturbations".to_string(), perturb),
        ("state".to_string(), state),
        ("deadlock".to_string(), deadlock),
        ("risk".to_string(), risk),
        ("fences".to_string(), fence_f),
    ];
    Ok(EfQuery {
        vars: ctx.vars,
        exists,
        forall,
        hyp,
        goal,
        side,
        objective,
        sections,
        info,
    })
}
