//! Flag resolution: command line first, then the TOML config file, then defaults.

use serde::Deserialize;
use tosyn_core::constraints::{AbsEncoding, EncodeOptions, TenStyle};
use tosyn_core::efsmt::{Backend, ObjectiveMode, Order, SolveConfig};
use tosyn_core::oracle::ExploreOptions;
use tosyn_core::rational::{fmt_rat, parse_rat};

use crate::args::{EncodeArgs, OnOff, SolveArgs};
use crate::error::CliError;

/// Keys of the config file; each mirrors a long flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub ltl: Option<String>,
    pub k: Option<u32>,
    pub k_star: Option<bool>,
    pub k_cap: Option<u32>,
    pub history: Option<usize>,
    pub fence: Option<OnOff>,
    pub state: Option<String>,
    pub objective: Option<String>,
    pub robust: Option<String>,
    #[serde(default)]
    pub param_constraints: Vec<String>,
    pub abs: Option<String>,
    pub ten: Option<String>,
    pub backend: Option<String>,
    pub order: Option<String>,
    pub max_iterations: Option<usize>,
    pub seed: Option<u64>,
    pub global_min: Option<bool>,
    pub oracle_cap: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub const DEFAULT_K_CAP: u32 = 16;

#[derive(Debug, Clone)]
pub struct Settings {
    pub ltl: Option<String>,
    pub k: u32,
    pub k_star: bool,
    pub k_cap: u32,
    pub encode: EncodeOptions,
    pub solve: SolveConfig,
    pub explore: ExploreOptions,
}

impl Settings {
    pub fn epsilon(&self) -> Option<String> {
        self.encode.robust.as_ref().map(fmt_rat)
    }

    pub fn backend_name(&self) -> String {
        match &self.solve.backend {
            Backend::Builtin => "builtin".into(),
            Backend::Command(None) => "external".into(),
            Backend::Command(Some(c)) => format!("cmd:{c}"),
        }
    }
}

fn bad(flag: &str, value: &str, expected: &str) -> CliError {
    CliError::Usage(format!("--{flag} {value}: expected {expected}"))
}

/// `"min a, b + c"` to `["a", "b + c"]`.
pub fn parse_objective(text: &str) -> Result<Vec<String>, CliError> {
    let t = text.trim();
    let body = t
        .strip_prefix("min")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| bad("objective", text, "\"min name[,name...]\""))?;
    let parts: Vec<String> = body.split(',').map(|s| s.trim().to_string()).collect();
    if parts.iter().any(String::is_empty) {
        return Err(bad("objective", text, "nonempty terms"));
    }
    Ok(parts)
}

pub fn parse_backend(text: &str) -> Result<Backend, CliError> {
    match text {
        "builtin" => Ok(Backend::Builtin),
        "external" => Ok(Backend::Command(None)),
        _ => match text.strip_prefix("cmd:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(Backend::Command(Some(cmd.trim().to_string()))),
            _ => Err(bad("backend", text, "builtin, external or cmd:<command>")),
        },
    }
}

pub fn resolve(file: &FileConfig, enc: &EncodeArgs, solve: &SolveArgs) -> Result<Settings, CliError> {
    let mut encode = EncodeOptions {
        history: enc.history.or(file.history).unwrap_or(0),
        fences: enc.fence.or(file.fence) == Some(OnOff::On),
        state: enc.state.clone().or_else(|| file.state.clone()),
        ..Default::default()
    };
    encode.param_constraints = if enc.param_constraints.is_empty() {
        file.param_constraints.clone()
    } else {
        enc.param_constraints.clone()
    };
    if let Some(a) = enc.abs.as_ref().or(file.abs.as_ref()) {
        encode.abs = match a.as_str() {
            "dnf" => AbsEncoding::Dnf,
            "cnf" => AbsEncoding::Cnf,
            "auto" => AbsEncoding::Auto,
            _ => return Err(bad("abs", a, "dnf, cnf or auto")),
        };
    }
    if let Some(t) = enc.ten.as_ref().or(file.ten.as_ref()) {
        encode.ten = match t.as_str() {
            "exact" => TenStyle::Exact,
            "latest" => TenStyle::Latest,
            _ => return Err(bad("ten", t, "exact or latest")),
        };
    }
    if let Some(r) = enc.robust.as_ref().or(file.robust.as_ref()) {
        let eps = parse_rat(r).filter(|e| *e >= tosyn_core::rational::int(0));
        encode.robust = Some(eps.ok_or_else(|| bad("robust", r, "a nonnegative number"))?);
    }
    let mut cfg = SolveConfig::default();
    if let Some(o) = enc.objective.as_ref().or(file.objective.as_ref()) {
        encode.objective = parse_objective(o)?;
        cfg.mode = ObjectiveMode::MinimizeThenStop;
    }
    if solve.global_min || file.global_min == Some(true) {
        cfg.mode = ObjectiveMode::GlobalMinimum;
    }
    if let Some(b) = solve.backend.as_ref().or(file.backend.as_ref()) {
        cfg.backend = parse_backend(b)?;
    }
    if let Some(o) = solve.order.as_ref().or(file.order.as_ref()) {
        cfg.order = match o.as_str() {
            "asc" => Order::Asc,
            "desc" => Order::Desc,
            _ => return Err(bad("order", o, "asc or desc")),
        };
    }
    if let Some(m) = solve.max_iterations.or(file.max_iterations) {
        cfg.max_iterations = m;
    }
    cfg.seed = solve.seed.or(file.seed);
    let mut explore = ExploreOptions::default();
    if let Some(c) = solve.oracle_cap.or(file.oracle_cap) {
        explore.cap = c;
    }
    let k = enc.k.or(file.k).unwrap_or(1);
    if k == 0 {
        return Err(bad("k", "0", "a positive depth"));
    }
    Ok(Settings {
        ltl: enc.ltl.clone().or_else(|| file.ltl.clone()),
        k,
        k_star: enc.k_star || file.k_star == Some(true),
        k_cap: enc.k_cap.or(file.k_cap).unwrap_or(DEFAULT_K_CAP).max(1),
        encode,
        solve: cfg,
        explore,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_syntax() {
        assert_eq!(parse_objective("min alpha1, beta1 + beta2").unwrap(), ["alpha1", "beta1 + beta2"]);
        assert!(parse_objective("max a").is_err());
        assert!(parse_objective("min a,,b").is_err());
    }

    #[test]
    fn backend_syntax() {
        assert_eq!(parse_backend("builtin").unwrap(), Backend::Builtin);
        assert_eq!(parse_backend("cmd:z3 -in").unwrap(), Backend::Command(Some("z3 -in".into())));
        assert!(parse_backend("cmd:").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let file = FileConfig::parse("k = 3\nhistory = 2\nfence = \"on\"\norder = \"desc\"\n").unwrap();
        let enc = EncodeArgs {
            k: Some(2),
            ..Default::default()
        };
        let s = resolve(&file, &enc, &SolveArgs::default()).unwrap();
        assert_eq!((s.k, s.encode.history, s.encode.fences), (2, 2, true));
        assert_eq!(s.solve.order, Order::Desc);
        assert!(FileConfig::parse("kk = 1").is_err());
    }
}
