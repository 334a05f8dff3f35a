//! Satisfiability checks delegated to an external SMT-LIB solver process.

use std::io::Write;
use std::process::{Command, Stdio};

use super::fsolver::FResult;
use super::smtlib::{parse_model, parse_sexps, script, Sexp};
use crate::constraints::formula::{Assignment, Formula, Val, Vars};
use crate::rational::Rat;

/// Environment variable overriding the solver command line.
pub const SMT_CMD_ENV: &str = "TOSYN_SMT_CMD";
pub const DEFAULT_SMT_CMD: &str = "z3 -in";

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("cannot start solver `{cmd}`: {source}")]
    Spawn {
        cmd: String,
        source: std::io::Error,
    },
    #[error("solver I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver answered `{0}`")]
    Unknown(String),
    #[error("unreadable solver output: {0}")]
    Output(String),
}

/// Resolves the command line: explicit argument, then the environment, then the default.
pub fn resolve_command(explicit: Option<&str>) -> Vec<String> {
    let line = explicit
        .map(str::to_string)
        .or_else(|| std::env::var(SMT_CMD_ENV).ok())
        .unwrap_or_else(|| DEFAULT_SMT_CMD.to_string());
    line.split_whitespace().map(str::to_string).collect()
}

/// Checks `f` with the solver started by `cmd`.
pub fn check_sat_external(
    f: &Formula,
    vars: &Vars,
    cmd: &[String],
) -> Result<FResult, ExternalError> {
    let text = script(f, vars);
    let (prog, args) = cmd
        .split_first()
        .ok_or_else(|| ExternalError::Output("empty solver command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| ExternalError::Spawn {
            cmd: cmd.join(" "),
            source,
        })?;
    child
        .stdin
        .take()
        .expect("stdin is piped")
        .write_all(text.as_bytes())?;
    let out = child.wait_with_output()?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let sexps = parse_sexps(&stdout).map_err(ExternalError::Output)?;
    match sexps.first() {
        Some(Sexp::Atom(a)) if a == "unsat" => Ok(FResult::Unsat),
        Some(Sexp::Atom(a)) if a == "sat" => {
            let model = sexps
                .get(1)
                .ok_or_else(|| ExternalError::Output("missing model".into()))?;
            let entries = parse_model(model).map_err(ExternalError::Output)?;
            let mut asg = Assignment::default();
            for (name, val) in entries {
                if let Some(id) = vars.id(&name) {
                    asg.set(id, val);
                }
            }
            for v in f.free_vars() {
                if asg.get(v).is_none() {
                    let d = if vars.kind(v).is_bool() {
                        Val::Bool(false)
                    } else {
                        Val::Num(Rat::from_integer(0))
                    };
                    asg.set(v, d);
                }
            }
            Ok(FResult::Sat(asg))
        }
        Some(Sexp::Atom(a)) => Err(ExternalError::Unknown(a.clone())),
        _ => Err(ExternalError::Output(stdout.chars().take(200).collect())),
    }
}
