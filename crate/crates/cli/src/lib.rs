//! The `tosyn` command line: subcommands, flag resolution and JSON reports.
//!
//! Exit codes: 0 success (witness found and verified, valuation ok), 1 error,
//! 2 no witness at this unrolling depth, 3 a valuation failed verification.

pub mod args;
pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use tracing::info;

use tosyn_core::constraints::abs::explore_abs;
use tosyn_core::constraints::{assemble, EfQuery};
use tosyn_core::efsmt::smtlib::{query_script, sections_script};
use tosyn_core::efsmt::SolveOutcome;
use tosyn_core::monitor::compute_k_star;
use tosyn_core::oracle::{verify_augmented, Verdict};
use tosyn_core::pipeline::{monitored, synthesize, SynthesisConfig, Unrolling};
use tosyn_core::{load_system, ltl_to_buchi, parse_ltl, AugmentedSystem, Ltl, System, Valuation};

use args::{Cli, Command, SolveArgs};
use config::{resolve, FileConfig, Settings};
use error::{read, write, CliError};
use report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn emit<T: Serialize>(report: &T) {
    println!("{}", serde_json::to_string_pretty(report).expect("reports serialize"));
}

fn load_model(path: &Path) -> Result<System, CliError> {
    Ok(load_system(&read(path)?)?)
}

fn load_valuation(path: &Path) -> Result<Valuation, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: not a valuation object: {e}", path.display())))
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Monitor { .. } => "monitor",
        Command::Constraints { .. } => "constraints",
        Command::Synth { .. } => "synth",
        Command::Verify { .. } => "verify",
        Command::Export { .. } => "export",
        Command::Sweep { .. } => "sweep",
    };
    let file = match &cli.config {
        None => Ok(FileConfig::default()),
        Some(p) => read(p).and_then(|t| FileConfig::parse(&t)),
    };
    let result = file.and_then(|file| dispatch(&cli.command, &file));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            emit(&FailureReport {
                command: name.into(),
                outcome: Outcome::Error,
                error: (&e).into(),
            });
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: &Command, file: &FileConfig) -> Result<i32, CliError> {
    let none = SolveArgs::default();
    match cmd {
        Command::Validate { model } => validate(model),
        Command::Monitor { model, enc, dot } => monitor(model, &resolve(file, enc, &none)?, dot.as_deref()),
        Command::Constraints { model, enc, smt } => constraints(model, &resolve(file, enc, &none)?, smt.as_deref()),
        Command::Synth { model, enc, solve } => synth(model, &resolve(file, enc, solve)?),
        Command::Verify {
            model,
            valuation,
            enc,
            trace_out,
        } => verify(model, valuation, &resolve(file, enc, &none)?, trace_out.clone()),
        Command::Export { model, enc, out } => export(model, &resolve(file, enc, &none)?, out),
        Command::Sweep {
            model,
            enc,
            valuations,
            samples,
            seed,
        } => sweep(model, &resolve(file, enc, &none)?, valuations.as_deref(), *samples, *seed),
    }
}

fn validate(path: &Path) -> Result<i32, CliError> {
    let text = read(path)?;
    match load_system(&text) {
        Ok(s) => {
            eprintln!(
                "valid: {} components, {} clocks, {} interactions, {} parameters",
                s.components.len(),
                s.clocks().len(),
                s.interactions.len(),
                s.parameters.len()
            );
            emit(&ValidateReport {
                command: "validate".into(),
                valid: true,
                components: s.components.len(),
                clocks: s.clocks().into_iter().map(String::from).collect(),
                interactions: s.interaction_names().map(String::from).collect(),
                parameters: s.parameters.iter().map(|(k, r)| (k.clone(), [r.lo, r.hi])).collect(),
                mode: format!("{:?}", s.mode).to_lowercase(),
                error: None,
            });
            Ok(EXIT_OK)
        }
        Err(e) => {
            let e = CliError::from(e);
            eprintln!("invalid [{}]: {e}", e.module());
            emit(&ValidateReport {
                command: "validate".into(),
                valid: false,
                components: 0,
                clocks: vec![],
                interactions: vec![],
                parameters: Default::default(),
                mode: String::new(),
                error: Some((&e).into()),
            });
            Ok(EXIT_ERROR)
        }
    }
}

fn negated_automaton(sys: &System, text: &str) -> Result<tosyn_core::BuchiAutomaton, CliError> {
    let phi = parse_ltl(text)?;
    phi.check_atoms(sys.interaction_names())?;
    Ok(ltl_to_buchi(&Ltl::not(phi)))
}

/// Unrolling depth and, when asked for, the bound it was derived from.
fn depth(sys: &System, st: &Settings) -> Result<(u32, Option<String>), CliError> {
    let Some(text) = st.ltl.as_deref().filter(|_| st.k_star) else {
        return Ok((st.k, None));
    };
    let b = negated_automaton(sys, text)?;
    match compute_k_star(sys, &b) {
        Ok(k) => Ok(((k.min(st.k_cap as u128)) as u32, Some(k.to_string()))),
        Err(_) => Ok((st.k_cap, None)),
    }
}

fn augmented(sys: &System, st: &Settings) -> Result<(AugmentedSystem, u32, Option<String>), CliError> {
    let (k, k_star) = depth(sys, st)?;
    Ok((monitored(sys, st.ltl.as_deref(), k)?, k, k_star))
}

fn monitor(path: &Path, st: &Settings, dot: Option<&Path>) -> Result<i32, CliError> {
    let sys = load_model(path)?;
    let text = st
        .ltl
        .as_deref()
        .ok_or_else(|| CliError::Usage("monitor needs --ltl".into()))?;
    let b = negated_automaton(&sys, text)?;
    let (k, _) = depth(&sys, st)?;
    let m = tosyn_core::build_monitor(&b, k);
    let k_star = compute_k_star(&sys, &b).ok().map(|v| v.to_string());
    if let Some(p) = dot {
        write(p, &m.to_dot())?;
    }
    let mut edges = Vec::new();
    for (l, succ) in m.edges.iter().enumerate() {
        for (s, t) in succ.iter().enumerate() {
            edges.push(MonitorEdge {
                from: m.names[l].clone(),
                symbol: m.symbols[s].clone(),
                to: m.names[*t].clone(),
            });
        }
    }
    eprintln!(
        "monitor: {} locations at k={k}, risk {}",
        m.num_locations(),
        if m.risk.is_some() { "reachable" } else { "absent" }
    );
    emit(&MonitorReport {
        command: "monitor".into(),
        k,
        k_star,
        buchi_states: b.num_states(),
        initial: m.names[m.initial].clone(),
        locations: m.names.clone(),
        risk: m.risk.map(|r| m.names[r].clone()),
        symbols: m.symbols.clone(),
        edges,
        dot_file: dot.map(|p| p.display().to_string()),
    });
    Ok(EXIT_OK)
}

fn query_stats(q: &EfQuery, assemble: Duration) -> Statistics {
    let i = &q.info;
    Statistics {
        abs_states: i.abs_states,
        monitor_locations: i.monitor_locations,
        fence_nodes: i.fence_nodes,
        exists_ints: i.exists_ints,
        forall_reals: i.forall_reals,
        forall_bools: i.forall_bools,
        hyp_size: i.hyp_size,
        goal_size: i.goal_size,
        assemble_ms: ms(assemble),
        ..Default::default()
    }
}

fn constraints(path: &Path, st: &Settings, smt: Option<&Path>) -> Result<i32, CliError> {
    let sys = load_model(path)?;
    let (aug, _, _) = augmented(&sys, st)?;
    let t = Instant::now();
    let q = assemble(&aug, &st.encode)?;
    let stats = query_stats(&q, t.elapsed());
    if let Some(p) = smt {
        write(p, &sections_script(&q))?;
    }
    eprintln!(
        "query: {} parameters, {} real and {} Boolean universals, {} abstract states",
        stats.exists_ints, stats.forall_reals, stats.forall_bools, stats.abs_states
    );
    emit(&ConstraintsReport {
        command: "constraints".into(),
        statistics: stats,
        sections: q
            .sections
            .iter()
            .map(|(n, f)| SectionSize {
                name: n.clone(),
                size: f.size(),
            })
            .collect(),
        smt_file: smt.map(|p| p.display().to_string()),
    });
    Ok(EXIT_OK)
}

fn echo(st: &Settings, k: u32, k_star: Option<String>) -> ConfigEcho {
    ConfigEcho {
        k,
        k_star,
        k_hist: st.encode.history,
        fences: st.encode.fences,
        epsilon: st.epsilon(),
        objective: st.encode.objective.clone(),
        backend: st.backend_name(),
        ltl: st.ltl.clone(),
        state: st.encode.state.clone(),
    }
}

fn synth(path: &Path, st: &Settings) -> Result<i32, CliError> {
    let start = Instant::now();
    let sys = load_model(path)?;
    let (k, k_star) = depth(&sys, st)?;
    let mut report = SynthReport {
        command: "synth".into(),
        outcome: Outcome::Error,
        valuation: None,
        verdict: None,
        statistics: Statistics::default(),
        config: echo(st, k, k_star),
        hint: None,
        error: None,
    };
    let cfg = SynthesisConfig {
        unrolling: Unrolling::Fixed(k),
        encode: st.encode.clone(),
        solve: st.solve.clone(),
        explore: st.explore,
    };
    let s = match synthesize(&sys, st.ltl.as_deref(), &cfg) {
        Ok(s) => s,
        Err(e) => {
            let e = CliError::from(e);
            eprintln!("error [{}]: {e}", e.module());
            report.error = Some((&e).into());
            report.statistics.wall_ms = ms(start.elapsed());
            emit(&report);
            return Ok(EXIT_ERROR);
        }
    };
    let mut stats = query_stats(&s.query, s.assemble_time);
    stats.iterations = s.outcome.iterations();
    stats.search_nodes = s.trace.search_nodes;
    stats.e_solver_ms = ms(s.trace.e_time);
    stats.f_solver_ms = ms(s.trace.f_time);
    stats.verify_ms = ms(s.verify_time);
    if let SolveOutcome::Witness { learned, .. } = &s.outcome {
        stats.learned = *learned;
    }
    stats.wall_ms = ms(start.elapsed());
    let code = match (&s.outcome, &s.verdict) {
        (SolveOutcome::Witness { valuation, .. }, Some(v)) => {
            report.valuation = Some(valuation.clone());
            report.verdict = Some(v.into());
            if v.is_ok() {
                report.outcome = Outcome::Witness;
                eprintln!(
                    "witness {valuation} after {} iterations in {:.1} ms; oracle ok",
                    stats.iterations, stats.wall_ms
                );
                EXIT_OK
            } else {
                let msg = format!("the oracle rejected the candidate {valuation}: {v:?}");
                eprintln!("error [oracle]: {msg}");
                report.error = Some(ErrorReport {
                    module: "oracle".into(),
                    message: msg,
                });
                EXIT_ERROR
            }
        }
        (SolveOutcome::Exhausted { .. }, _) => {
            report.outcome = Outcome::InfeasibleAtK;
            let hint = format!("no valuation works with the monitor unrolled {k} time(s); try a larger --k");
            eprintln!("UNKNOWN: {hint}");
            report.hint = Some(hint);
            EXIT_UNKNOWN
        }
        (SolveOutcome::IterationCapped { iterations }, _) => {
            report.outcome = Outcome::Unknown;
            let hint = format!("stopped after {iterations} iterations; raise --max-iterations");
            eprintln!("UNKNOWN: {hint}");
            report.hint = Some(hint);
            EXIT_UNKNOWN
        }
        (SolveOutcome::BackendError { message, .. }, _) => {
            let e = CliError::Solver(message.clone());
            eprintln!("error [efsmt]: {e}");
            report.error = Some((&e).into());
            EXIT_ERROR
        }
        (SolveOutcome::Witness { .. }, None) => unreachable!("witnesses are always verified"),
    };
    info!(?code, "synth done");
    report.statistics = stats;
    emit(&report);
    Ok(code)
}

fn verify(model: &Path, vpath: &Path, st: &Settings, trace_out: Option<PathBuf>) -> Result<i32, CliError> {
    let sys = load_model(model)?;
    let v = load_valuation(vpath)?;
    v.check(&sys)?;
    let (aug, _, _) = augmented(&sys, st)?;
    let verdict = verify_augmented(&aug, &v, &st.explore)?;
    let mut rep = VerdictReport::from(&verdict);
    let code = match &verdict {
        Verdict::Ok { states, .. } => {
            eprintln!("ok: {v} ({states} symbolic states)");
            EXIT_OK
        }
        Verdict::Fails { reason, path, .. } => {
            let out = trace_out.unwrap_or_else(|| {
                let mut p = vpath.as_os_str().to_owned();
                p.push(".trace.json");
                PathBuf::from(p)
            });
            let body = serde_json::json!({ "valuation": v, "reason": reason, "trace": path });
            write(&out, &serde_json::to_string_pretty(&body).expect("trace serializes"))?;
            let words: Vec<&str> = path.iter().map(|s| s.interaction.as_str()).collect();
            eprintln!("FAILED ({reason:?}) after {}; trace in {}", words.join(" "), out.display());
            rep.trace_file = Some(out.display().to_string());
            EXIT_FAILED
        }
    };
    emit(&VerifyReport {
        command: "verify".into(),
        valuation: v,
        verdict: rep,
    });
    Ok(code)
}

fn export(path: &Path, st: &Settings, out: &Path) -> Result<i32, CliError> {
    let sys = load_model(path)?;
    let (aug, _, _) = augmented(&sys, st)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), CliError> {
        let p = out.join(name);
        write(&p, &text)?;
        files.push(p.display().to_string());
        Ok(())
    };
    if let (Some(text), Some(m)) = (st.ltl.as_deref(), &aug.monitor) {
        put("buchi.dot", negated_automaton(&sys, text)?.to_dot())?;
        put("monitor.dot", m.to_dot())?;
    }
    let reach = explore_abs(&aug, st.encode.history, st.encode.abs_cap)?;
    put("abs.dot", reach.to_dot(&aug))?;
    let q = assemble(&aug, &st.encode)?;
    put("invariants.smt2", sections_script(&q))?;
    put("query.smt2", query_script(&q))?;
    eprintln!("wrote {} files to {}", files.len(), out.display());
    emit(&ExportReport {
        command: "export".into(),
        files,
    });
    Ok(EXIT_OK)
}

fn sweep(
    path: &Path,
    st: &Settings,
    valuations: Option<&Path>,
    samples: Option<usize>,
    seed: u64,
) -> Result<i32, CliError> {
    let sys = load_model(path)?;
    let vals: Vec<Valuation> = match (valuations, samples) {
        (Some(p), _) => serde_json::from_str(&read(p)?)
            .map_err(|e| CliError::Usage(format!("{}: not a valuation array: {e}", p.display())))?,
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    Valuation(
                        sys.parameters
                            .iter()
                            .map(|(k, r)| (k.clone(), rng.gen_range(r.lo..=r.hi)))
                            .collect(),
                    )
                })
                .collect()
        }
        (None, None) => return Err(CliError::Usage("sweep needs --valuations or --samples".into())),
    };
    for v in &vals {
        v.check(&sys)?;
    }
    let (aug, _, _) = augmented(&sys, st)?;
    let results: Vec<SweepEntry> = vals
        .par_iter()
        .map(|v| {
            let verdict = verify_augmented(&aug, v, &st.explore)?;
            let (status, reason, states) = match verdict {
                Verdict::Ok { states, .. } => (Status::Ok, None, states),
                Verdict::Fails { reason, states, .. } => (Status::Failed, Some(reason), states),
            };
            Ok(SweepEntry {
                valuation: v.clone(),
                status,
                reason,
                states,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let ok = results.iter().filter(|r| r.status == Status::Ok).count();
    let failed = results.len() - ok;
    eprintln!("sweep: {ok} ok, {failed} failed of {}", results.len());
    emit(&SweepReport {
        command: "sweep".into(),
        total: results.len(),
        ok,
        failed,
        results,
    });
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
