//! `asynchp` command line: `parse`, `run` and `analyze` over `.ap` files.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage, I/O, parse or scope
//! error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis;
use crate::interp::{run_to_final_state, Outcome, DEFAULT_BUDGET};
use crate::postlist::AsynchList;
use crate::syntax::{parse_program, pretty_print, validate_scopes, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "asynchp",
    version,
    about = "Parse, run and analyze prioritized asynchronous programs"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the canonical form of a program (or its AST as JSON).
    Parse {
        file: PathBuf,
        #[arg(long)]
        emit_ast: bool,
    },
    /// Run a program and print the final global value.
    Run {
        file: PathBuf,
        /// Maximum number of rule applications.
        #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        /// Write the execution trace as JSON Lines to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also print the final store as JSON.
        #[arg(long)]
        dump_final_store: bool,
    },
    /// Report effect-free methods and dead posts as JSON.
    Analyze { file: PathBuf },
}

/// Runs the CLI on `args` (including the program name), writing to the
/// given streams, and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match config.command {
        Command::Parse { file, emit_ast } => cmd_parse(&file, emit_ast, out, err),
        Command::Run {
            file,
            budget,
            trace,
            dump_final_store,
        } => cmd_run(&file, budget, trace.as_deref(), dump_final_store, out, err),
        Command::Analyze { file } => cmd_analyze(&file, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

/// Reads, parses and scope-checks `path`, printing diagnostics on failure.
fn load(path: &Path, err: &mut dyn Write) -> std::io::Result<Option<Program>> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{}: {e}", path.display())?;
            return Ok(None);
        }
    };
    let program = match parse_program(&src) {
        Ok(p) => p,
        Err(e) => {
            writeln!(err, "{}:{e}", path.display())?;
            return Ok(None);
        }
    };
    if let Err(errors) = validate_scopes(&program) {
        for e in errors {
            writeln!(err, "{}:{e}", path.display())?;
        }
        return Ok(None);
    }
    Ok(Some(program))
}

pub fn cmd_parse(
    path: &Path,
    emit_ast: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    let Some(program) = load(path, err)? else {
        return Ok(EXIT_INPUT);
    };
    if emit_ast {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&program).expect("AST serializes")
        )?;
    } else {
        write!(out, "{}", pretty_print(&program))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StoreDump<'a> {
    global: i64,
    locals: &'a std::collections::BTreeMap<String, i64>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    kind: &'a str,
    line: u32,
    col: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'a str>,
}

pub fn cmd_run(
    path: &Path,
    budget: u64,
    trace: Option<&Path>,
    dump_final_store: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    let Some(program) = load(path, err)? else {
        return Ok(EXIT_INPUT);
    };
    let (outcome, state) = run_to_final_state::<AsynchList>(&program, budget);
    if let Some(trace_path) = trace {
        if let Err(e) = std::fs::write(trace_path, outcome.to_jsonl()) {
            writeln!(err, "{}: {e}", trace_path.display())?;
            return Ok(EXIT_INPUT);
        }
    }
    let code = match &outcome {
        Outcome::Finished { global, .. } => {
            writeln!(out, "{global}")?;
            EXIT_OK
        }
        Outcome::Failed { error, .. } => {
            let report = ErrorReport {
                kind: error.kind.as_str(),
                line: error.span.line,
                col: error.span.col,
                method: error.method.as_deref(),
            };
            writeln!(
                out,
                "{}",
                serde_json::to_string(&report).expect("error report serializes")
            )?;
            EXIT_RUNTIME
        }
    };
    if dump_final_store {
        let dump = StoreDump {
            global: state.store.global(),
            locals: state.store.locals(),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&dump).expect("store serializes")
        )?;
    }
    Ok(code)
}

pub fn cmd_analyze(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let Some(program) = load(path, err)? else {
        return Ok(EXIT_INPUT);
    };
    writeln!(out, "{}", analysis::dead_posts(&program).to_json())?;
    Ok(EXIT_OK)
}
