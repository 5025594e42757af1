//! Execution trace events and their JSON Lines encoding.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::syntax::Priority;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Post,
    Dispatch,
    RunCall,
    Return,
    MethodStart,
    MethodEnd,
    AssignGlobal,
    ProvidedFail,
    Error,
}

impl TraceKind {
    /// Kinds that push a frame on the method stack.
    pub fn pushes_frame(self) -> bool {
        matches!(
            self,
            TraceKind::MethodStart | TraceKind::RunCall | TraceKind::Dispatch
        )
    }
}

/// One trace line. `value` is the bound argument for post/dispatch/run-call
/// and the new global for assign-global.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub kind: TraceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Priority>,
}

#[derive(Serialize)]
struct FinishedLine {
    kind: &'static str,
    global: i64,
}

#[derive(Serialize)]
struct FailedLine<'a> {
    kind: &'static str,
    error: &'a str,
    line: u32,
    col: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'a str>,
}

/// Renders the trace of an outcome as JSON Lines, one event per line,
/// followed by a closing `finished` (or `failed`) line.
pub fn to_jsonl(outcome: &Outcome) -> String {
    let mut out = String::new();
    for ev in outcome.trace() {
        writeln!(
            out,
            "{}",
            serde_json::to_string(ev).expect("trace events serialize")
        )
        .unwrap();
    }
    let last = match outcome {
        Outcome::Finished { global, .. } => serde_json::to_string(&FinishedLine {
            kind: "finished",
            global: *global,
        }),
        Outcome::Failed { error, .. } => serde_json::to_string(&FailedLine {
            kind: "failed",
            error: error.kind.as_str(),
            line: error.span.line,
            col: error.span.col,
            method: error.method.as_deref(),
        }),
    };
    writeln!(out, "{}", last.expect("summary line serializes")).unwrap();
    out
}

/// Parses the event lines of a JSON Lines trace, skipping the summary line.
pub fn parse_jsonl(text: &str) -> Result<Vec<TraceEvent>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .filter(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap_or_default();
            !matches!(
                v.get("kind").and_then(|k| k.as_str()),
                Some("finished" | "failed")
            )
        })
        .map(serde_json::from_str)
        .collect()
}

/// Replays frame pushes and pops recorded in `trace`.
///
/// Checks that every `return` pops the method on top of the stack, that
/// `method-end` follows its own return at depth 0, that dispatches start
/// from an empty stack, and, if `finished` is set, that the stack ends
/// empty.
pub fn check_stack_discipline(trace: &[TraceEvent], finished: bool) -> Result<(), String> {
    let mut stack: Vec<&str> = Vec::new();
    let mut last_popped: Option<&str> = None;
    for ev in trace {
        let m = ev.method.as_deref();
        match ev.kind {
            TraceKind::Dispatch if !stack.is_empty() => {
                return Err(format!(
                    "event {}: dispatch with {} frames active",
                    ev.seq,
                    stack.len()
                ));
            }
            k if k.pushes_frame() => {
                stack.push(m.ok_or_else(|| format!("event {}: frame without method", ev.seq))?)
            }
            TraceKind::Return => match stack.pop() {
                Some(top) if Some(top) == m => last_popped = Some(top),
                Some(top) => {
                    return Err(format!(
                        "event {}: return from {m:?} while {top} is on top",
                        ev.seq
                    ))
                }
                None => return Err(format!("event {}: return with an empty stack", ev.seq)),
            },
            TraceKind::MethodEnd if !stack.is_empty() || last_popped != m => {
                return Err(format!(
                    "event {}: method-end of {m:?} not at top level",
                    ev.seq
                ));
            }
            _ => {}
        }
    }
    if finished && !stack.is_empty() {
        return Err(format!("finished with {} frames on the stack", stack.len()));
    }
    Ok(())
}

/// Replays `post` and `dispatch` events against a naive priority queue and
/// checks that each dispatch takes the lowest-rank, earliest-posted task,
/// with the value captured when it was posted. If `finished` is set, no
/// task may remain.
pub fn check_dispatch_order(trace: &[TraceEvent], finished: bool) -> Result<(), String> {
    let mut pending: Vec<(u8, usize, &TraceEvent)> = Vec::new();
    for (i, ev) in trace.iter().enumerate() {
        match ev.kind {
            TraceKind::Post => {
                let p = ev
                    .priority
                    .ok_or_else(|| format!("event {}: post without priority", ev.seq))?;
                pending.push((p.rank(), i, ev));
            }
            TraceKind::Dispatch => {
                let best = (0..pending.len())
                    .min_by_key(|&j| (pending[j].0, pending[j].1))
                    .ok_or_else(|| format!("event {}: dispatch with nothing posted", ev.seq))?;
                let (_, _, post) = pending.remove(best);
                if post.method != ev.method
                    || post.value != ev.value
                    || post.priority != ev.priority
                {
                    return Err(format!(
                        "event {}: dispatched {:?}({:?}) but expected {:?}({:?}) posted at event {}",
                        ev.seq, ev.method, ev.value, post.method, post.value, post.seq
                    ));
                }
            }
            _ => {}
        }
    }
    if finished && !pending.is_empty() {
        return Err(format!(
            "finished with {} tasks still posted",
            pending.len()
        ));
    }
    Ok(())
}
