//! Big-step evaluator for statements, methods and programs, plus the
//! priority dispatch loop that drains the post list.
//!
//! Semantics worth knowing before reading a trace:
//!
//! * Every method runs once at startup, in declaration order, with its
//!   local at its current store value (0 initially). There is no `main`.
//! * `synch(m(e), p)` evaluates `e` when the post happens; the snapshot is
//!   bound to `m`'s local when the task is dispatched.
//! * `return()` pops the current frame and skips the rest of the body. A
//!   body that falls off its end pops its frame implicitly.
//! * Each method has a single local cell, so a recursive `run` overwrites
//!   the caller's local.
//! * `provided e` with `e == 0` has no successor state and is reported as
//!   a `provided-failed` runtime error.

mod exec;
pub mod trace;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::postlist::{AsynchList, OracleQueue, PostQueue};
use crate::syntax::{BinOp, Expr, ExprKind, Priority, Program, Span, UnOp};

pub use exec::{Control, Interpreter};
pub use trace::{check_dispatch_order, check_stack_discipline, TraceEvent, TraceKind};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeErrorKind {
    ProvidedFailed,
    DivisionByZero,
    ArithOverflow,
    StepBudgetExhausted,
}

impl RuntimeErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuntimeErrorKind::ProvidedFailed => "provided-failed",
            RuntimeErrorKind::DivisionByZero => "division-by-zero",
            RuntimeErrorKind::ArithOverflow => "arith-overflow",
            RuntimeErrorKind::StepBudgetExhausted => "step-budget-exhausted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: Span,
    /// Active method when the error occurred.
    pub method: Option<String>,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.span, self.kind.as_str())?;
        if let Some(m) = &self.method {
            write!(f, " in {m}")?;
        }
        Ok(())
    }
}

/// Values of the global and of each method's single local.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Store {
    global: i64,
    locals: BTreeMap<String, i64>,
}

impl Store {
    /// Global and every local start at 0.
    pub fn new(program: &Program) -> Self {
        Store {
            global: 0,
            locals: program
                .methods
                .iter()
                .map(|m| (m.name.clone(), 0))
                .collect(),
        }
    }

    pub fn global(&self) -> i64 {
        self.global
    }

    pub fn set_global(&mut self, v: i64) {
        self.global = v;
    }

    pub fn local(&self, method: &str) -> Option<i64> {
        self.locals.get(method).copied()
    }

    pub fn set_local(&mut self, method: &str, v: i64) {
        match self.locals.get_mut(method) {
            Some(cell) => *cell = v,
            None => panic!("no local cell for undeclared method {method}"),
        }
    }

    pub fn locals(&self) -> &BTreeMap<String, i64> {
        &self.locals
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MethodStack {
    frames: Vec<String>,
}

impl MethodStack {
    pub fn peek(&self) -> Option<&str> {
        self.frames.last().map(String::as_str)
    }

    pub fn push(&mut self, method: &str) {
        self.frames.push(method.to_string());
    }

    pub fn pop(&mut self) -> Option<String> {
        self.frames.pop()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Store, post list and method stack, plus the bookkeeping the evaluator
/// needs (step counter, trace, next post number).
#[derive(Clone, Debug)]
pub struct MachineState<Q = AsynchList> {
    pub store: Store,
    pub postlist: Q,
    pub stack: MethodStack,
    pub step_count: u64,
    pub budget: u64,
    pub trace: Vec<TraceEvent>,
    next_post: u64,
}

impl<Q: PostQueue> MachineState<Q> {
    pub fn new(program: &Program, budget: u64) -> Self {
        MachineState {
            store: Store::new(program),
            postlist: Q::default(),
            stack: MethodStack::default(),
            step_count: 0,
            budget,
            trace: Vec::new(),
            next_post: 1,
        }
    }
}

impl<Q> MachineState<Q> {
    /// Consumes one rule application from the budget.
    fn tick(&mut self, span: Span) -> Result<(), RuntimeError> {
        if self.step_count >= self.budget {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::StepBudgetExhausted,
                span,
                method: self.stack.peek().map(str::to_string),
            });
        }
        self.step_count += 1;
        Ok(())
    }

    fn next_post_seq(&mut self) -> u64 {
        let seq = self.next_post;
        self.next_post += 1;
        seq
    }

    fn emit(
        &mut self,
        kind: TraceKind,
        method: Option<&str>,
        value: Option<i64>,
        priority: Option<Priority>,
    ) {
        let seq = self.trace.len() as u64 + 1;
        self.trace.push(TraceEvent {
            seq,
            kind,
            method: method.map(str::to_string),
            value,
            priority,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Finished {
        global: i64,
        trace: Vec<TraceEvent>,
    },
    Failed {
        error: RuntimeError,
        trace: Vec<TraceEvent>,
    },
}

impl Outcome {
    pub fn trace(&self) -> &[TraceEvent] {
        match self {
            Outcome::Finished { trace, .. } | Outcome::Failed { trace, .. } => trace,
        }
    }

    pub fn final_global(&self) -> Option<i64> {
        match self {
            Outcome::Finished { global, .. } => Some(*global),
            Outcome::Failed { .. } => None,
        }
    }

    /// `"finished"` or the runtime error kind.
    pub fn kind_str(&self) -> &'static str {
        match self {
            Outcome::Finished { .. } => "finished",
            Outcome::Failed { error, .. } => error.kind.as_str(),
        }
    }

    pub fn error(&self) -> Option<&RuntimeError> {
        match self {
            Outcome::Finished { .. } => None,
            Outcome::Failed { error, .. } => Some(error),
        }
    }

    pub fn to_jsonl(&self) -> String {
        trace::to_jsonl(self)
    }
}

/// Evaluates `e` over the global and the local of method `active`.
///
/// Comparisons yield 1 or 0. `and`/`or` evaluate both sides and combine by
/// nonzero-ness. Division truncates toward zero; all arithmetic is checked.
pub fn eval_expr(
    e: &Expr,
    store: &Store,
    global_name: &str,
    active: &str,
) -> Result<i64, RuntimeError> {
    let fail = |kind, span| RuntimeError {
        kind,
        span,
        method: Some(active.to_string()),
    };
    match &e.kind {
        ExprKind::Int(v) => Ok(*v),
        ExprKind::Var(name) if name == global_name => Ok(store.global()),
        ExprKind::Var(name) => Ok(store.local(active).unwrap_or_else(|| {
            panic!("variable {name} evaluated outside a declared method ({active})")
        })),
        ExprKind::Unary(op, operand) => {
            let v = eval_expr(operand, store, global_name, active)?;
            match op {
                UnOp::Neg => v
                    .checked_neg()
                    .ok_or_else(|| fail(RuntimeErrorKind::ArithOverflow, e.span)),
                UnOp::Not => Ok((v == 0) as i64),
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let l = eval_expr(lhs, store, global_name, active)?;
            let r = eval_expr(rhs, store, global_name, active)?;
            let overflow = || fail(RuntimeErrorKind::ArithOverflow, e.span);
            match op {
                BinOp::Add => l.checked_add(r).ok_or_else(overflow),
                BinOp::Sub => l.checked_sub(r).ok_or_else(overflow),
                BinOp::Mul => l.checked_mul(r).ok_or_else(overflow),
                BinOp::Div if r == 0 => Err(fail(RuntimeErrorKind::DivisionByZero, e.span)),
                BinOp::Div => l.checked_div(r).ok_or_else(overflow),
                BinOp::Rem if r == 0 => Err(fail(RuntimeErrorKind::DivisionByZero, e.span)),
                // i64::MIN % -1 is 0, which is representable.
                BinOp::Rem => Ok(l.wrapping_rem(r)),
                BinOp::Eq => Ok((l == r) as i64),
                BinOp::Ne => Ok((l != r) as i64),
                BinOp::Lt => Ok((l < r) as i64),
                BinOp::Le => Ok((l <= r) as i64),
                BinOp::Gt => Ok((l > r) as i64),
                BinOp::Ge => Ok((l >= r) as i64),
                BinOp::And => Ok((l != 0 && r != 0) as i64),
                BinOp::Or => Ok((l != 0 || r != 0) as i64),
            }
        }
    }
}

/// Runs a scope-valid program to completion with the marker-based post list.
pub fn run_program(program: &Program, budget: u64) -> Outcome {
    run_program_with::<AsynchList>(program, budget)
}

/// Same as [`run_program`] but scheduling through the brute-force oracle.
pub fn run_program_oracle(program: &Program, budget: u64) -> Outcome {
    run_program_with::<OracleQueue>(program, budget)
}

pub fn run_program_with<Q: PostQueue>(program: &Program, budget: u64) -> Outcome {
    run_to_final_state::<Q>(program, budget).0
}

/// Runs the program and also hands back the final machine state (store,
/// post list and stack as they were when execution stopped). The trace is
/// moved into the outcome.
pub fn run_to_final_state<Q: PostQueue>(
    program: &Program,
    budget: u64,
) -> (Outcome, MachineState<Q>) {
    let interp = Interpreter::new(program);
    let mut st = MachineState::<Q>::new(program, budget);
    let result = interp.run(&mut st);
    let trace = std::mem::take(&mut st.trace);
    let outcome = match result {
        Ok(()) => Outcome::Finished {
            global: st.store.global(),
            trace,
        },
        Err(error) => Outcome::Failed { error, trace },
    };
    (outcome, st)
}
