//! The evaluator proper. Nested blocks, loops and calls are kept on an
//! explicit work stack rather than the native one, so recursion depth in
//! the guest program is bounded only by the step budget.

use std::collections::HashMap;

use super::{eval_expr, MachineState, RuntimeError, RuntimeErrorKind, TraceKind};
use crate::postlist::{AsynchNode, PostQueue};
use crate::syntax::{Block, Expr, Method, Program, Span, Stmt, StmtKind};

/// How a statement finished: normally, or by a `return()` that popped the
/// enclosing frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Next,
    Returned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FrameKind {
    TopLevel,
    Run,
    Dispatch,
}

enum Work<'a> {
    Stmt(&'a Stmt),
    /// Remaining statements of a block.
    Block(&'a [Stmt]),
    /// Re-test of a `while` condition.
    Loop {
        cond: &'a Expr,
        body: &'a Block,
        span: Span,
    },
    /// End of a method body: implicit return.
    FrameEnd(FrameKind),
}

pub struct Interpreter<'p> {
    program: &'p Program,
    methods: HashMap<&'p str, &'p Method>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program) -> Self {
        let methods = program
            .methods
            .iter()
            .map(|m| (m.name.as_str(), m))
            .collect();
        Interpreter { program, methods }
    }

    fn method(&self, name: &str) -> &'p Method {
        self.methods
            .get(name)
            .copied()
            .unwrap_or_else(|| panic!("call to undeclared method {name}"))
    }

    fn active<Q>(st: &MachineState<Q>) -> String {
        st.stack
            .peek()
            .expect("statement executed with an empty method stack")
            .to_string()
    }

    pub fn eval<Q>(&self, e: &Expr, st: &MachineState<Q>) -> Result<i64, RuntimeError> {
        eval_expr(e, &st.store, &self.program.global, &Self::active(st))
    }

    /// Executes one statement to completion in the current frame.
    ///
    /// # Panics
    ///
    /// If the method stack is empty.
    pub fn exec_stmt<Q: PostQueue>(
        &self,
        s: &Stmt,
        st: &mut MachineState<Q>,
    ) -> Result<Control, RuntimeError> {
        assert!(!st.stack.is_empty(), "exec_stmt requires an active method");
        self.drive(vec![Work::Stmt(s)], st)
    }

    /// Pushes `m`, runs its body and pops it again (explicitly via
    /// `return()` or implicitly at the end).
    pub fn run_top_level_method<Q: PostQueue>(
        &self,
        m: &Method,
        st: &mut MachineState<Q>,
    ) -> Result<(), RuntimeError> {
        st.tick(m.span)?;
        st.stack.push(&m.name);
        st.emit(TraceKind::MethodStart, Some(&m.name), None, None);
        self.drive(
            vec![
                Work::FrameEnd(FrameKind::TopLevel),
                Work::Block(&m.body.stmts),
            ],
            st,
        )?;
        Ok(())
    }

    /// Removes and runs the head of the post list until it is empty.
    pub fn dispatch_loop<Q: PostQueue>(
        &self,
        st: &mut MachineState<Q>,
    ) -> Result<(), RuntimeError> {
        debug_assert!(st.stack.is_empty());
        while let Some(node) = st.postlist.take() {
            let m = self.method(&node.method);
            st.tick(m.span)?;
            st.store.set_local(&m.name, node.arg_value);
            st.stack.push(&m.name);
            st.emit(
                TraceKind::Dispatch,
                Some(&m.name),
                Some(node.arg_value),
                Some(node.priority),
            );
            self.drive(
                vec![
                    Work::FrameEnd(FrameKind::Dispatch),
                    Work::Block(&m.body.stmts),
                ],
                st,
            )?;
        }
        Ok(())
    }

    /// Every method in declaration order, then the dispatch loop.
    pub fn run<Q: PostQueue>(&self, st: &mut MachineState<Q>) -> Result<(), RuntimeError> {
        for m in &self.program.methods {
            self.run_top_level_method(m, st)?;
        }
        self.dispatch_loop(st)
    }

    fn drive<'a, Q: PostQueue>(
        &'a self,
        mut work: Vec<Work<'a>>,
        st: &mut MachineState<Q>,
    ) -> Result<Control, RuntimeError> {
        match self.drive_inner(&mut work, st) {
            Ok(control) => Ok(control),
            Err(err) => {
                let kind = match err.kind {
                    RuntimeErrorKind::ProvidedFailed => TraceKind::ProvidedFail,
                    _ => TraceKind::Error,
                };
                st.emit(kind, err.method.as_deref(), None, None);
                Err(err)
            }
        }
    }

    fn drive_inner<'a, Q: PostQueue>(
        &'a self,
        work: &mut Vec<Work<'a>>,
        st: &mut MachineState<Q>,
    ) -> Result<Control, RuntimeError> {
        while let Some(item) = work.pop() {
            match item {
                Work::Block([]) => {}
                Work::Block([first, rest @ ..]) => {
                    if !rest.is_empty() {
                        work.push(Work::Block(rest));
                    }
                    work.push(Work::Stmt(first));
                }
                Work::Loop { cond, body, span } => {
                    st.tick(span)?;
                    if self.eval(cond, st)? != 0 {
                        work.push(Work::Loop { cond, body, span });
                        work.push(Work::Block(&body.stmts));
                    }
                }
                Work::FrameEnd(kind) => self.end_frame(kind, st),
                Work::Stmt(s) => {
                    st.tick(s.span)?;
                    if self.step(s, st, work)? == Control::Returned {
                        return Ok(Control::Returned);
                    }
                }
            }
        }
        Ok(Control::Next)
    }

    fn end_frame<Q>(&self, kind: FrameKind, st: &mut MachineState<Q>) {
        let m = st
            .stack
            .pop()
            .expect("frame end with an empty method stack");
        st.emit(TraceKind::Return, Some(&m), None, None);
        if kind == FrameKind::TopLevel {
            st.emit(TraceKind::MethodEnd, Some(&m), None, None);
        }
    }

    /// Discards pending work up to and including the nearest frame end of
    /// the method `m` that just returned. Returns false when no frame end is
    /// pending, i.e. the return escapes the statement `drive` was given.
    fn unwind<Q>(work: &mut Vec<Work<'_>>, st: &mut MachineState<Q>, m: &str) -> bool {
        while let Some(item) = work.pop() {
            if let Work::FrameEnd(kind) = item {
                if kind == FrameKind::TopLevel {
                    st.emit(TraceKind::MethodEnd, Some(m), None, None);
                }
                return true;
            }
        }
        false
    }

    /// Applies the rule for a single statement. Compound statements push
    /// their continuation onto `work` instead of recursing.
    fn step<'a, Q: PostQueue>(
        &'a self,
        s: &'a Stmt,
        st: &mut MachineState<Q>,
        work: &mut Vec<Work<'a>>,
    ) -> Result<Control, RuntimeError> {
        match &s.kind {
            StmtKind::AssignGlobal(_, e) => {
                let v = self.eval(e, st)?;
                st.store.set_global(v);
                let active = Self::active(st);
                st.emit(TraceKind::AssignGlobal, Some(&active), Some(v), None);
            }
            StmtKind::AssignLocal(_, e) => {
                let v = self.eval(e, st)?;
                let active = Self::active(st);
                st.store.set_local(&active, v);
            }
            StmtKind::Provided(e) => {
                if self.eval(e, st)? == 0 {
                    return Err(RuntimeError {
                        kind: RuntimeErrorKind::ProvidedFailed,
                        span: s.span,
                        method: Some(Self::active(st)),
                    });
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let branch = if self.eval(cond, st)? != 0 {
                    then_branch
                } else {
                    else_branch
                };
                work.push(Work::Block(&branch.stmts));
            }
            StmtKind::While { cond, body } => {
                work.push(Work::Loop {
                    cond,
                    body,
                    span: s.span,
                });
            }
            StmtKind::Run { method, arg } => {
                let v = self.eval(arg, st)?;
                let m = self.method(method);
                st.store.set_local(&m.name, v);
                st.stack.push(&m.name);
                st.emit(TraceKind::RunCall, Some(&m.name), Some(v), None);
                work.push(Work::FrameEnd(FrameKind::Run));
                work.push(Work::Block(&m.body.stmts));
            }
            StmtKind::Return => {
                let m = st.stack.pop().expect("return() with an empty method stack");
                st.emit(TraceKind::Return, Some(&m), None, None);
                if !Self::unwind(work, st, &m) {
                    return Ok(Control::Returned);
                }
            }
            StmtKind::Synch {
                method,
                arg,
                priority,
            } => {
                let v = self.eval(arg, st)?;
                let seq = st.next_post_seq();
                st.postlist.post(AsynchNode::new(
                    method.clone(),
                    arg.clone(),
                    v,
                    *priority,
                    seq,
                ));
                st.emit(TraceKind::Post, Some(method), Some(v), Some(*priority));
            }
        }
        Ok(Control::Next)
    }
}
