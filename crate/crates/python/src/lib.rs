use asynchp::analysis;
use asynchp::gen::{generate as gen_program, GenConfig};
use asynchp::interp::{run_program, run_program_oracle, Outcome as CoreOutcome, DEFAULT_BUDGET};
use asynchp::postlist::{AsynchList as CoreList, AsynchNode, PostQueue};
use asynchp::syntax::{self, Expr, Priority};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(asynchp, ParseError, PyValueError);
create_exception!(asynchp, ScopeError, PyValueError);

fn priority_from_str(s: &str) -> PyResult<Priority> {
    Priority::ALL
        .into_iter()
        .find(|p| p.keyword() == s)
        .ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown priority {s:?}, expected high, medium or low"
            ))
        })
}

/// A parsed, scope-checked program.
#[pyclass(frozen, module = "asynchp")]
struct Program {
    inner: syntax::Program,
}

#[pymethods]
impl Program {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        let inner =
            syntax::parse_program(source).map_err(|e| ParseError::new_err(e.to_string()))?;
        if let Err(errors) = syntax::validate_scopes(&inner) {
            let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
            return Err(ScopeError::new_err(lines.join("\n")));
        }
        Ok(Program { inner })
    }

    #[getter]
    fn global_name(&self) -> &str {
        &self.inner.global
    }

    #[getter]
    fn methods(&self) -> Vec<String> {
        self.inner.methods.iter().map(|m| m.name.clone()).collect()
    }

    /// Canonical source text.
    fn pretty(&self) -> String {
        syntax::pretty_print(&self.inner)
    }

    /// The AST as JSON.
    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("AST serializes")
    }

    #[pyo3(signature = (budget = DEFAULT_BUDGET, oracle = false))]
    fn run(&self, py: Python<'_>, budget: u64, oracle: bool) -> Outcome {
        let inner = py.detach(|| {
            if oracle {
                run_program_oracle(&self.inner, budget)
            } else {
                run_program(&self.inner, budget)
            }
        });
        Outcome { inner }
    }

    /// Effect-free methods, dead posts and the post graph, as JSON.
    fn analyze(&self) -> String {
        analysis::dead_posts(&self.inner).to_json()
    }

    /// A copy of the program with every flagged dead post removed.
    fn without_dead_posts(&self) -> Program {
        let report = analysis::dead_posts(&self.inner);
        Program {
            inner: analysis::strip_dead_posts(&self.inner, &report),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Program(global={:?}, methods={:?})",
            self.inner.global,
            self.methods()
        )
    }
}

/// Result of running a program.
#[pyclass(frozen, module = "asynchp")]
struct Outcome {
    inner: CoreOutcome,
}

#[pymethods]
impl Outcome {
    /// `"finished"` or the runtime error kind.
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_str()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.inner.final_global().is_some()
    }

    /// Final global value, or None if the run failed.
    #[getter]
    fn global_value(&self) -> Option<i64> {
        self.inner.final_global()
    }

    /// `(kind, line, col, method)` of the runtime error, if any.
    #[getter]
    fn error(&self) -> Option<(&'static str, u32, u32, Option<String>)> {
        self.inner
            .error()
            .map(|e| (e.kind.as_str(), e.span.line, e.span.col, e.method.clone()))
    }

    fn trace_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    fn __len__(&self) -> usize {
        self.inner.trace().len()
    }

    fn __repr__(&self) -> String {
        match self.inner.final_global() {
            Some(g) => format!("Outcome(finished, global={g})"),
            None => format!("Outcome({})", self.inner.kind_str()),
        }
    }
}

/// The prioritized post list on its own.
#[pyclass(module = "asynchp")]
#[derive(Default)]
struct AsynchList {
    inner: CoreList,
    next_seq: u64,
}

#[pymethods]
impl AsynchList {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    fn post(&mut self, method: String, value: i64, priority: &str) -> PyResult<()> {
        let p = priority_from_str(priority)?;
        self.next_seq += 1;
        self.inner.post(AsynchNode::new(
            method,
            Expr::int(0),
            value,
            p,
            self.next_seq,
        ));
        Ok(())
    }

    /// Removes the head as `(method, value, priority)`, or returns None.
    fn take(&mut self) -> Option<(String, i64, &'static str)> {
        self.inner
            .take()
            .map(|n| (n.method, n.arg_value, n.priority.keyword()))
    }

    fn to_list(&self) -> Vec<(String, i64, &'static str)> {
        self.inner
            .iter()
            .map(|n| (n.method.clone(), n.arg_value, n.priority.keyword()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Parses and prints `source` in canonical form.
#[pyfunction]
fn pretty_print(source: &str) -> PyResult<String> {
    Ok(Program::new(source)?.pretty())
}

/// Source of a seeded random program (terminating by default).
#[pyfunction]
#[pyo3(signature = (seed, terminating = true))]
fn generate(seed: u64, terminating: bool) -> String {
    let cfg = if terminating {
        GenConfig::terminating()
    } else {
        GenConfig::syntax()
    };
    syntax::pretty_print(&gen_program(seed, &cfg))
}

#[pymodule]
#[pyo3(name = "asynchp")]
fn asynchp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<Outcome>()?;
    m.add_class::<AsynchList>()?;
    m.add_function(wrap_pyfunction!(pretty_print, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("ScopeError", m.py().get_type::<ScopeError>())?;
    m.add("DEFAULT_BUDGET", DEFAULT_BUDGET)?;
    Ok(())
}
