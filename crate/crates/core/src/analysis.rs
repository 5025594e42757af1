//! Dead-posting detection.
//!
//! A method is *effect-free* when running it (and everything it runs or
//! posts, transitively) can neither change the global nor stop the
//! program. Posting such a method is dead: deleting the `synch` leaves the
//! final global and every `assign-global` event unchanged.
//!
//! The criterion is syntactic and conservative. A method is excluded when
//! its body contains any of:
//!
//! * a global assignment;
//! * `provided` (it can fail);
//! * `while` (it may not terminate);
//! * `/` or `%` (division by zero);
//! * a `run` or `synch` whose target is not itself effect-free;
//!
//! or when it can reach itself through run/post edges (unbounded
//! recursion or reposting). Local assignments are allowed: a local is
//! only readable by its own method.
//!
//! A `synch` to an effect-free method is dead only if its argument cannot
//! fail either, since deleting the statement also deletes that evaluation.
//!
//! Overflow in `+`, `-`, `*` and negation is not modelled; the guarantee
//! holds for runs in which the removed tasks do not overflow.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::syntax::{BinOp, Block, Expr, ExprKind, Priority, Program, Span, Stmt, StmtKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "priority", rename_all = "lowercase")]
pub enum EdgeKind {
    Run,
    Post(Priority),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub span: Span,
}

/// Methods as vertices, one edge per syntactic `run`/`synch`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PostGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

impl PostGraph {
    pub fn successors<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.from == method)
            .map(|e| e.to.as_str())
    }

    /// True if `method` can reach itself along one or more edges.
    pub fn on_cycle(&self, method: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<&str> = self.successors(method).collect();
        while let Some(m) = todo.pop() {
            if m == method {
                return true;
            }
            if seen.insert(m) {
                todo.extend(self.successors(m));
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeadPost {
    /// The posted method.
    pub method: String,
    /// The method containing the `synch`.
    pub poster: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub effect_free: BTreeSet<String>,
    pub dead_posts: Vec<DeadPost>,
    pub graph: PostGraph,
    /// Refinement rounds until the effect-free set stopped shrinking.
    pub iterations: usize,
}

pub fn build_post_graph(p: &Program) -> PostGraph {
    let mut edges = Vec::new();
    for m in &p.methods {
        m.body.walk(&mut |s: &Stmt| {
            let (to, kind) = match &s.kind {
                StmtKind::Run { method, .. } => (method, EdgeKind::Run),
                StmtKind::Synch {
                    method, priority, ..
                } => (method, EdgeKind::Post(*priority)),
                _ => return,
            };
            edges.push(Edge {
                from: m.name.clone(),
                to: to.clone(),
                kind,
                span: s.span,
            });
        });
    }
    PostGraph {
        vertices: p.methods.iter().map(|m| m.name.clone()).collect(),
        edges,
    }
}

/// True if the body, ignoring calls, cannot touch the global or fail.
fn locally_clean(body: &Block) -> bool {
    let mut clean = true;
    body.walk(&mut |s: &Stmt| {
        if matches!(
            s.kind,
            StmtKind::AssignGlobal(..) | StmtKind::Provided(_) | StmtKind::While { .. }
        ) {
            clean = false;
        }
        if !s.exprs().into_iter().all(divides_nowhere) {
            clean = false;
        }
    });
    clean
}

/// No `/` or `%` anywhere in `e`.
fn divides_nowhere(e: &Expr) -> bool {
    let mut ok = true;
    e.walk(&mut |e| {
        if matches!(e.kind, ExprKind::Binary(BinOp::Div | BinOp::Rem, ..)) {
            ok = false;
        }
    });
    ok
}

/// The posted task is effect-free and posting it cannot fail.
fn is_dead_post(s: &Stmt, effect_free: &BTreeSet<String>) -> bool {
    matches!(&s.kind, StmtKind::Synch { method, arg, .. } if effect_free.contains(method) && divides_nowhere(arg))
}

fn effect_free_with_rounds(p: &Program, graph: &PostGraph) -> (BTreeSet<String>, usize) {
    let mut free: BTreeSet<String> = p
        .methods
        .iter()
        .filter(|m| locally_clean(&m.body) && !graph.on_cycle(&m.name))
        .map(|m| m.name.clone())
        .collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let drop: Vec<String> = free
            .iter()
            .filter(|m| graph.successors(m).any(|t| !free.contains(t)))
            .cloned()
            .collect();
        if drop.is_empty() {
            return (free, rounds);
        }
        for m in drop {
            free.remove(&m);
        }
    }
}

/// Greatest set of methods satisfying the effect-free criterion.
pub fn find_effect_free(p: &Program) -> BTreeSet<String> {
    effect_free_with_rounds(p, &build_post_graph(p)).0
}

/// Flags every `synch` whose target is effect-free and whose argument
/// cannot fail.
pub fn dead_posts(p: &Program) -> AnalysisReport {
    let graph = build_post_graph(p);
    let (effect_free, iterations) = effect_free_with_rounds(p, &graph);
    let mut dead_posts = Vec::new();
    for m in &p.methods {
        m.body.walk(&mut |s: &Stmt| {
            if let StmtKind::Synch { method, .. } = &s.kind {
                if is_dead_post(s, &effect_free) {
                    dead_posts.push(DeadPost {
                        method: method.clone(),
                        poster: m.name.clone(),
                        span: s.span,
                    });
                }
            }
        });
    }
    AnalysisReport {
        effect_free,
        dead_posts,
        graph,
        iterations,
    }
}

/// Returns a copy of `p` without the posts that are dead with respect to
/// `effect_free`: synchs to a member of the set with a division-free
/// argument.
pub fn remove_dead_posts(p: &Program, effect_free: &BTreeSet<String>) -> Program {
    fn strip(b: &Block, targets: &BTreeSet<String>) -> Block {
        let stmts = b
            .stmts
            .iter()
            .filter(|s| !is_dead_post(s, targets))
            .map(|s| {
                let kind = match &s.kind {
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    } => StmtKind::If {
                        cond: cond.clone(),
                        then_branch: strip(then_branch, targets),
                        else_branch: strip(else_branch, targets),
                    },
                    StmtKind::While { cond, body } => StmtKind::While {
                        cond: cond.clone(),
                        body: strip(body, targets),
                    },
                    other => other.clone(),
                };
                Stmt { kind, span: s.span }
            })
            .collect();
        Block {
            stmts,
            span: b.span,
        }
    }
    let mut out = p.clone();
    for m in &mut out.methods {
        m.body = strip(&m.body, effect_free);
    }
    out
}

/// [`remove_dead_posts`] applied to the report's effect-free set.
pub fn strip_dead_posts(p: &Program, report: &AnalysisReport) -> Program {
    remove_dead_posts(p, &report.effect_free)
}

#[derive(Serialize)]
struct ReportJson<'a> {
    effect_free: &'a BTreeSet<String>,
    dead_posts: Vec<DeadPostJson<'a>>,
    edges: Vec<EdgeJson<'a>>,
}

#[derive(Serialize)]
struct DeadPostJson<'a> {
    method: &'a str,
    line: u32,
    col: u32,
}

#[derive(Serialize)]
struct EdgeJson<'a> {
    from: &'a str,
    to: &'a str,
    #[serde(flatten)]
    kind: EdgeKind,
    line: u32,
    col: u32,
}

impl AnalysisReport {
    /// `{effect_free: [...], dead_posts: [{method, line, col}], edges: [...]}`
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            effect_free: &self.effect_free,
            dead_posts: self
                .dead_posts
                .iter()
                .map(|d| DeadPostJson {
                    method: &d.method,
                    line: d.span.line,
                    col: d.span.col,
                })
                .collect(),
            edges: self
                .graph
                .edges
                .iter()
                .map(|e| EdgeJson {
                    from: &e.from,
                    to: &e.to,
                    kind: e.kind,
                    line: e.span.line,
                    col: e.span.col,
                })
                .collect(),
        };
        serde_json::to_string(&json).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::run_program;
    use crate::syntax::{parse_program, pretty_print};

    fn prog(src: &str) -> Program {
        let p = parse_program(src).unwrap();
        crate::syntax::validate_scopes(&p).unwrap();
        p
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_post_edge() {
        let g = build_post_graph(&prog(
            "global g; meth main(x) { synch(w(1), low); } meth w(y) { }",
        ));
        assert_eq!(g.vertices, ["main", "w"]);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(
            (g.edges[0].from.as_str(), g.edges[0].to.as_str()),
            ("main", "w")
        );
        assert_eq!(g.edges[0].kind, EdgeKind::Post(Priority::Low));
    }

    #[test]
    fn edgeless_graph_covers_all_methods() {
        let g = build_post_graph(&prog("global g; meth a(x) { g := 1; } meth b(y) { }"));
        assert_eq!(g.vertices, ["a", "b"]);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn self_post_is_a_self_loop() {
        let g = build_post_graph(&prog(
            "global g; meth m(x) { if x { synch(m(x - 1), high); } else { } }",
        ));
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].from, g.edges[0].to);
        assert!(g.on_cycle("m"));
    }

    #[test]
    fn edges_include_unreachable_code() {
        let g = build_post_graph(&prog(
            "global g; meth m(x) { return(); run n(1); } meth n(y) { }",
        ));
        assert_eq!(g.edges[0].kind, EdgeKind::Run);
    }

    #[test]
    fn local_only_method_is_effect_free() {
        assert_eq!(
            find_effect_free(&prog("global g; meth log(x) { x := x + 1; }")),
            set(&["log"])
        );
    }

    #[test]
    fn global_assignment_disqualifies() {
        assert_eq!(
            find_effect_free(&prog("global g; meth w(x) { g := x; }")),
            set(&[])
        );
    }

    #[test]
    fn effects_propagate_back_through_posts() {
        let p = prog("global g; meth m1(x) { synch(m2(x), low); } meth m2(y) { g := y; }");
        let report = dead_posts(&p);
        assert_eq!(report.effect_free, set(&[]));
        assert_eq!(report.iterations, 2);
        assert!(report.dead_posts.is_empty());
    }

    #[test]
    fn provided_while_and_division_disqualify() {
        for body in ["provided x;", "while 0 { }", "x := 4 / x;", "x := 4 % 2;"] {
            let p = prog(&format!(
                "global g; meth m(x) {{ synch(w(1), low); }} meth w(x) {{ {body} }}"
            ));
            assert!(dead_posts(&p).dead_posts.is_empty(), "{body}");
        }
    }

    #[test]
    fn post_with_dividing_argument_is_kept() {
        let p = prog("global g; meth m(x) { synch(w(3 % g), low); synch(w(g + 1), low); } meth w(x) { x := 1; }");
        let report = dead_posts(&p);
        assert_eq!(report.effect_free, set(&["w"]));
        assert_eq!(report.dead_posts.len(), 1);
        assert_eq!(report.dead_posts[0].span.col, 45);
        let stripped = strip_dead_posts(&p, &report);
        assert_eq!(pretty_print(&stripped).matches("synch").count(), 1);
        assert_eq!(run_program(&p, 100).kind_str(), "division-by-zero");
        assert_eq!(run_program(&stripped, 100).kind_str(), "division-by-zero");
    }

    #[test]
    fn recursion_disqualifies() {
        let p = prog("global g; meth a(x) { synch(b(x), low); } meth b(y) { run a(y); }");
        assert_eq!(find_effect_free(&p), set(&[]));
        let p = prog("global g; meth a(x) { synch(a(x), low); }");
        assert_eq!(find_effect_free(&p), set(&[]));
    }

    #[test]
    fn logger_post_is_dead() {
        let p = prog(
            "global g;
            meth main(x) { g := 3; synch(log(g), low); synch(work(g), high); }
            meth work(y) { g := g + y; }
            meth log(z) { z := z * 2; run fmt(z); }
            meth fmt(w) { w := w - 1; }",
        );
        let report = dead_posts(&p);
        assert_eq!(report.effect_free, set(&["fmt", "log"]));
        assert_eq!(report.dead_posts.len(), 1);
        assert_eq!(report.dead_posts[0].method, "log");
        assert_eq!(report.dead_posts[0].poster, "main");

        let stripped = strip_dead_posts(&p, &report);
        assert_eq!(dead_posts(&stripped).dead_posts, []);
        let before = crate::interp::run_program(&p, 10_000);
        let after = crate::interp::run_program(&stripped, 10_000);
        assert_eq!(before.final_global(), after.final_global());
        assert_eq!(before.final_global(), Some(6));
    }

    #[test]
    fn adding_global_assignment_never_grows_the_set() {
        let base = "global g; meth a(x) { run b(x); } meth b(y) { y := 1; } meth c(z) { }";
        let before = find_effect_free(&prog(base));
        let after = find_effect_free(&prog(&base.replace("y := 1;", "y := 1; g := 1;")));
        assert!(after.is_subset(&before));
        assert_eq!(after, set(&["c"]));
    }

    #[test]
    fn report_json_shape() {
        let p =
            prog("global g;\nmeth m(x) {\n  synch(n(1), medium);\n  run n(2);\n}\nmeth n(y) { }");
        let json: serde_json::Value = serde_json::from_str(&dead_posts(&p).to_json()).unwrap();
        let expected = serde_json::json!({
            "effect_free": ["m", "n"],
            "dead_posts": [{"method": "n", "line": 3, "col": 3}],
            "edges": [
                {"from": "m", "to": "n", "kind": "post", "priority": "medium", "line": 3, "col": 3},
                {"from": "m", "to": "n", "kind": "run", "line": 4, "col": 3}
            ]
        });
        assert_eq!(json, expected);
    }
}
