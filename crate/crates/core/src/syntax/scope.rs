use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeErrorKind {
    UnknownVariable,
    UnknownMethod,
    GlobalLocalClash,
    DuplicateMethod,
}

impl ScopeErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScopeErrorKind::UnknownVariable => "unknown-variable",
            ScopeErrorKind::UnknownMethod => "unknown-method",
            ScopeErrorKind::GlobalLocalClash => "global-local-clash",
            ScopeErrorKind::DuplicateMethod => "duplicate-method",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScopeError {
    pub kind: ScopeErrorKind,
    pub name: String,
    pub span: Span,
}

impl fmt::Display for ScopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} '{}'", self.span, self.kind.as_str(), self.name)
    }
}

impl std::error::Error for ScopeError {}

/// Checks every name in the program and reports all violations in source
/// order.
pub fn validate_scopes(p: &Program) -> Result<(), Vec<ScopeError>> {
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for m in &p.methods {
        if !seen.insert(m.name.as_str()) {
            errors.push(ScopeError {
                kind: ScopeErrorKind::DuplicateMethod,
                name: m.name.clone(),
                span: m.span,
            });
        }
    }
    let methods: HashSet<&str> = p.methods.iter().map(|m| m.name.as_str()).collect();

    for m in &p.methods {
        if m.local == p.global {
            errors.push(ScopeError {
                kind: ScopeErrorKind::GlobalLocalClash,
                name: m.local.clone(),
                span: m.span,
            });
        }
        let in_scope = |name: &str| name == p.global || name == m.local;
        m.body.walk(&mut |s: &Stmt| {
            match &s.kind {
                StmtKind::AssignGlobal(name, _) if *name != p.global => errors.push(ScopeError {
                    kind: ScopeErrorKind::UnknownVariable,
                    name: name.clone(),
                    span: s.span,
                }),
                StmtKind::AssignLocal(name, _) if *name != m.local => errors.push(ScopeError {
                    kind: ScopeErrorKind::UnknownVariable,
                    name: name.clone(),
                    span: s.span,
                }),
                StmtKind::Run { method, .. } | StmtKind::Synch { method, .. }
                    if !methods.contains(method.as_str()) =>
                {
                    errors.push(ScopeError {
                        kind: ScopeErrorKind::UnknownMethod,
                        name: method.clone(),
                        span: s.span,
                    })
                }
                _ => {}
            }
            for e in s.exprs() {
                e.walk(&mut |e: &Expr| {
                    if let ExprKind::Var(name) = &e.kind {
                        if !in_scope(name) {
                            errors.push(ScopeError {
                                kind: ScopeErrorKind::UnknownVariable,
                                name: name.clone(),
                                span: e.span,
                            });
                        }
                    }
                });
            }
        });
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
