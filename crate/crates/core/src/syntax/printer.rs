//! Canonical pretty-printer. Output reparses to an equal tree and uses
//! only the parentheses that precedence and associativity require.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";
const UNARY_PREC: u8 = 7;

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    writeln!(out, "global {};", p.global).unwrap();
    for m in &p.methods {
        out.push('\n');
        write!(out, "meth {}({}) ", m.name, m.local).unwrap();
        block(&mut out, &m.body, 0);
        out.push('\n');
    }
    out
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    stmt(&mut out, s, 0);
    out
}

fn block(out: &mut String, b: &Block, level: usize) {
    if b.stmts.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in &b.stmts {
        out.push_str(&INDENT.repeat(level + 1));
        stmt(out, s, level + 1);
        out.push('\n');
    }
    out.push_str(&INDENT.repeat(level));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::AssignGlobal(name, e) | StmtKind::AssignLocal(name, e) => {
            write!(out, "{name} := ").unwrap();
            expr(out, e, 0);
            out.push(';');
        }
        StmtKind::Provided(e) => {
            out.push_str("provided ");
            expr(out, e, 0);
            out.push(';');
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            out.push_str("if ");
            expr(out, cond, 0);
            out.push(' ');
            block(out, then_branch, level);
            out.push_str(" else ");
            block(out, else_branch, level);
        }
        StmtKind::While { cond, body } => {
            out.push_str("while ");
            expr(out, cond, 0);
            out.push(' ');
            block(out, body, level);
        }
        StmtKind::Run { method, arg } => {
            write!(out, "run {method}(").unwrap();
            expr(out, arg, 0);
            out.push_str(");");
        }
        StmtKind::Return => out.push_str("return();"),
        StmtKind::Synch {
            method,
            arg,
            priority,
        } => {
            write!(out, "synch({method}(").unwrap();
            expr(out, arg, 0);
            write!(out, "), {priority});").unwrap();
        }
    }
}

/// Prints `e`, parenthesising it when its own precedence is below `min_prec`.
fn expr(out: &mut String, e: &Expr, min_prec: u8) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Unary(op, operand) => {
            out.push_str(op.symbol());
            expr(out, operand, UNARY_PREC);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            let parens = prec < min_prec;
            if parens {
                out.push('(');
            }
            expr(out, lhs, prec);
            write!(out, " {} ", op.symbol()).unwrap();
            // Left-associative: an equal-precedence right operand needs parens.
            expr(out, rhs, prec + 1);
            if parens {
                out.push(')');
            }
        }
    }
}
