//! Recursive-descent parser. One token of lookahead suffices everywhere.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Maximum depth of an expression tree, counting parentheses and unary
/// operators. Keeps the recursive parser (and every recursive consumer of
/// the tree) well away from the native stack limit.
pub const MAX_NESTING: usize = 128;

/// Maximum nesting of blocks.
pub const MAX_BLOCK_NESTING: usize = 64;

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
        blocks: 0,
        global: String::new(),
    };
    p.program()
}

/// Parses a standalone expression (used by tests and the Python bindings).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
        blocks: 0,
        global: String::new(),
    };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    blocks: usize,
    global: String,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            let label = match &tok {
                Tok::Eof => "end of input".to_string(),
                other => other.to_string(),
            };
            Err(ParseError {
                span: self.span(),
                expected: vec![label],
                found: self.peek().to_string(),
            })
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError {
                span: self.span(),
                expected: vec![format!("at most {MAX_NESTING} levels of nesting")],
                found: self.peek().to_string(),
            });
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn enter_block(&mut self) -> Result<(), ParseError> {
        self.blocks += 1;
        if self.blocks > MAX_BLOCK_NESTING {
            return Err(ParseError {
                span: self.span(),
                expected: vec![format!("at most {MAX_BLOCK_NESTING} nested blocks")],
                found: self.peek().to_string(),
            });
        }
        Ok(())
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.expect(Tok::Global)?;
        self.global = self.ident()?;
        self.expect(Tok::Semi)?;
        let mut methods = Vec::new();
        loop {
            match self.peek() {
                Tok::Meth => methods.push(self.method()?),
                Tok::Eof if !methods.is_empty() => break,
                Tok::Eof => return Err(self.error(&["'meth'"])),
                _ if methods.is_empty() => return Err(self.error(&["'meth'"])),
                _ => return Err(self.error(&["'meth'", "end of input"])),
            }
        }
        Ok(Program {
            global: std::mem::take(&mut self.global),
            methods,
        })
    }

    fn method(&mut self) -> Result<Method, ParseError> {
        let span = self.expect(Tok::Meth)?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let local = self.ident()?;
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        Ok(Method {
            name,
            local,
            body,
            span,
        })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let span = self.expect(Tok::LBrace)?;
        self.enter_block()?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.error(STMT_START_OR_CLOSE));
            }
            stmts.push(self.stmt()?);
        }
        self.advance();
        self.blocks -= 1;
        Ok(Block { stmts, span })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                self.expect(Tok::Assign)?;
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                // A name equal to the global is a global assignment; anything
                // else is treated as the local and checked by scope validation.
                if name == self.global {
                    StmtKind::AssignGlobal(name, e)
                } else {
                    StmtKind::AssignLocal(name, e)
                }
            }
            Tok::Provided => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Provided(e)
            }
            Tok::If => self.if_stmt()?,
            Tok::While => self.while_stmt()?,
            Tok::Run => {
                self.advance();
                let method = self.ident()?;
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Run { method, arg }
            }
            Tok::Return => {
                self.advance();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Return
            }
            Tok::Synch => {
                self.advance();
                self.expect(Tok::LParen)?;
                let method = self.ident()?;
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Comma)?;
                let priority = match self.peek() {
                    Tok::High => Priority::High,
                    Tok::Medium => Priority::Medium,
                    Tok::Low => Priority::Low,
                    _ => return Err(self.error(&["'high'", "'medium'", "'low'"])),
                };
                self.advance();
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Synch {
                    method,
                    arg,
                    priority,
                }
            }
            _ => return Err(self.error(STMT_START_OR_CLOSE)),
        };
        Ok(Stmt { kind, span })
    }

    fn if_stmt(&mut self) -> Result<StmtKind, ParseError> {
        self.advance();
        let cond = self.expr()?;
        let then_branch = self.block()?;
        self.expect(Tok::Else)?;
        let else_branch = self.block()?;
        Ok(StmtKind::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    fn while_stmt(&mut self) -> Result<StmtKind, ParseError> {
        self.advance();
        let cond = self.expr()?;
        let body = self.block()?;
        Ok(StmtKind::While { cond, body })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        Ok(self.binary(1)?.0)
    }

    fn check_depth(&self, depth: usize) -> Result<(), ParseError> {
        if depth > MAX_NESTING {
            return Err(ParseError {
                span: self.span(),
                expected: vec![format!(
                    "an expression at most {MAX_NESTING} operators deep"
                )],
                found: self.peek().to_string(),
            });
        }
        Ok(())
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Or => BinOp::Or,
            Tok::And => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing over the left-associative binary levels. Returns
    /// the tree together with its depth so long operator chains are bounded
    /// too, not just parenthesis nesting.
    fn binary(&mut self, min_prec: u8) -> Result<(Expr, usize), ParseError> {
        let (mut lhs, mut depth) = self.unary()?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() >= min_prec) {
            let span = lhs.span;
            self.advance();
            let (rhs, rhs_depth) = self.binary(op.precedence() + 1)?;
            depth = depth.max(rhs_depth) + 1;
            self.check_depth(depth)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self) -> Result<(Expr, usize), ParseError> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            _ => return self.atom(),
        };
        self.advance();
        self.enter()?;
        let (operand, depth) = self.unary()?;
        self.leave();
        self.check_depth(depth + 1)?;
        Ok((
            Expr::new(ExprKind::Unary(op, Box::new(operand)), span),
            depth + 1,
        ))
    }

    fn atom(&mut self) -> Result<(Expr, usize), ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok((Expr::new(ExprKind::Int(v), span), 1))
            }
            Tok::Ident(name) => {
                self.advance();
                Ok((Expr::new(ExprKind::Var(name), span), 1))
            }
            Tok::LParen => {
                self.advance();
                self.enter()?;
                let inner = self.binary(1)?;
                self.leave();
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error(&["integer", "identifier", "'('", "'-'", "'!'"])),
        }
    }
}

const STMT_START_OR_CLOSE: &[&str] = &[
    "identifier",
    "'provided'",
    "'if'",
    "'while'",
    "'run'",
    "'return'",
    "'synch'",
    "'}'",
];
