//! Seeded random program generation for differential and round-trip tests.
//!
//! [`GenConfig::terminating`] produces scope-valid programs that always
//! terminate: `run` and `synch` only target methods declared later, and
//! every loop counts its method's local up to a small bound. Such programs
//! can still fail at runtime (division by zero, a false `provided`,
//! overflow), which is intended.
//!
//! [`GenConfig::syntax`] produces arbitrary well-formed trees with random
//! identifiers, large literals and deep expressions. They are not meant to
//! be run.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::*;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_methods: usize,
    /// Upper bound on statements across the whole program.
    pub max_stmts: usize,
    pub max_expr_depth: usize,
    pub max_block_depth: usize,
    /// Generate runnable, terminating programs (see module docs).
    pub terminating: bool,
}

impl GenConfig {
    pub fn terminating() -> Self {
        GenConfig {
            max_methods: 5,
            max_stmts: 30,
            max_expr_depth: 3,
            max_block_depth: 3,
            terminating: true,
        }
    }

    pub fn syntax() -> Self {
        GenConfig {
            max_methods: 6,
            max_stmts: 40,
            max_expr_depth: 8,
            max_block_depth: 5,
            terminating: false,
        }
    }
}

/// Generates one program from `seed`; the same seed always gives the same
/// program.
pub fn generate(seed: u64, cfg: &GenConfig) -> Program {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        budget: 0,
        global: String::new(),
    };
    g.program()
}

/// A corpus of `count` programs from consecutive seeds starting at `first_seed`.
pub fn corpus(first_seed: u64, count: usize, cfg: &GenConfig) -> Vec<Program> {
    (0..count as u64)
        .map(|i| generate(first_seed + i, cfg))
        .collect()
}

struct Gen<'c> {
    rng: ChaCha8Rng,
    cfg: &'c GenConfig,
    /// Statements still allowed in the program.
    budget: usize,
    global: String,
}

struct Scope<'a> {
    local: &'a str,
    /// Methods this one may run or post to.
    targets: &'a [String],
    /// Inside a counting loop the local is the counter and must not be
    /// assigned.
    local_frozen: bool,
}

impl Gen<'_> {
    fn ident(&mut self) -> String {
        const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
        const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
        loop {
            let len = self.rng.gen_range(1..=6);
            let mut s = String::new();
            s.push(*FIRST.choose(&mut self.rng).unwrap() as char);
            for _ in 1..len {
                s.push(*REST.choose(&mut self.rng).unwrap() as char);
            }
            if !is_keyword(&s) {
                return s;
            }
        }
    }

    /// An identifier distinct from the global and from `taken`.
    fn fresh_ident(&mut self, taken: &[String]) -> String {
        loop {
            let s = self.ident();
            if s != self.global && !taken.contains(&s) {
                return s;
            }
        }
    }

    fn program(&mut self) -> Program {
        let n = self.rng.gen_range(1..=self.cfg.max_methods);
        self.budget = self.rng.gen_range(n..=self.cfg.max_stmts.max(n));
        let mut names: Vec<String> = Vec::new();
        let mut locals = Vec::new();
        if self.cfg.terminating {
            self.global = "g".into();
            for i in 0..n {
                names.push(format!("m{i}"));
                locals.push(["x", "y", "l", "k", "n"][i % 5].to_string());
            }
        } else {
            self.global = self.ident();
            for _ in 0..n {
                let name = self.fresh_ident(&names);
                names.push(name);
                let local = self.fresh_ident(&[]);
                locals.push(local);
            }
        }
        let mut methods = Vec::new();
        for i in 0..n {
            let targets: Vec<String> = if self.cfg.terminating {
                names[i + 1..].to_vec()
            } else {
                names.clone()
            };
            let scope = Scope {
                local: &locals[i],
                targets: &targets,
                local_frozen: false,
            };
            let share = if i + 1 == n {
                self.budget
            } else {
                self.rng.gen_range(0..=self.budget.min(8))
            };
            let body = self.block(&scope, share, 0);
            methods.push(Method::new(names[i].clone(), locals[i].clone(), body));
        }
        Program {
            global: self.global.clone(),
            methods,
        }
    }

    fn block(&mut self, scope: &Scope, max: usize, depth: usize) -> Block {
        let len = self.rng.gen_range(0..=max.min(self.budget).min(6));
        let mut stmts = Vec::new();
        for _ in 0..len {
            if self.budget == 0 {
                break;
            }
            self.budget -= 1;
            stmts.push(self.stmt(scope, depth));
        }
        Block::new(stmts)
    }

    fn stmt(&mut self, scope: &Scope, depth: usize) -> Stmt {
        let nested_ok = depth < self.cfg.max_block_depth;
        loop {
            let kind = match self.rng.gen_range(0..100) {
                0..=21 => StmtKind::AssignGlobal(self.global.clone(), self.expr(scope, 0)),
                22..=33 if !scope.local_frozen => {
                    let name = if self.cfg.terminating || self.rng.gen_bool(0.7) {
                        scope.local.to_string()
                    } else {
                        self.fresh_ident(&[])
                    };
                    StmtKind::AssignLocal(name, self.expr(scope, 0))
                }
                34..=39 => StmtKind::Provided(self.provided_cond(scope)),
                40..=53 if nested_ok => {
                    let cond = self.expr(scope, 0);
                    let then_branch = self.block(scope, 4, depth + 1);
                    let else_branch = self.block(scope, 3, depth + 1);
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    }
                }
                54..=61 if nested_ok && (!self.cfg.terminating || self.budget >= 3) => {
                    self.while_stmt(scope, depth)
                }
                62..=71 if !scope.targets.is_empty() => StmtKind::Run {
                    method: scope.targets.choose(&mut self.rng).unwrap().clone(),
                    arg: self.expr(scope, 0),
                },
                72..=74 => StmtKind::Return,
                75..=99 if !scope.targets.is_empty() => StmtKind::Synch {
                    method: scope.targets.choose(&mut self.rng).unwrap().clone(),
                    arg: self.expr(scope, 0),
                    priority: *Priority::ALL.choose(&mut self.rng).unwrap(),
                },
                _ => continue,
            };
            return Stmt::new(kind);
        }
    }

    fn while_stmt(&mut self, scope: &Scope, depth: usize) -> StmtKind {
        if !self.cfg.terminating {
            let cond = self.expr(scope, 0);
            let body = self.block(scope, 4, depth + 1);
            return StmtKind::While { cond, body };
        }
        if scope.local_frozen {
            // Nested loop over the same counter would reset it; use a plain
            // conditional instead.
            let cond = self.expr(scope, 0);
            return StmtKind::If {
                cond,
                then_branch: Block::default(),
                else_branch: Block::default(),
            };
        }
        // if 1 { l := 0; while l < K { ...; l := l + 1; } }
        // The wrapper, reset and increment count against the statement budget.
        self.budget -= 3;
        let bound = self.rng.gen_range(1..=3);
        let l = || Expr::var(scope.local);
        let inner = Scope {
            local: scope.local,
            targets: scope.targets,
            local_frozen: true,
        };
        let mut body = self.block(&inner, 4, depth + 1);
        body.stmts.push(Stmt::new(StmtKind::AssignLocal(
            scope.local.to_string(),
            Expr::binary(BinOp::Add, l(), Expr::int(1)),
        )));
        let cond = Expr::binary(BinOp::Lt, l(), Expr::int(bound));
        let reset = Stmt::new(StmtKind::AssignLocal(scope.local.to_string(), Expr::int(0)));
        let looped = Stmt::new(StmtKind::While { cond, body });
        StmtKind::If {
            cond: Expr::int(1),
            then_branch: Block::new(vec![reset, looped]),
            else_branch: Block::default(),
        }
    }

    fn provided_cond(&mut self, scope: &Scope) -> Expr {
        if self.cfg.terminating && self.rng.gen_bool(0.8) {
            // Usually true, occasionally not.
            let v = if self.rng.gen_bool(0.5) {
                Expr::var(scope.local)
            } else {
                Expr::var(self.global.clone())
            };
            Expr::binary(BinOp::Ne, v, Expr::int(self.rng.gen_range(-3..=40)))
        } else {
            self.expr(scope, 0)
        }
    }

    fn literal(&mut self) -> i64 {
        if self.cfg.terminating {
            self.rng.gen_range(0..=9)
        } else {
            match self.rng.gen_range(0..4) {
                0 => self.rng.gen_range(0..=i64::MAX),
                _ => self.rng.gen_range(0..=1000),
            }
        }
    }

    fn var(&mut self, scope: &Scope) -> Expr {
        if self.cfg.terminating || self.rng.gen_bool(0.9) {
            if self.rng.gen_bool(0.5) {
                Expr::var(scope.local)
            } else {
                Expr::var(self.global.clone())
            }
        } else {
            Expr::var(self.ident())
        }
    }

    fn expr(&mut self, scope: &Scope, depth: usize) -> Expr {
        let leaf = depth >= self.cfg.max_expr_depth || self.rng.gen_bool(0.4);
        if leaf {
            return if self.rng.gen_bool(0.5) {
                Expr::int(self.literal())
            } else {
                self.var(scope)
            };
        }
        if self.rng.gen_bool(0.15) {
            let op = if self.rng.gen_bool(0.5) {
                UnOp::Neg
            } else {
                UnOp::Not
            };
            return Expr::unary(op, self.expr(scope, depth + 1));
        }
        let op = if self.cfg.terminating {
            // Keep arithmetic mostly additive so values stay small.
            *[
                BinOp::Add,
                BinOp::Add,
                BinOp::Sub,
                BinOp::Sub,
                BinOp::Mul,
                BinOp::Div,
                BinOp::Rem,
                BinOp::Eq,
                BinOp::Ne,
                BinOp::Lt,
                BinOp::Le,
                BinOp::Gt,
                BinOp::Ge,
                BinOp::And,
                BinOp::Or,
            ]
            .choose(&mut self.rng)
            .unwrap()
        } else {
            *BinOp::ALL.choose(&mut self.rng).unwrap()
        };
        let lhs = self.expr(scope, depth + 1);
        let rhs = if self.cfg.terminating
            && matches!(op, BinOp::Div | BinOp::Rem)
            && self.rng.gen_bool(0.7)
        {
            Expr::int(self.rng.gen_range(1..=5))
        } else {
            self.expr(scope, depth + 1)
        };
        Expr::binary(op, lhs, rhs)
    }
}
