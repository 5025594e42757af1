//! Property tests against independent reference models.

use asynchp::analysis::{build_post_graph, dead_posts, find_effect_free};
use asynchp::gen::{generate, GenConfig};
use asynchp::interp::{
    check_dispatch_order, check_stack_discipline, eval_expr, run_program, run_program_oracle,
    Outcome, RuntimeErrorKind, Store, DEFAULT_BUDGET,
};
use asynchp::postlist::{AsynchList, AsynchNode, OracleQueue, PostQueue};
use asynchp::syntax::{
    expr_to_string, parse_expr, parse_program, pretty_print, BinOp, Expr, Method, Priority,
    Program, Stmt, StmtKind, UnOp,
};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Add(Priority),
    Remove,
}

fn priority() -> impl Strategy<Value = Priority> {
    prop_oneof![
        Just(Priority::High),
        Just(Priority::Medium),
        Just(Priority::Low)
    ]
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![3 => priority().prop_map(Op::Add), 2 => Just(Op::Remove)],
        0..120,
    )
}

fn node(i: usize, p: Priority) -> AsynchNode {
    AsynchNode::new(format!("m{i}"), Expr::int(i as i64), i as i64, p, i as u64)
}

proptest! {
    #[test]
    fn list_agrees_with_oracle(ops in ops()) {
        let mut list = AsynchList::new();
        let mut oracle = OracleQueue::new();
        for (i, op) in ops.into_iter().enumerate() {
            match op {
                Op::Add(p) => {
                    list.insert(node(i, p), p);
                    oracle.post(node(i, p));
                }
                Op::Remove => prop_assert_eq!(list.pop_front(), oracle.take()),
            }
            prop_assert!(list.check_invariants().is_ok());
            prop_assert_eq!(list.to_sequence(), oracle.to_sequence());
            prop_assert_eq!(list.current_marker(), list.first_marker());
        }
    }

    #[test]
    fn pure_operations_leave_the_original_untouched(ops in ops(), p in priority()) {
        let mut list = AsynchList::new();
        for (i, op) in ops.into_iter().enumerate() {
            if let Op::Add(q) = op {
                list.insert(node(i, q), q);
            }
        }
        let before = list.to_sequence();
        let grown = list.add(node(999, p), p);
        prop_assert_eq!(list.to_sequence(), before.clone());
        prop_assert_eq!(grown.len(), before.len() + 1);
        match list.remove() {
            Ok((head, rest)) => {
                prop_assert_eq!(&head, &before[0]);
                prop_assert_eq!(rest.to_sequence(), before[1..].to_vec());
            }
            Err(_) => prop_assert!(before.is_empty()),
        }
        prop_assert_eq!(list.to_sequence(), before);
    }

    #[test]
    fn regions_are_contiguous_by_rank(ops in ops()) {
        let mut list = AsynchList::new();
        for (i, op) in ops.into_iter().enumerate() {
            match op {
                Op::Add(p) => list.insert(node(i, p), p),
                Op::Remove => { list.pop_front(); }
            }
        }
        let ranks: Vec<u8> = list.iter().map(|n| n.priority.rank()).collect();
        prop_assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
        let high = ranks.iter().filter(|&&r| r == 1).count();
        let medium = ranks.iter().filter(|&&r| r == 2).count();
        prop_assert_eq!(list.high_tail(), high.checked_sub(1));
        prop_assert_eq!(list.medium_tail(), if medium == 0 { None } else { Some(high + medium - 1) });
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0..=i64::MAX).prop_map(Expr::int),
        prop_oneof![Just("g"), Just("x")].prop_map(Expr::var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(UnOp::Neg), Just(UnOp::Not)], inner.clone())
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (
                prop::sample::select(BinOp::ALL.to_vec()),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
        ]
    })
}

/// Reference semantics over i128, where no i64 operation can overflow.
fn reference(e: &Expr, g: i64, x: i64) -> Result<i64, RuntimeErrorKind> {
    use asynchp::syntax::ExprKind::*;
    let fit = |v: i128| i64::try_from(v).map_err(|_| RuntimeErrorKind::ArithOverflow);
    let b = |c: bool| c as i64;
    match &e.kind {
        Int(v) => Ok(*v),
        Var(n) => Ok(if n == "g" { g } else { x }),
        Unary(UnOp::Neg, a) => fit(-(reference(a, g, x)? as i128)),
        Unary(UnOp::Not, a) => Ok(b(reference(a, g, x)? == 0)),
        Binary(op, l, r) => {
            let (l, r) = (reference(l, g, x)? as i128, reference(r, g, x)? as i128);
            match op {
                BinOp::Add => fit(l + r),
                BinOp::Sub => fit(l - r),
                BinOp::Mul => fit(l * r),
                BinOp::Div | BinOp::Rem if r == 0 => Err(RuntimeErrorKind::DivisionByZero),
                BinOp::Div => fit(l / r),
                BinOp::Rem => fit(l % r),
                BinOp::Eq => Ok(b(l == r)),
                BinOp::Ne => Ok(b(l != r)),
                BinOp::Lt => Ok(b(l < r)),
                BinOp::Le => Ok(b(l <= r)),
                BinOp::Gt => Ok(b(l > r)),
                BinOp::Ge => Ok(b(l >= r)),
                BinOp::And => Ok(b(l != 0 && r != 0)),
                BinOp::Or => Ok(b(l != 0 || r != 0)),
            }
        }
    }
}

fn store(g: i64, x: i64) -> (Program, Store) {
    let p = Program {
        global: "g".into(),
        methods: vec![Method::new("m", "x", Default::default())],
    };
    let mut s = Store::new(&p);
    s.set_global(g);
    s.set_local("m", x);
    (p, s)
}

proptest! {
    #[test]
    fn expr_round_trips(e in expr()) {
        let text = expr_to_string(&e);
        prop_assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn eval_matches_wide_reference(e in expr(), g in any::<i64>(), x in prop_oneof![any::<i64>(), -3i64..3]) {
        let (_, s) = store(g, x);
        let got = eval_expr(&e, &s, "g", "m").map_err(|err| err.kind);
        // Operands are evaluated left to right, so the first failing
        // subexpression decides the error kind in both models.
        prop_assert_eq!(got, reference(&e, g, x));
    }

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let p = generate(seed, &GenConfig::syntax());
        let text = pretty_print(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(pretty_print(&back), text);
    }

    #[test]
    fn parser_is_total(src in "[ -~\n]{0,200}") {
        let _ = parse_program(&src);
    }

    #[test]
    fn parser_is_total_on_token_soup(
        toks in prop::collection::vec(
            prop::sample::select(vec![
                "global", "meth", "g", "x", "m", "(", ")", "{", "}", ";", ":=", "if", "else", "while",
                "provided", "run", "return", "synch", "high", "low", ",", "1", "-", "!", "+", "==", "and",
            ]),
            0..80,
        )
    ) {
        let _ = parse_program(&toks.join(" "));
    }
}

fn runs_agree(p: &Program) -> Result<(), TestCaseError> {
    let a = run_program(p, DEFAULT_BUDGET);
    let b = run_program_oracle(p, DEFAULT_BUDGET);
    prop_assert_eq!(a.to_jsonl(), b.to_jsonl());
    let done = matches!(a, Outcome::Finished { .. });
    prop_assert_eq!(check_stack_discipline(a.trace(), done), Ok(()));
    prop_assert_eq!(check_dispatch_order(a.trace(), done), Ok(()));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_runs_are_scheduler_independent(seed in any::<u64>()) {
        runs_agree(&generate(seed, &GenConfig::terminating()))?;
    }

    #[test]
    fn effect_free_set_is_closed_under_successors(seed in any::<u64>()) {
        let p = generate(seed, &GenConfig::terminating());
        let free = find_effect_free(&p);
        let graph = build_post_graph(&p);
        for m in &free {
            for t in graph.successors(m) {
                prop_assert!(free.contains(t), "{} -> {}", m, t);
            }
        }
        let report = dead_posts(&p);
        prop_assert!(report.dead_posts.iter().all(|d| free.contains(&d.method)));
    }

    #[test]
    fn global_assignment_never_grows_effect_free(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let p = generate(seed, &GenConfig::terminating());
        let before = find_effect_free(&p);
        let mut q = p.clone();
        let i = which.index(q.methods.len());
        q.methods[i].body.stmts.insert(0, Stmt::new(StmtKind::AssignGlobal("g".into(), Expr::int(1))));
        let after = find_effect_free(&q);
        prop_assert!(after.is_subset(&before));
        prop_assert!(!after.contains(&q.methods[i].name));
    }
}
