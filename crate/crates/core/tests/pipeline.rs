//! End-to-end checks on the shipped fixtures and on generated programs.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use stv_core::compiler::{compile, factor_common_prefix, translate};
use stv_core::effects::{infer, infer_in_hole, TypeEnv};
use stv_core::history::{equiv, ActionName, HistExpr, Word};
use stv_core::semantics::{run, Halt, DEFAULT_FUEL};
use stv_core::syntax::{
    parse_context, parse_expr, parse_program, plug, CmpOp, Context, Expr, Language, PrimOp, Program,
};
use stv_core::testgen::{gen_context, gen_plugged, gen_program, GenConfig};
use stv_core::validator::{back_translate, validate, RejectReason, Verdict};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn program(name: &str) -> Program {
    let lang = if name.ends_with(".src") {
        Language::Source
    } else {
        Language::Target
    };
    parse_program(&fixture(name), lang).unwrap()
}

fn context(name: &str) -> Context {
    parse_context(&fixture(name), Language::Target).unwrap()
}

fn word(actions: &[&str]) -> Word {
    actions.iter().map(|a| ActionName::new(*a)).collect()
}

const NONE: &[&str] = &[];

/// Value and erased-payload trace of a closed term.
fn observe(e: &Expr) -> (Option<i64>, Vec<String>) {
    let outcome = run(e, DEFAULT_FUEL).unwrap();
    let value = match outcome.halt {
        Halt::Value(v) => v.as_int(),
        Halt::OutOfFuel => panic!("out of fuel: {e}"),
    };
    (value, outcome.trace.actions().iter().map(|a| a.to_string()).collect())
}

#[test]
fn s_compiles_to_t() {
    assert_eq!(translate(&program("S.src")).unwrap(), program("T.trg"));
}

#[test]
fn evil_run_and_history() {
    let plugged = plug(&context("evil.tctx"), &program("T.trg")).unwrap();
    assert_eq!(
        observe(plugged.body()),
        (Some(42), vec!["display(42)".into(), "send(42)".into()])
    );
    let h = infer_in_hole(&context("evil.tctx"), &program("T.trg")).unwrap();
    assert_eq!(h.to_string(), "(display . send) + eps");
}

#[test]
fn friendly_run_and_history() {
    let plugged = plug(&context("friendly.tctx"), &program("T.trg")).unwrap();
    assert_eq!(observe(plugged.body()), (Some(42), vec!["display(42)".into()]));
    let h = infer_in_hole(&context("friendly.tctx"), &program("T.trg")).unwrap();
    assert_eq!(h.to_string(), "display + eps");
}

#[test]
fn verdicts_on_fixtures() {
    let s = program("S.src");
    let Verdict::Reject { witness, h_target, .. } = validate(&s, NONE, &context("evil.tctx")).unwrap() else {
        panic!("evil accepted")
    };
    assert_eq!(witness, word(&["display", "send"]));
    assert_eq!(h_target.to_string(), "(display . send) + eps");

    let Verdict::Accept { h_target, .. } = validate(&s, NONE, &context("friendly.tctx")).unwrap() else {
        panic!("friendly rejected")
    };
    assert_eq!(h_target.to_string(), "display + eps");
}

#[test]
fn optimized_s_prime_is_accepted_and_equivalent() {
    let s = program("S_prime.src");
    let unit = compile(&s, &["factor_common_prefix"]).unwrap();
    assert_eq!(unit.target, program("T_prime.trg"));
    let v = validate(&s, &["factor_common_prefix"], &context("friendly.tctx")).unwrap();
    let Verdict::Accept {
        source_context,
        h_target,
        h_source,
    } = v
    else {
        panic!("{v:?}")
    };
    assert!(equiv(&h_target, &h_source));
    assert_eq!(infer_in_hole(&source_context, &s).unwrap(), h_source);
}

#[test]
fn optimization_keeps_value_and_trace_of_s_prime() {
    let s = program("S_prime.src");
    let plain = translate(&s).unwrap();
    let optimized = program("T_prime.trg");
    let handler = "let sc_print = fun x -> display x in ";
    for input in [-3, -1, 0, 1, 7] {
        let wrap = |p: &Program| {
            let ctx = parse_context(&format!("{handler}[.] ({input})"), Language::Target).unwrap();
            plug(&ctx, p).unwrap()
        };
        assert_eq!(
            observe(wrap(&plain).body()),
            observe(wrap(&optimized).body()),
            "input {input}"
        );
    }
}

#[test]
fn dead_send_is_a_false_alarm() {
    let s = program("S.src");
    let ctx = context("deadsend.tctx");
    let v = validate(&s, NONE, &ctx).unwrap();
    let Verdict::Reject { witness, reason, .. } = &v else {
        panic!("{v:?}")
    };
    assert_eq!(witness, &word(&["send"]));
    assert!(matches!(reason, RejectReason::AlphabetEscape(_)));

    let source_traces = infer_in_hole(&back_translate(&context("friendly.tctx")).unwrap(), &s).unwrap();
    let text = fixture("deadsend.tctx");
    for input in -5..=5 {
        let ctx = parse_context(&text.replace("42", &format!("({input})")), Language::Target).unwrap();
        let plugged = plug(&ctx, &translate(&s).unwrap()).unwrap();
        let outcome = run(plugged.body(), DEFAULT_FUEL).unwrap();
        let erased: HistExpr = outcome
            .trace
            .erase()
            .into_iter()
            .map(HistExpr::Act)
            .fold(HistExpr::Eps, HistExpr::seq);
        let allowed = HistExpr::choice(source_traces.clone(), erased.clone());
        assert!(equiv(&allowed, &source_traces), "input {input}: {erased}");
    }
}

/// Branch prefixes for the factoring oracle.
fn prefixes() -> Vec<Expr> {
    let mut out = Vec::new();
    for op in [PrimOp::Display, PrimOp::Send, PrimOp::Syscall("sc_print".into())] {
        for arg in [
            Expr::Int(0),
            Expr::Int(1),
            Expr::var("x"),
            Expr::prim(PrimOp::Display, Expr::Int(0)),
        ] {
            out.push(Expr::prim(op.clone(), arg));
        }
    }
    out.push(Expr::var("x"));
    out.push(Expr::app(Expr::var("f"), Expr::Int(0)));
    out
}

#[test]
fn factoring_fires_exactly_on_equal_effect_free_prefixes() {
    let guards = [
        (Expr::var("x"), Expr::Int(0)),
        (Expr::app(Expr::var("f"), Expr::Int(0)), Expr::Int(0)),
    ];
    for (lhs, rhs) in &guards {
        for p1 in prefixes() {
            for p2 in prefixes() {
                let e = Expr::if_then_else(
                    CmpOp::Ge,
                    lhs.clone(),
                    rhs.clone(),
                    Expr::seq(p1.clone(), Expr::Int(1)),
                    Expr::seq(p2.clone(), Expr::Int(2)),
                );
                let pure_arg = matches!(&p1, Expr::Prim(_, a) if a.is_pure());
                let expected = p1 == p2 && pure_arg && lhs.is_pure();
                let rewritten = factor_common_prefix(&e);
                assert_eq!(rewritten != e, expected, "{e}");
                if expected {
                    let Expr::Seq(head, _) = &rewritten else {
                        panic!("{rewritten}")
                    };
                    assert_eq!(**head, p1);
                }
            }
        }
    }
}

#[test]
fn factoring_keeps_observable_behaviour_on_enumerated_terms() {
    let handler = parse_context(
        "let sc_print = fun y -> display y in let f = fun z -> send z in [.]",
        Language::Target,
    )
    .unwrap();
    for x in [-1, 0, 1] {
        for p1 in prefixes() {
            for p2 in prefixes() {
                let term = Expr::let_in(
                    "x",
                    Expr::Int(x),
                    Expr::if_then_else(
                        CmpOp::Ge,
                        Expr::var("x"),
                        Expr::Int(0),
                        Expr::seq(p1.clone(), Expr::Int(1)),
                        Expr::seq(p2.clone(), Expr::Int(2)),
                    ),
                );
                let plain = handler.body().fill_hole(&term);
                let optimized = handler.body().fill_hole(&factor_common_prefix(&term));
                assert_eq!(observe(&plain), observe(&optimized), "{term}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printed_programs_parse_back(seed in any::<u64>(), depth in 1usize..7, target in any::<bool>()) {
        let lang = if target { Language::Target } else { Language::Source };
        let e = gen_program(&GenConfig::new(seed).with_depth(depth), lang);
        prop_assert_eq!(parse_expr(&e.to_string(), lang).unwrap(), e);
    }

    #[test]
    fn printed_contexts_parse_back(seed in any::<u64>()) {
        let c = gen_context(&GenConfig::new(seed).with_depth(5));
        prop_assert_eq!(parse_context(&c.to_string(), Language::Target).unwrap(), c);
    }

    #[test]
    fn optimization_keeps_value_and_trace(seed in any::<u64>()) {
        let (p, ctx) = gen_plugged(&GenConfig::new(seed).with_depth(6));
        let plain = plug(&ctx, &compile(&p, NONE).unwrap().target).unwrap();
        let optimized = plug(&ctx, &compile(&p, &["factor_common_prefix"]).unwrap().target).unwrap();
        prop_assert_eq!(observe(plain.body()), observe(optimized.body()));
        let (_, h1) = infer(plain.body(), &TypeEnv::new()).unwrap();
        let (_, h2) = infer(optimized.body(), &TypeEnv::new()).unwrap();
        prop_assert!(equiv(&h1, &h2));
    }

    #[test]
    fn generated_terms_typecheck_and_respect_depth(seed in any::<u64>(), depth in 1usize..7) {
        let cfg = GenConfig::new(seed).with_depth(depth);
        let e = gen_program(&cfg, Language::Source);
        prop_assert!(e.depth() <= depth);
        prop_assert!(infer(&e, &TypeEnv::new()).is_ok());
        prop_assert_eq!(gen_program(&cfg, Language::Source), e);
    }
}
