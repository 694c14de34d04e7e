//! The load-time robust-safety check.
//!
//! Given a source program, the passes it is compiled with and the target
//! context it is about to be linked into, [`validate`] decides whether every
//! observable prefix of the plugged target term can also be produced by the
//! source program inside some source context. The source context tried is
//! the syntactic back-translation of the target context; alphabet escapes are
//! refuted before it is built.
//!
//! History expressions over-approximate behaviour, so a rejection can be a
//! false alarm: the witness is a prefix of the inferred history, not
//! necessarily one any run produces. Acceptance is sound.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::compiler::{compile, CompileError};
use crate::effects::{infer, infer_in_hole, EffectError, TypeEnv};
use crate::history::{
    includes, member, prefix_close, to_automaton_over, word_to_string, ActionName, Alphabet, HistExpr, HistoryError,
    Inclusion, TraceAutomaton, Word,
};
use crate::semantics::{run, trace_prefixes, Halt, RuntimeError, DEFAULT_FUEL};
use crate::syntax::{is_syscall_name, plug, Context, Expr, Guard, Language, PrimOp, Program, SyntaxError};
use crate::testgen::{self, GenConfig};

/// Note attached to rejections.
pub const APPROXIMATION_CAVEAT: &str = "the analysis over-approximates behaviour; this rejection may be a false alarm";

/// Observables a source program in any source context can emit.
pub fn source_alphabet() -> Alphabet {
    Alphabet::new([ActionName::display()])
}

/// A target-context node with no source counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Untranslatable {
    pub node: Expr,
    /// The observable the node would emit, if it has one.
    pub action: Option<ActionName>,
}

impl fmt::Display for Untranslatable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no source counterpart for `{}`", self.node)
    }
}

/// Map a target context to its source image: `display` becomes `print`,
/// system-call names bound by the context are renamed apart, and calls to
/// them become ordinary applications.
pub fn back_translate(ctx: &Context) -> Result<Context, Untranslatable> {
    if ctx.language() == Language::Source {
        return Ok(ctx.clone());
    }
    let mut bt = BackTranslator {
        taken: ctx.body().identifiers(),
        renamed: Vec::new(),
    };
    let body = bt.expr(ctx.body())?;
    Ok(Context::new(Language::Source, body).expect("back-translation keeps the hole and closedness"))
}

struct BackTranslator {
    taken: BTreeSet<String>,
    /// Syscall names in scope, with their source names.
    renamed: Vec<(String, String)>,
}

impl BackTranslator {
    fn fresh(&mut self, name: &str) -> String {
        let mut candidate = format!("{name}_src");
        let mut n = 1;
        while self.taken.contains(&candidate) {
            candidate = format!("{name}_src{n}");
            n += 1;
        }
        self.taken.insert(candidate.clone());
        candidate
    }

    fn source_name(&self, name: &str) -> Option<&str> {
        self.renamed
            .iter()
            .rev()
            .find(|(x, _)| x == name)
            .map(|(_, y)| y.as_str())
    }

    fn binder<T>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Self, String) -> Result<T, Untranslatable>,
    ) -> Result<T, Untranslatable> {
        if !is_syscall_name(name) {
            return f(self, name.to_string());
        }
        let fresh = self.fresh(name);
        self.renamed.push((name.to_string(), fresh.clone()));
        let out = f(self, fresh);
        self.renamed.pop();
        out
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, Untranslatable> {
        let untranslatable = |action| {
            Err(Untranslatable {
                node: e.clone(),
                action,
            })
        };
        Ok(match e {
            Expr::Int(_) | Expr::Hole => e.clone(),
            Expr::Var(x) if is_syscall_name(x) => match self.source_name(x) {
                Some(y) => Expr::Var(y.to_string()),
                None => return untranslatable(None),
            },
            Expr::Var(_) => e.clone(),
            Expr::Lam(x, body) => {
                let (x, body) = self.binder(x, |bt, x| Ok((x, bt.expr(body)?)))?;
                Expr::Lam(x, Box::new(body))
            }
            Expr::Let(x, bound, body) => {
                let bound = self.expr(bound)?;
                let (x, body) = self.binder(x, |bt, x| Ok((x, bt.expr(body)?)))?;
                Expr::Let(x, Box::new(bound), Box::new(body))
            }
            Expr::App(a, b) => Expr::app(self.expr(a)?, self.expr(b)?),
            Expr::Seq(a, b) => Expr::seq(self.expr(a)?, self.expr(b)?),
            Expr::If(g, then, otherwise) => Expr::If(
                Guard {
                    op: g.op,
                    lhs: Box::new(self.expr(&g.lhs)?),
                    rhs: Box::new(self.expr(&g.rhs)?),
                },
                Box::new(self.expr(then)?),
                Box::new(self.expr(otherwise)?),
            ),
            Expr::Prim(PrimOp::Display | PrimOp::Print, arg) => Expr::prim(PrimOp::Print, self.expr(arg)?),
            Expr::Prim(PrimOp::Send, _) => return untranslatable(Some(ActionName::send())),
            Expr::Prim(PrimOp::Syscall(name), arg) => match self.source_name(name) {
                Some(y) => Expr::app(Expr::var(y), self.expr(arg)?),
                None => return untranslatable(None),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// The target can emit actions no source context can.
    AlphabetEscape(Vec<ActionName>),
    /// A shortest target prefix the candidate source context cannot produce.
    InclusionFailure(Word),
    /// The target context has no source image.
    BackTranslationFailure(Untranslatable),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::AlphabetEscape(actions) => {
                let names: Vec<&str> = actions.iter().map(ActionName::as_str).collect();
                write!(
                    f,
                    "alphabet escape: {} cannot be emitted by any source context",
                    names.join(", ")
                )
            }
            RejectReason::InclusionFailure(word) => write!(
                f,
                "inclusion failure: prefix {} has no counterpart in the source context",
                word_to_string(word)
            ),
            RejectReason::BackTranslationFailure(u) => write!(f, "back-translation failure: {u}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept {
        source_context: Context,
        h_target: HistExpr,
        h_source: HistExpr,
    },
    Reject {
        witness: Word,
        reason: RejectReason,
        h_target: HistExpr,
    },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept { .. })
    }

    pub fn h_target(&self) -> &HistExpr {
        match self {
            Verdict::Accept { h_target, .. } | Verdict::Reject { h_target, .. } => h_target,
        }
    }

    pub fn witness(&self) -> Option<&Word> {
        match self {
            Verdict::Accept { .. } => None,
            Verdict::Reject { witness, .. } => Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("expected a source program and a target context")]
    Language,
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

fn prefix_automaton(h: &HistExpr, alphabet: &Alphabet) -> Result<TraceAutomaton, HistoryError> {
    Ok(prefix_close(&to_automaton_over(h, alphabet)?))
}

/// Decide whether `p`, compiled with `passes` and linked into `ctx`, only
/// exhibits observable prefixes some source context also exhibits.
pub fn validate<S: AsRef<str>>(p: &Program, passes: &[S], ctx: &Context) -> Result<Verdict, ValidationError> {
    if p.language() != Language::Source || ctx.language() != Language::Target {
        return Err(ValidationError::Language);
    }
    let unit = compile(p, passes)?;
    let h_target = infer_in_hole(ctx, &unit.target)?;
    let alphabet = Alphabet::observable().union(&h_target.actions());
    let target_prefixes = prefix_automaton(&h_target, &alphabet)?;

    let source = source_alphabet();
    let foreign: Alphabet = target_prefixes
        .used_actions()
        .iter()
        .filter(|a| !source.contains(a))
        .cloned()
        .collect();
    let back = back_translate(ctx);

    if !foreign.is_empty() && back.is_err() {
        let witness = target_prefixes
            .shortest_accepted_containing(&foreign)
            .expect("used actions occur in accepted prefixes");
        return Ok(Verdict::Reject {
            witness,
            reason: RejectReason::AlphabetEscape(foreign.iter().cloned().collect()),
            h_target,
        });
    }

    let source_context = match back {
        Ok(c) => c,
        Err(failure) => {
            let witness = failure
                .action
                .as_ref()
                .and_then(|a| target_prefixes.shortest_accepted_containing(&Alphabet::new([a.clone()])))
                .unwrap_or_default();
            return Ok(Verdict::Reject {
                witness,
                reason: RejectReason::BackTranslationFailure(failure),
                h_target,
            });
        }
    };

    let h_source = infer_in_hole(&source_context, p)?;
    let source_prefixes = prefix_automaton(&h_source, &alphabet)?;
    match includes(&source_prefixes, &target_prefixes)? {
        Inclusion::Holds => Ok(Verdict::Accept {
            source_context,
            h_target,
            h_source,
        }),
        Inclusion::Fails(witness) => Ok(Verdict::Reject {
            reason: RejectReason::InclusionFailure(witness.clone()),
            witness,
            h_target,
        }),
    }
}

// ---------------------------------------------------------------------------
// Soundness fuzzing
// ---------------------------------------------------------------------------

/// What went wrong for one generated term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The dynamic trace, or a prefix of it, is outside the inferred history.
    TraceEscapes { trace: Word, history: HistExpr },
    /// A term the analysis accepted got stuck at run time.
    Stuck(RuntimeError),
    /// The generator produced a term the analysis rejects.
    IllTyped(EffectError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub seed: u64,
    pub term: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FuzzReport {
    pub runs: usize,
    pub terminated: usize,
    pub out_of_fuel: usize,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FuzzError {
    #[error("the number of runs must be positive")]
    NoRuns,
    #[error(transparent)]
    Plug(#[from] SyntaxError),
}

/// Check one closed term: its erased trace must be in the history of the
/// term, and every prefix of it in the prefix closure of that history.
/// Returns whether the run terminated within the fuel.
pub fn check_soundness(e: &Expr, fuel: u64) -> Result<bool, ViolationKind> {
    let (_, history) = infer(e, &TypeEnv::new()).map_err(ViolationKind::IllTyped)?;
    let outcome = run(e, fuel).map_err(ViolationKind::Stuck)?;
    let alphabet = Alphabet::observable().union(&history.actions());
    let full = to_automaton_over(&history, &alphabet).expect("alphabet covers the history");
    let prefixes = prefix_close(&full);
    let erased = outcome.trace.erase();
    let escapes = |word: &Word| ViolationKind::TraceEscapes {
        trace: word.clone(),
        history: history.clone(),
    };
    let terminated = matches!(outcome.halt, Halt::Value(_));
    if terminated && !member(&erased, &full).unwrap_or(false) {
        return Err(escapes(&erased));
    }
    for prefix in trace_prefixes(&outcome.trace) {
        let word = prefix.erase();
        if !member(&word, &prefixes).unwrap_or(false) {
            return Err(escapes(&word));
        }
    }
    Ok(terminated)
}

/// Program depth used by [`soundness_fuzz`].
pub const FUZZ_DEPTH: usize = 6;

/// Generate `n` plugged programs from consecutive seeds and check each with
/// [`check_soundness`].
pub fn soundness_fuzz(n: usize, seed: u64) -> Result<FuzzReport, FuzzError> {
    soundness_fuzz_with(n, &GenConfig::new(seed).with_depth(FUZZ_DEPTH))
}

pub fn soundness_fuzz_with(n: usize, base: &GenConfig) -> Result<FuzzReport, FuzzError> {
    if n == 0 {
        return Err(FuzzError::NoRuns);
    }
    let mut report = FuzzReport::default();
    for i in 0..n {
        let cfg = GenConfig {
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        };
        let (program, context) = testgen::gen_plugged(&cfg);
        let target = crate::compiler::translate(&program).expect("generated programs are source programs");
        let plugged = plug(&context, &target)?;
        report.runs += 1;
        match check_soundness(plugged.body(), DEFAULT_FUEL) {
            Ok(true) => report.terminated += 1,
            Ok(false) => report.out_of_fuel += 1,
            Err(kind) => report.violations.push(Violation {
                seed: cfg.seed,
                term: plugged.to_string(),
                kind,
            }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_program};

    const S: &str = "fun i -> if i >= 0 then (print i; i) else (-1)";
    const EVIL: &str = "(fun i -> let sc_print = fun x -> (display x; send x) in [.] i) 42";
    const FRIENDLY: &str = "(fun i -> let sc_print = fun x -> display x in [.] i) 42";

    fn src(text: &str) -> Program {
        parse_program(text, Language::Source).unwrap()
    }

    fn tctx(text: &str) -> Context {
        parse_context(text, Language::Target).unwrap()
    }

    fn w(actions: &[&str]) -> Word {
        actions.iter().map(|a| ActionName::new(*a)).collect()
    }

    #[test]
    fn source_alphabet_has_no_send() {
        let a = source_alphabet();
        assert_eq!(a, Alphabet::new(["display"]));
        assert!(!a.contains(&ActionName::send()));
        assert!(a.contains(&ActionName::display()));
    }

    #[test]
    fn back_translation_of_the_friendly_context() {
        let c = back_translate(&tctx(FRIENDLY)).unwrap();
        assert_eq!(c.language(), Language::Source);
        assert_eq!(
            c.to_string(),
            "(fun i -> let sc_print_src = fun x -> print x in [.] i) 42"
        );
    }

    #[test]
    fn back_translation_of_the_evil_context_fails_at_send() {
        let err = back_translate(&tctx(EVIL)).unwrap_err();
        assert_eq!(err.node, Expr::prim(PrimOp::Send, Expr::var("x")));
        assert_eq!(err.action, Some(ActionName::send()));
    }

    #[test]
    fn back_translation_of_identity_and_calls() {
        assert_eq!(
            back_translate(&Context::identity(Language::Target)).unwrap(),
            Context::identity(Language::Source)
        );
        let c = tctx("let sc_print = fun x -> display x in sc_print 1; [.] 2");
        assert_eq!(
            back_translate(&c).unwrap().to_string(),
            "let sc_print_src = fun x -> print x in (sc_print_src) 1; [.] 2"
        );
        let c = tctx("let sc_print_src = 0 in let sc_print = fun x -> x in [.] sc_print_src");
        assert_eq!(
            back_translate(&c).unwrap().to_string(),
            "let sc_print_src_src = 0 in let sc_print_src1 = fun x -> x in [.] sc_print_src_src"
        );
        let err = back_translate(&tctx("sc_exit 0; [.] 1")).unwrap_err();
        assert_eq!(err.action, None);
    }

    #[test]
    fn evil_is_rejected_with_the_full_prefix() {
        let v = validate(&src(S), &[] as &[&str], &tctx(EVIL)).unwrap();
        let Verdict::Reject {
            witness,
            reason,
            h_target,
        } = v
        else {
            panic!("{v:?}")
        };
        assert_eq!(witness, w(&["display", "send"]));
        assert_eq!(reason, RejectReason::AlphabetEscape(w(&["send"])));
        assert_eq!(h_target.to_string(), "(display . send) + eps");
    }

    #[test]
    fn friendly_is_accepted() {
        let v = validate(&src(S), &[] as &[&str], &tctx(FRIENDLY)).unwrap();
        let Verdict::Accept { h_target, h_source, .. } = v else {
            panic!("{v:?}")
        };
        assert_eq!(h_target.to_string(), "display + eps");
        assert_eq!(h_source.to_string(), "display + eps");
    }

    #[test]
    fn unused_send_fails_back_translation_with_empty_witness() {
        let ctx = tctx("(fun i -> let leak = fun x -> send x in let sc_print = fun x -> display x in [.] i) 1");
        let v = validate(&src(S), &[] as &[&str], &ctx).unwrap();
        let Verdict::Reject { witness, reason, .. } = v else {
            panic!("{v:?}")
        };
        assert!(witness.is_empty());
        assert!(matches!(reason, RejectReason::BackTranslationFailure(_)));
    }

    #[test]
    fn doubled_display_fails_inclusion() {
        let ctx = tctx("(fun i -> let sc_print = fun x -> (display x; display x) in [.] i) 1");
        let v = validate(&src(S), &[] as &[&str], &ctx).unwrap();
        assert_eq!(v.witness(), Some(&w(&["display", "display"])));
        assert!(matches!(
            v,
            Verdict::Reject {
                reason: RejectReason::InclusionFailure(_),
                ..
            }
        ));
    }

    #[test]
    fn tool_errors_are_not_verdicts() {
        let ctx = tctx("(fun i -> let sc_print = 3 in [.] i) 1");
        assert!(matches!(
            validate(&src(S), &[] as &[&str], &ctx),
            Err(ValidationError::Effect(_))
        ));
        assert!(matches!(
            validate(&src(S), &["nope"], &tctx(FRIENDLY)),
            Err(ValidationError::Compile(_))
        ));
        let sctx = parse_context("[.]", Language::Source).unwrap();
        assert_eq!(validate(&src(S), &[] as &[&str], &sctx), Err(ValidationError::Language));
    }

    #[test]
    fn fuzz_preconditions_and_trivial_term() {
        assert_eq!(soundness_fuzz(0, 1), Err(FuzzError::NoRuns));
        assert_eq!(check_soundness(&Expr::Int(0), DEFAULT_FUEL), Ok(true));
    }

    #[test]
    fn small_fuzz_run_is_clean() {
        let report = soundness_fuzz(50, 11).unwrap();
        assert_eq!(report.runs, 50);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }
}
