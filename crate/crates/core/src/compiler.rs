//! The source-to-target compiler.
//!
//! Translation is a node-for-node homomorphism: `print e` becomes a call to
//! the `sc_print` system call and nothing else changes. The compiler adds no
//! protection around system calls; whatever the context binds `sc_print` to
//! is what runs.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::syntax::{Expr, Guard, Language, PrimOp, Program, SYSCALL_PRINT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    FactorCommonPrefix,
}

impl Pass {
    pub fn name(self) -> &'static str {
        match self {
            Pass::FactorCommonPrefix => "factor_common_prefix",
        }
    }

    pub fn apply(self, e: &Expr) -> Expr {
        match self {
            Pass::FactorCommonPrefix => factor_common_prefix(e),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = CompileError;

    /// Accepts both `factor_common_prefix` and `factor-common-prefix`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "factor_common_prefix" => Ok(Pass::FactorCommonPrefix),
            _ => Err(CompileError::UnknownPass(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error("expected a source program")]
    NotSource,
}

/// A source program together with its compiled image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationUnit {
    pub source: Program,
    pub target: Program,
    pub applied_passes: Vec<Pass>,
}

pub fn translate(p: &Program) -> Result<Program, CompileError> {
    if p.language() != Language::Source {
        return Err(CompileError::NotSource);
    }
    Ok(Program::new(Language::Target, translate_expr(p.body())).expect("translation preserves closedness"))
}

pub fn translate_expr(e: &Expr) -> Expr {
    let t = |e: &Expr| Box::new(translate_expr(e));
    match e {
        Expr::Int(_) | Expr::Var(_) | Expr::Hole => e.clone(),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), t(body)),
        Expr::App(a, b) => Expr::App(t(a), t(b)),
        Expr::Seq(a, b) => Expr::Seq(t(a), t(b)),
        Expr::Let(x, a, b) => Expr::Let(x.clone(), t(a), t(b)),
        Expr::If(g, then, otherwise) => Expr::If(
            Guard {
                op: g.op,
                lhs: t(&g.lhs),
                rhs: t(&g.rhs),
            },
            t(then),
            t(otherwise),
        ),
        Expr::Prim(PrimOp::Print, arg) => Expr::Prim(PrimOp::Syscall(SYSCALL_PRINT.to_string()), t(arg)),
        Expr::Prim(op, arg) => Expr::Prim(op.clone(), t(arg)),
    }
}

/// Hoist a primitive call shared by both branches of a conditional:
///
/// ```text
/// if g then (p a; e1) else (p a; e2)   ~>   p a; if g then e1 else e2
/// ```
///
/// The call must be syntactically identical in both branches and its
/// argument, as well as both guard operands, must be syntactic values, so
/// moving the call ahead of the guard changes neither the value nor the trace.
/// Applied bottom-up until nothing matches.
pub fn factor_common_prefix(e: &Expr) -> Expr {
    let f = |e: &Expr| Box::new(factor_common_prefix(e));
    match e {
        Expr::Int(_) | Expr::Var(_) | Expr::Hole => e.clone(),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), f(body)),
        Expr::App(a, b) => Expr::App(f(a), f(b)),
        Expr::Seq(a, b) => Expr::Seq(f(a), f(b)),
        Expr::Let(x, a, b) => Expr::Let(x.clone(), f(a), f(b)),
        Expr::Prim(op, arg) => Expr::Prim(op.clone(), f(arg)),
        Expr::If(g, then, otherwise) => {
            let guard = Guard {
                op: g.op,
                lhs: f(&g.lhs),
                rhs: f(&g.rhs),
            };
            hoist(guard, factor_common_prefix(then), factor_common_prefix(otherwise))
        }
    }
}

fn hoist(guard: Guard, then: Expr, otherwise: Expr) -> Expr {
    let shared = match (&then, &otherwise) {
        (Expr::Seq(p1, _), Expr::Seq(p2, _)) if p1 == p2 => match &**p1 {
            Expr::Prim(_, arg) => arg.is_pure() && guard.lhs.is_pure() && guard.rhs.is_pure(),
            _ => false,
        },
        _ => false,
    };
    if !shared {
        return Expr::If(guard, Box::new(then), Box::new(otherwise));
    }
    let (Expr::Seq(call, rest1), Expr::Seq(_, rest2)) = (then, otherwise) else {
        unreachable!("checked above")
    };
    Expr::Seq(call, Box::new(hoist(guard, *rest1, *rest2)))
}

/// Translate, then run the named passes in order.
pub fn compile<S: AsRef<str>>(p: &Program, passes: &[S]) -> Result<CompilationUnit, CompileError> {
    let passes = passes
        .iter()
        .map(|name| name.as_ref().parse())
        .collect::<Result<Vec<Pass>, _>>()?;
    compile_with(p, &passes)
}

pub fn compile_with(p: &Program, passes: &[Pass]) -> Result<CompilationUnit, CompileError> {
    let mut body = translate(p)?.into_body();
    for pass in passes {
        body = pass.apply(&body);
    }
    Ok(CompilationUnit {
        source: p.clone(),
        target: Program::new(Language::Target, body).expect("passes preserve closedness"),
        applied_passes: passes.to_vec(),
    })
}
