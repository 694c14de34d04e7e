//! Type-and-effect inference producing history expressions.
//!
//! Types are `int` and arrows `t1 -[h]-> t2` whose latent effect `h` is the
//! history expression of one call. The rules are syntax-directed:
//!
//! | expression          | effect                                   |
//! |---------------------|------------------------------------------|
//! | literal, variable, `fun` | `eps`                               |
//! | `e1 e2`             | eff(e1) . eff(e2) . latent(e1)           |
//! | `p e`, observable `a` | eff(e) . a                             |
//! | `sc_x e`            | eff(e) . latent(sc_x)                    |
//! | `e1; e2`            | eff(e1) . eff(e2)                        |
//! | `let x = e1 in e2`  | eff(e1) . eff(e2)                        |
//! | `if g then e1 else e2` | eff(g) . (eff(e1) + eff(e2))          |
//!
//! Guards are never folded, so both branches always contribute. Lambda
//! parameters get type and effect variables that are solved by unification.
//! Two latent effects unify when they are trace-equivalent; there is no
//! subeffecting, so conditionals whose branches return functions with
//! different latent effects are rejected.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::history::{equiv, normalize, ActionName, HistExpr};
use crate::syntax::{plug, Context, Expr, PrimOp, Program, SyntaxError};

/// A type annotated with latent effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffType {
    Int,
    Arrow(Box<EffType>, HistExpr, Box<EffType>),
}

impl EffType {
    pub fn arrow(param: EffType, latent: HistExpr, result: EffType) -> Self {
        EffType::Arrow(Box::new(param), latent, Box::new(result))
    }

    pub fn latent(&self) -> Option<&HistExpr> {
        match self {
            EffType::Int => None,
            EffType::Arrow(_, h, _) => Some(h),
        }
    }
}

impl fmt::Display for EffType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffType::Int => f.write_str("int"),
            EffType::Arrow(param, latent, result) => {
                if matches!(**param, EffType::Arrow(..)) {
                    write!(f, "({param})")?;
                } else {
                    write!(f, "{param}")?;
                }
                write!(f, " -[{latent}]-> {result}")
            }
        }
    }
}

/// Types of the free identifiers of an expression.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv {
    bindings: Vec<(String, EffType)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    /// Add a binding, shadowing any earlier one of the same name.
    pub fn bind(&mut self, name: impl Into<String>, ty: EffType) {
        self.bindings.push((name.into(), ty));
    }

    pub fn lookup(&self, name: &str) -> Option<&EffType> {
        self.bindings.iter().rev().find(|(x, _)| x == name).map(|(_, t)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EffectError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("latent effects differ: {left} vs {right}")]
    LatentMismatch { left: String, right: String },
    #[error("infinite type")]
    Occurs,
    #[error("cannot analyse an unfilled hole")]
    Hole,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Infer the type and the history expression of `e`. The effect is normalized.
pub fn infer(e: &Expr, env: &TypeEnv) -> Result<(EffType, HistExpr), EffectError> {
    let mut inf = Inference::default();
    for (name, ty) in &env.bindings {
        let t = Ty::from_public(ty);
        inf.scope.push((name.clone(), t));
    }
    let (ty, eff) = inf.infer(e)?;
    let ty = inf.finish_type(&ty);
    let eff = normalize(&inf.finish_effect(&eff));
    Ok((ty, eff))
}

/// The history expression of `prog` plugged into `ctx`.
pub fn infer_in_hole(ctx: &Context, prog: &Program) -> Result<HistExpr, EffectError> {
    let plugged = plug(ctx, prog)?;
    infer(plugged.body(), &TypeEnv::new()).map(|(_, h)| h)
}

// ---------------------------------------------------------------------------
// Internal representation with unification variables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Var(usize),
    Int,
    Arrow(Box<Ty>, Eff, Box<Ty>),
}

impl Ty {
    fn from_public(t: &EffType) -> Ty {
        match t {
            EffType::Int => Ty::Int,
            EffType::Arrow(a, h, r) => Ty::Arrow(
                Box::new(Ty::from_public(a)),
                Eff::from_hist(h),
                Box::new(Ty::from_public(r)),
            ),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Var(v) => write!(f, "'t{v}"),
            Ty::Int => f.write_str("int"),
            Ty::Arrow(a, h, r) => {
                if matches!(**a, Ty::Arrow(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " -[{h}]-> {r}")
            }
        }
    }
}

/// Effects with variables; `Seq` and `Choice` are n-ary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Eff {
    Act(ActionName),
    Var(usize),
    Seq(Vec<Eff>),
    Star(Box<Eff>),
    Choice(Vec<Eff>),
    Eps,
}

impl Eff {
    fn from_hist(h: &HistExpr) -> Eff {
        match h {
            HistExpr::Eps => Eff::Eps,
            HistExpr::Act(a) => Eff::Act(a.clone()),
            HistExpr::Seq(a, b) => Eff::seq([Eff::from_hist(a), Eff::from_hist(b)]),
            HistExpr::Choice(a, b) => Eff::choice([Eff::from_hist(a), Eff::from_hist(b)]),
            HistExpr::Star(a) => Eff::Star(Box::new(Eff::from_hist(a))),
        }
    }

    fn seq(items: impl IntoIterator<Item = Eff>) -> Eff {
        let mut out = Vec::new();
        for item in items {
            match item {
                Eff::Eps => {}
                Eff::Seq(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Eff::Eps,
            1 => out.pop().expect("one item"),
            _ => Eff::Seq(out),
        }
    }

    fn choice(items: impl IntoIterator<Item = Eff>) -> Eff {
        let mut out = Vec::new();
        for item in items {
            match item {
                Eff::Choice(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        out.sort();
        out.dedup();
        if out.len() == 1 {
            out.pop().expect("one item")
        } else {
            Eff::Choice(out)
        }
    }

    fn occurs(&self, v: usize) -> bool {
        match self {
            Eff::Var(w) => *w == v,
            Eff::Act(_) | Eff::Eps => false,
            Eff::Seq(items) | Eff::Choice(items) => items.iter().any(|e| e.occurs(v)),
            Eff::Star(e) => e.occurs(v),
        }
    }

    fn to_hist(&self) -> Option<HistExpr> {
        let join = |items: &[Eff], f: fn(HistExpr, HistExpr) -> HistExpr| {
            let mut hs = items.iter().map(Eff::to_hist).collect::<Option<Vec<_>>>()?;
            let last = hs.pop()?;
            Some(hs.into_iter().rev().fold(last, |acc, h| f(h, acc)))
        };
        match self {
            Eff::Var(_) => None,
            Eff::Eps => Some(HistExpr::Eps),
            Eff::Act(a) => Some(HistExpr::Act(a.clone())),
            Eff::Seq(items) => join(items, HistExpr::seq),
            Eff::Choice(items) => join(items, HistExpr::choice),
            Eff::Star(e) => e.to_hist().map(HistExpr::star),
        }
    }
}

impl fmt::Display for Eff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, items: &[Eff], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, e) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        };
        match self {
            Eff::Var(v) => write!(f, "'h{v}"),
            Eff::Eps => f.write_str("eps"),
            Eff::Act(a) => write!(f, "{a}"),
            Eff::Seq(items) => list(f, items, " . "),
            Eff::Choice(items) => list(f, items, " + "),
            Eff::Star(e) => write!(f, "({e})*"),
        }
    }
}

#[derive(Default)]
struct Inference {
    types: Vec<Option<Ty>>,
    effects: Vec<Option<Eff>>,
    scope: Vec<(String, Ty)>,
}

impl Inference {
    fn fresh_ty(&mut self) -> Ty {
        self.types.push(None);
        Ty::Var(self.types.len() - 1)
    }

    fn fresh_eff(&mut self) -> Eff {
        self.effects.push(None);
        Eff::Var(self.effects.len() - 1)
    }

    fn lookup(&self, name: &str) -> Result<Ty, EffectError> {
        self.scope
            .iter()
            .rev()
            .find(|(x, _)| x == name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| EffectError::Unbound(name.to_string()))
    }

    fn with_binding<T>(&mut self, name: &str, ty: Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name.to_string(), ty));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn infer(&mut self, e: &Expr) -> Result<(Ty, Eff), EffectError> {
        match e {
            Expr::Int(_) => Ok((Ty::Int, Eff::Eps)),
            Expr::Var(x) => Ok((self.lookup(x)?, Eff::Eps)),
            Expr::Lam(x, body) => {
                let param = self.fresh_ty();
                let (result, latent) = self.with_binding(x, param.clone(), |inf| inf.infer(body))?;
                Ok((Ty::Arrow(Box::new(param), latent, Box::new(result)), Eff::Eps))
            }
            Expr::App(func, arg) => {
                let (tf, hf) = self.infer(func)?;
                let (ta, ha) = self.infer(arg)?;
                let (tr, latent) = self.call(tf, ta)?;
                Ok((tr, Eff::seq([hf, ha, latent])))
            }
            Expr::Prim(PrimOp::Syscall(name), arg) => {
                let tf = self.lookup(name)?;
                let (ta, ha) = self.infer(arg)?;
                let (tr, latent) = self.call(tf, ta)?;
                Ok((tr, Eff::seq([ha, latent])))
            }
            Expr::Prim(op, arg) => {
                let (ta, ha) = self.infer(arg)?;
                self.unify(&Ty::Int, &ta)?;
                let action = op.observable().expect("non-syscall primitives are observable");
                Ok((Ty::Int, Eff::seq([ha, Eff::Act(action)])))
            }
            Expr::Seq(first, second) => {
                let (_, h1) = self.infer(first)?;
                let (t2, h2) = self.infer(second)?;
                Ok((t2, Eff::seq([h1, h2])))
            }
            Expr::Let(x, bound, body) => {
                let (t1, h1) = self.infer(bound)?;
                let (t2, h2) = self.with_binding(x, t1, |inf| inf.infer(body))?;
                Ok((t2, Eff::seq([h1, h2])))
            }
            Expr::If(guard, then, otherwise) => {
                let (tl, hl) = self.infer(&guard.lhs)?;
                self.unify(&Ty::Int, &tl)?;
                let (tr, hr) = self.infer(&guard.rhs)?;
                self.unify(&Ty::Int, &tr)?;
                let (t1, h1) = self.infer(then)?;
                let (t2, h2) = self.infer(otherwise)?;
                self.unify(&t1, &t2)?;
                Ok((t1, Eff::seq([hl, hr, Eff::choice([h1, h2])])))
            }
            Expr::Hole => Err(EffectError::Hole),
        }
    }

    /// Type and latent effect of calling a function of type `tf` on `ta`.
    fn call(&mut self, tf: Ty, ta: Ty) -> Result<(Ty, Eff), EffectError> {
        let result = self.fresh_ty();
        let latent = self.fresh_eff();
        let expected = Ty::Arrow(Box::new(ta), latent.clone(), Box::new(result.clone()));
        self.unify(&expected, &tf)?;
        Ok((result, latent))
    }

    fn resolve_ty(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(v) => match &self.types[*v] {
                Some(bound) => self.resolve_ty(bound),
                None => t.clone(),
            },
            Ty::Int => Ty::Int,
            Ty::Arrow(a, h, r) => Ty::Arrow(
                Box::new(self.resolve_ty(a)),
                self.resolve_eff(h),
                Box::new(self.resolve_ty(r)),
            ),
        }
    }

    fn resolve_eff(&self, h: &Eff) -> Eff {
        match h {
            Eff::Var(v) => match &self.effects[*v] {
                Some(bound) => self.resolve_eff(bound),
                None => h.clone(),
            },
            Eff::Act(_) | Eff::Eps => h.clone(),
            Eff::Seq(items) => Eff::seq(items.iter().map(|e| self.resolve_eff(e))),
            Eff::Choice(items) => Eff::choice(items.iter().map(|e| self.resolve_eff(e))),
            Eff::Star(e) => match self.resolve_eff(e) {
                Eff::Eps => Eff::Eps,
                inner => Eff::Star(Box::new(inner)),
            },
        }
    }

    fn occurs_ty(&self, v: usize, t: &Ty) -> bool {
        match t {
            Ty::Var(w) => *w == v,
            Ty::Int => false,
            Ty::Arrow(a, _, r) => self.occurs_ty(v, a) || self.occurs_ty(v, r),
        }
    }

    fn unify(&mut self, expected: &Ty, found: &Ty) -> Result<(), EffectError> {
        let (a, b) = (self.resolve_ty(expected), self.resolve_ty(found));
        match (&a, &b) {
            (Ty::Int, Ty::Int) => Ok(()),
            (Ty::Var(v), Ty::Var(w)) if v == w => Ok(()),
            (Ty::Var(v), other) | (other, Ty::Var(v)) => {
                if self.occurs_ty(*v, other) {
                    return Err(EffectError::Occurs);
                }
                self.types[*v] = Some(other.clone());
                Ok(())
            }
            (Ty::Arrow(a1, h1, r1), Ty::Arrow(a2, h2, r2)) => {
                self.unify(a1, a2)?;
                self.unify_eff(h1, h2)?;
                self.unify(r1, r2)
            }
            _ => Err(EffectError::TypeMismatch {
                expected: a.to_string(),
                found: b.to_string(),
            }),
        }
    }

    fn unify_eff(&mut self, left: &Eff, right: &Eff) -> Result<(), EffectError> {
        let (a, b) = (self.resolve_eff(left), self.resolve_eff(right));
        if a == b {
            return Ok(());
        }
        let mismatch = || EffectError::LatentMismatch {
            left: a.to_string(),
            right: b.to_string(),
        };
        match (&a, &b) {
            (Eff::Var(v), other) | (other, Eff::Var(v)) => {
                if other.occurs(*v) {
                    return Err(mismatch());
                }
                self.effects[*v] = Some(other.clone());
                Ok(())
            }
            _ => match (a.to_hist(), b.to_hist()) {
                (Some(ha), Some(hb)) => {
                    if equiv(&ha, &hb) {
                        Ok(())
                    } else {
                        Err(mismatch())
                    }
                }
                // Both open: only identical shapes are matched up.
                _ => match (&a, &b) {
                    (Eff::Seq(xs), Eff::Seq(ys)) | (Eff::Choice(xs), Eff::Choice(ys)) if xs.len() == ys.len() => {
                        for (x, y) in xs.iter().zip(ys) {
                            self.unify_eff(x, y)?;
                        }
                        Ok(())
                    }
                    (Eff::Star(x), Eff::Star(y)) => self.unify_eff(x, y),
                    _ => Err(mismatch()),
                },
            },
        }
    }

    /// Unsolved type variables default to `int`, unsolved effects to `eps`.
    fn finish_type(&self, t: &Ty) -> EffType {
        match self.resolve_ty(t) {
            Ty::Var(_) | Ty::Int => EffType::Int,
            Ty::Arrow(a, h, r) => EffType::Arrow(
                Box::new(self.finish_type(&a)),
                normalize(&self.finish_effect(&h)),
                Box::new(self.finish_type(&r)),
            ),
        }
    }

    fn finish_effect(&self, h: &Eff) -> HistExpr {
        fn ground(h: &Eff) -> Eff {
            match h {
                Eff::Var(_) => Eff::Eps,
                Eff::Act(_) | Eff::Eps => h.clone(),
                Eff::Seq(items) => Eff::seq(items.iter().map(ground)),
                Eff::Choice(items) => Eff::choice(items.iter().map(ground)),
                Eff::Star(e) => Eff::Star(Box::new(ground(e))),
            }
        }
        ground(&self.resolve_eff(h)).to_hist().expect("ground effect")
    }
}
