//! Trace semantics shared by both languages.
//!
//! Evaluation is call-by-value, left to right. Each expression visited costs
//! one unit of fuel; running out is reported as divergence together with the
//! actions emitted so far. The evaluator keeps its continuation on the heap,
//! so deep or non-terminating terms cannot exhaust the native stack.

use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::history::{ActionName, Word};
use crate::syntax::{CmpOp, Expr, Guard, PrimOp};

/// Default evaluation budget.
pub const DEFAULT_FUEL: u64 = 10_000;

/// An observable event with its integer payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub name: ActionName,
    pub payload: Option<i64>,
}

impl Action {
    pub fn new(name: ActionName, payload: Option<i64>) -> Self {
        Action { name, payload }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payload {
            Some(v) => write!(f, "{}({v})", self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

/// A finite sequence of actions, in emission order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Trace(pub Vec<Action>);

impl Trace {
    pub fn new() -> Self {
        Trace(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    /// Drop payloads, keeping the action names.
    pub fn erase(&self) -> Word {
        self.0.iter().map(|a| a.name.clone()).collect()
    }

    pub fn is_prefix_of(&self, other: &Trace) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// One action per line, `name(payload)`.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for action in &self.0 {
            writeln!(f, "{action}")?;
        }
        Ok(())
    }
}

/// All prefixes of `t`, shortest first, from the empty trace to `t` itself.
pub fn trace_prefixes(t: &Trace) -> Vec<Trace> {
    (0..=t.len()).map(|n| Trace(t.0[..n].to_vec())).collect()
}

#[derive(Clone)]
pub enum Value<'a> {
    Int(i64),
    Closure(Closure<'a>),
}

#[derive(Clone)]
pub struct Closure<'a> {
    param: &'a str,
    body: &'a Expr,
    env: Env<'a>,
}

impl Value<'_> {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Closure(_) => None,
        }
    }
}

impl fmt::Debug for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "Int({n})"),
            Value::Closure(c) => write!(f, "Closure(fun {} -> {})", c.param, c.body),
        }
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Closure(_) => f.write_str("<fun>"),
        }
    }
}

/// Values compare by their integer; closures never compare equal.
impl PartialEq for Value<'_> {
    fn eq(&self, other: &Self) -> bool {
        matches!((self, other), (Value::Int(a), Value::Int(b)) if a == b)
    }
}

type Env<'a> = Option<Rc<Frame<'a>>>;

struct Frame<'a> {
    name: &'a str,
    value: Value<'a>,
    next: Env<'a>,
}

fn bind<'a>(env: &Env<'a>, name: &'a str, value: Value<'a>) -> Env<'a> {
    Some(Rc::new(Frame {
        name,
        value,
        next: env.clone(),
    }))
}

fn lookup<'a>(env: &Env<'a>, name: &str) -> Option<Value<'a>> {
    let mut cur = env.as_deref();
    while let Some(frame) = cur {
        if frame.name == name {
            return Some(frame.value.clone());
        }
        cur = frame.next.as_deref();
    }
    None
}

/// How an evaluation stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Halt<'a> {
    Value(Value<'a>),
    OutOfFuel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<'a> {
    pub halt: Halt<'a>,
    pub trace: Trace,
}

impl Outcome<'_> {
    pub fn terminated(&self) -> bool {
        matches!(self.halt, Halt::Value(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeErrorKind {
    #[error("applied a non-function")]
    NotAFunction,
    #[error("compared a function")]
    CompareFunction,
    #[error("primitive `{0}` applied to a function")]
    PrimitiveOnFunction(String),
    #[error("system call `{0}` is not bound")]
    UnboundSyscall(String),
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("evaluated a hole")]
    Hole,
}

/// A stuck evaluation, with the actions emitted before it got stuck.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("runtime error: {kind}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub trace: Trace,
}

enum Cont<'a> {
    AppArg(&'a Expr, Env<'a>),
    AppCall(Value<'a>),
    PrimArg(&'a PrimOp, Env<'a>),
    SeqNext(&'a Expr, Env<'a>),
    LetBody(&'a str, &'a Expr, Env<'a>),
    GuardRhs(&'a Guard, &'a Expr, &'a Expr, Env<'a>),
    GuardCmp(CmpOp, i64, &'a Expr, &'a Expr, Env<'a>),
}

enum Control<'a> {
    Eval(&'a Expr, Env<'a>),
    Return(Value<'a>),
}

/// Evaluate a closed expression with a step budget.
pub fn run(e: &Expr, fuel: u64) -> Result<Outcome<'_>, RuntimeError> {
    let mut trace = Trace::new();
    let mut fuel = fuel;
    let mut stack: Vec<Cont<'_>> = Vec::new();
    let mut control = Control::Eval(e, None);
    macro_rules! fail {
        ($kind:expr) => {
            return Err(RuntimeError { kind: $kind, trace })
        };
    }
    loop {
        control = match control {
            Control::Eval(e, env) => {
                if fuel == 0 {
                    return Ok(Outcome {
                        halt: Halt::OutOfFuel,
                        trace,
                    });
                }
                fuel -= 1;
                match e {
                    Expr::Int(n) => Control::Return(Value::Int(*n)),
                    Expr::Var(x) => match lookup(&env, x) {
                        Some(v) => Control::Return(v),
                        None => fail!(RuntimeErrorKind::Unbound(x.clone())),
                    },
                    Expr::Lam(param, body) => Control::Return(Value::Closure(Closure { param, body, env })),
                    Expr::App(func, arg) => {
                        stack.push(Cont::AppArg(arg, env.clone()));
                        Control::Eval(func, env)
                    }
                    Expr::Prim(op, arg) => {
                        stack.push(Cont::PrimArg(op, env.clone()));
                        Control::Eval(arg, env)
                    }
                    Expr::Seq(first, second) => {
                        stack.push(Cont::SeqNext(second, env.clone()));
                        Control::Eval(first, env)
                    }
                    Expr::Let(x, bound, body) => {
                        stack.push(Cont::LetBody(x, body, env.clone()));
                        Control::Eval(bound, env)
                    }
                    Expr::If(guard, then, otherwise) => {
                        stack.push(Cont::GuardRhs(guard, then, otherwise, env.clone()));
                        Control::Eval(&guard.lhs, env)
                    }
                    Expr::Hole => fail!(RuntimeErrorKind::Hole),
                }
            }
            Control::Return(v) => match stack.pop() {
                None => {
                    return Ok(Outcome {
                        halt: Halt::Value(v),
                        trace,
                    })
                }
                Some(Cont::AppArg(arg, env)) => {
                    stack.push(Cont::AppCall(v));
                    Control::Eval(arg, env)
                }
                Some(Cont::AppCall(func)) => match func {
                    Value::Closure(c) => Control::Eval(c.body, bind(&c.env, c.param, v)),
                    Value::Int(_) => fail!(RuntimeErrorKind::NotAFunction),
                },
                Some(Cont::PrimArg(op, env)) => match op {
                    PrimOp::Syscall(name) => match lookup(&env, name) {
                        Some(Value::Closure(c)) => Control::Eval(c.body, bind(&c.env, c.param, v)),
                        Some(Value::Int(_)) => fail!(RuntimeErrorKind::NotAFunction),
                        None => fail!(RuntimeErrorKind::UnboundSyscall(name.clone())),
                    },
                    _ => {
                        let Some(n) = v.as_int() else {
                            fail!(RuntimeErrorKind::PrimitiveOnFunction(op.name().into()))
                        };
                        let name = op.observable().expect("non-syscall primitives are observable");
                        trace.0.push(Action::new(name, Some(n)));
                        Control::Return(Value::Int(n))
                    }
                },
                Some(Cont::SeqNext(second, env)) => Control::Eval(second, env),
                Some(Cont::LetBody(x, body, env)) => Control::Eval(body, bind(&env, x, v)),
                Some(Cont::GuardRhs(guard, then, otherwise, env)) => {
                    let Some(lhs) = v.as_int() else {
                        fail!(RuntimeErrorKind::CompareFunction)
                    };
                    stack.push(Cont::GuardCmp(guard.op, lhs, then, otherwise, env.clone()));
                    Control::Eval(&guard.rhs, env)
                }
                Some(Cont::GuardCmp(op, lhs, then, otherwise, env)) => {
                    let Some(rhs) = v.as_int() else {
                        fail!(RuntimeErrorKind::CompareFunction)
                    };
                    Control::Eval(if op.holds(lhs, rhs) { then } else { otherwise }, env)
                }
            },
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_program, plug, Language};

    const T: &str = "fun i -> if i >= 0 then (sc_print i; i) else (-1)";

    fn display(n: i64) -> Action {
        Action::new(ActionName::display(), Some(n))
    }

    fn send(n: i64) -> Action {
        Action::new(ActionName::send(), Some(n))
    }

    fn run_plugged(ctx: &str) -> (Option<i64>, Trace) {
        let ctx = parse_context(ctx, Language::Target).unwrap();
        let t = parse_program(T, Language::Target).unwrap();
        let p = plug(&ctx, &t).unwrap();
        let out = run(p.body(), DEFAULT_FUEL).unwrap();
        let value = match out.halt {
            Halt::Value(v) => v.as_int(),
            Halt::OutOfFuel => None,
        };
        (value, out.trace)
    }

    #[test]
    fn evil_context_displays_then_sends() {
        let (v, t) = run_plugged("(fun i -> let sc_print = fun x -> (display x; send x) in [.] i) 42");
        assert_eq!(v, Some(42));
        assert_eq!(t, Trace(alloc::vec![display(42), send(42)]));
        assert_eq!(t.to_string(), "display(42)\nsend(42)\n");
    }

    #[test]
    fn friendly_context_only_displays() {
        let (v, t) = run_plugged("(fun i -> let sc_print = fun x -> display x in [.] i) 42");
        assert_eq!(v, Some(42));
        assert_eq!(t, Trace(alloc::vec![display(42)]));
    }

    #[test]
    fn negative_branch_is_silent() {
        let p = parse_program(
            "(fun i -> if i >= 0 then (print i; i) else (-1)) (-5)",
            Language::Source,
        )
        .unwrap();
        let out = run(p.body(), DEFAULT_FUEL).unwrap();
        assert_eq!(out.halt, Halt::Value(Value::Int(-1)));
        assert!(out.trace.is_empty());
    }

    #[test]
    fn divergence_keeps_partial_trace() {
        let p = parse_program("display 1; (fun x -> x x) (fun x -> x x)", Language::Target).unwrap();
        let out = run(p.body(), 100_000).unwrap();
        assert_eq!(out.halt, Halt::OutOfFuel);
        assert_eq!(out.trace, Trace(alloc::vec![display(1)]));
    }

    #[test]
    fn runtime_errors() {
        let cases = [
            ("1 2", RuntimeErrorKind::NotAFunction),
            ("if (fun x -> x) >= 0 then 1 else 2", RuntimeErrorKind::CompareFunction),
            (
                "display (fun x -> x)",
                RuntimeErrorKind::PrimitiveOnFunction("display".into()),
            ),
            (
                "display 3; sc_exit 0",
                RuntimeErrorKind::UnboundSyscall("sc_exit".into()),
            ),
        ];
        for (text, kind) in cases {
            let p = parse_program(text, Language::Target).unwrap();
            let err = run(p.body(), DEFAULT_FUEL).unwrap_err();
            assert_eq!(err.kind, kind, "{text}");
        }
        let p = parse_program("display 3; sc_exit 0", Language::Target).unwrap();
        assert_eq!(
            run(p.body(), DEFAULT_FUEL).unwrap_err().trace,
            Trace(alloc::vec![display(3)])
        );
    }

    #[test]
    fn closures_are_lexically_scoped() {
        let p = parse_program(
            "let x = 1 in let f = fun y -> display x in let x = 2 in f 0",
            Language::Target,
        )
        .unwrap();
        assert_eq!(
            run(p.body(), DEFAULT_FUEL).unwrap().trace,
            Trace(alloc::vec![display(1)])
        );
    }

    #[test]
    fn prefixes() {
        let t = Trace(alloc::vec![display(1), send(1)]);
        let ps = trace_prefixes(&t);
        assert_eq!(ps.len(), 3);
        assert_eq!(ps[0], Trace::new());
        assert_eq!(ps[1], Trace(alloc::vec![display(1)]));
        assert_eq!(ps[2], t);
        assert_eq!(trace_prefixes(&Trace::new()), alloc::vec![Trace::new()]);
        assert_eq!(trace_prefixes(&Trace(alloc::vec![display(0)])).len(), 2);
    }
}
