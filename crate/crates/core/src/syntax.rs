//! Abstract syntax, concrete grammar and one-hole contexts.
//!
//! Both languages share one expression type. They differ only in the
//! primitives they may call: the source language has `print`, the target
//! language has `display`, `send` and system calls. A system call is any
//! identifier starting with `sc_`; it carries no behaviour of its own and is
//! resolved through whatever binding of that name encloses the call.
//!
//! The concrete grammar is ML-style:
//!
//! ```text
//! full   ::= simple [ ";" full ]
//! simple ::= "fun" IDENT "->" full
//!          | "let" IDENT "=" full "in" full
//!          | "if" app CMP app "then" simple "else" simple
//!          | app
//! app    ::= PRIM atom atom* | atom atom*
//! atom   ::= INT | "(" "-" INT ")" | IDENT | "[.]" | "(" full ")"
//! CMP    ::= ">=" | "<=" | "=" | "<" | ">"
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::history::ActionName;

/// Which side of the compiler an AST belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Source,
    Target,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Source => f.write_str("source"),
            Language::Target => f.write_str("target"),
        }
    }
}

/// The name the compiler gives to the system call implementing `print`.
pub const SYSCALL_PRINT: &str = "sc_print";

/// Whether `name` is a system-call identifier.
pub fn is_syscall_name(name: &str) -> bool {
    name.len() > 3 && name.starts_with("sc_")
}

const KEYWORDS: [&str; 6] = ["fun", "let", "in", "if", "then", "else"];
const PRIMITIVES: [&str; 3] = ["print", "display", "send"];

fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || PRIMITIVES.contains(&name)
}

/// A primitive operation applied to one argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimOp {
    /// Source output on the screen.
    Print,
    /// Target output on the screen.
    Display,
    /// Target output on the network.
    Send,
    /// Target system call, resolved by name through the enclosing bindings.
    Syscall(String),
}

impl PrimOp {
    pub fn name(&self) -> &str {
        match self {
            PrimOp::Print => "print",
            PrimOp::Display => "display",
            PrimOp::Send => "send",
            PrimOp::Syscall(name) => name,
        }
    }

    pub fn language(&self) -> Language {
        match self {
            PrimOp::Print => Language::Source,
            _ => Language::Target,
        }
    }

    /// The action emitted when the primitive runs, if it has one of its own.
    pub fn observable(&self) -> Option<ActionName> {
        match self {
            PrimOp::Print | PrimOp::Display => Some(ActionName::display()),
            PrimOp::Send => Some(ActionName::send()),
            PrimOp::Syscall(_) => None,
        }
    }

    fn from_reserved(name: &str) -> Option<PrimOp> {
        match name {
            "print" => Some(PrimOp::Print),
            "display" => Some(PrimOp::Display),
            "send" => Some(PrimOp::Send),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Ge,
    Le,
    Eq,
    Lt,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

/// Integer comparison used as the guard of a conditional.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub op: CmpOp,
    pub lhs: Box<Expr>,
    pub rhs: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Var(String),
    Lam(String, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    If(Guard, Box<Expr>, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    Let(String, Box<Expr>, Box<Expr>),
    Prim(PrimOp, Box<Expr>),
    /// The hole of a context. Never present in a program.
    Hole,
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn lam(param: &str, body: Expr) -> Expr {
        Expr::Lam(param.to_string(), Box::new(body))
    }

    pub fn app(func: Expr, arg: Expr) -> Expr {
        Expr::App(Box::new(func), Box::new(arg))
    }

    pub fn seq(first: Expr, second: Expr) -> Expr {
        Expr::Seq(Box::new(first), Box::new(second))
    }

    pub fn let_in(name: &str, bound: Expr, body: Expr) -> Expr {
        Expr::Let(name.to_string(), Box::new(bound), Box::new(body))
    }

    pub fn if_then_else(op: CmpOp, lhs: Expr, rhs: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::If(
            Guard {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            Box::new(then),
            Box::new(otherwise),
        )
    }

    pub fn prim(op: PrimOp, arg: Expr) -> Expr {
        Expr::Prim(op, Box::new(arg))
    }

    pub fn syscall(name: &str, arg: Expr) -> Expr {
        Expr::Prim(PrimOp::Syscall(name.to_string()), Box::new(arg))
    }

    /// Direct children, left to right in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Var(_) | Expr::Hole => Vec::new(),
            Expr::Lam(_, body) => alloc::vec![&**body],
            Expr::App(a, b) | Expr::Seq(a, b) | Expr::Let(_, a, b) => alloc::vec![&**a, &**b],
            Expr::If(g, t, e) => alloc::vec![&*g.lhs, &*g.rhs, &**t, &**e],
            Expr::Prim(_, arg) => alloc::vec![&**arg],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Expr::node_count).sum::<usize>()
    }

    /// Nesting depth; leaves have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Expr::depth).max().unwrap_or(0)
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Expr::Hole => 1,
            _ => self.children().into_iter().map(Expr::hole_count).sum(),
        }
    }

    /// Free identifiers, including the names of system calls made.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) | Expr::Prim(PrimOp::Syscall(x), _) if !bound.contains(&x.as_str()) => {
                out.insert(x.clone());
            }
            _ => {}
        }
        match self {
            Expr::Lam(x, body) => {
                bound.push(x);
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::Let(x, e1, e2) => {
                e1.collect_free(bound, out);
                bound.push(x);
                e2.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for child in self.children() {
                    child.collect_free(bound, out);
                }
            }
        }
    }

    /// Every identifier occurring anywhere, bound or free.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Var(x) | Expr::Lam(x, _) | Expr::Let(x, _, _) => {
                out.insert(x.clone());
            }
            Expr::Prim(PrimOp::Syscall(x), _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Syntactic values: evaluating them emits nothing and cannot fail.
    pub fn is_pure(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Var(_) | Expr::Lam(..))
    }

    /// Replace every hole with `prog`, without any renaming.
    pub fn fill_hole(&self, prog: &Expr) -> Expr {
        match self {
            Expr::Hole => prog.clone(),
            Expr::Int(_) | Expr::Var(_) => self.clone(),
            Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(body.fill_hole(prog))),
            Expr::App(a, b) => Expr::app(a.fill_hole(prog), b.fill_hole(prog)),
            Expr::Seq(a, b) => Expr::seq(a.fill_hole(prog), b.fill_hole(prog)),
            Expr::Let(x, a, b) => Expr::Let(x.clone(), Box::new(a.fill_hole(prog)), Box::new(b.fill_hole(prog))),
            Expr::If(g, t, e) => Expr::If(
                Guard {
                    op: g.op,
                    lhs: Box::new(g.lhs.fill_hole(prog)),
                    rhs: Box::new(g.rhs.fill_hole(prog)),
                },
                Box::new(t.fill_hole(prog)),
                Box::new(e.fill_hole(prog)),
            ),
            Expr::Prim(op, arg) => Expr::Prim(op.clone(), Box::new(arg.fill_hole(prog))),
        }
    }

    /// First primitive in the tree not available in `lang`.
    fn foreign_primitive(&self, lang: Language) -> Option<&PrimOp> {
        let mut found = None;
        self.visit(&mut |e| {
            if let Expr::Prim(op, _) = e {
                if found.is_none() && op.language() != lang {
                    found = Some(op);
                }
            }
        });
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("primitive `{name}` is not part of the {language} language")]
    WrongLanguage { name: String, language: Language },
    #[error("a context must contain exactly one hole, found {0}")]
    HoleCount(usize),
    #[error("language mismatch: {context} context, {program} program")]
    LanguageMismatch { context: Language, program: Language },
}

/// A closed expression of one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    lang: Language,
    body: Expr,
}

impl Program {
    /// Checks closedness and the primitive set. Target programs may mention
    /// system calls freely; a context is expected to bind them.
    pub fn new(lang: Language, body: Expr) -> Result<Self, SyntaxError> {
        if body.hole_count() > 0 {
            return Err(SyntaxError::HoleCount(body.hole_count()));
        }
        check_language(&body, lang)?;
        check_closed(&body, lang)?;
        Ok(Program { lang, body })
    }

    pub fn language(&self) -> Language {
        self.lang
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn into_body(self) -> Expr {
        self.body
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.fmt(f)
    }
}

/// An expression of one language with exactly one hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    lang: Language,
    body: Expr,
}

impl Context {
    pub fn new(lang: Language, body: Expr) -> Result<Self, SyntaxError> {
        match body.hole_count() {
            1 => {}
            n => return Err(SyntaxError::HoleCount(n)),
        }
        check_language(&body, lang)?;
        check_closed(&body, lang)?;
        Ok(Context { lang, body })
    }

    /// The bare hole `[.]`.
    pub fn identity(lang: Language) -> Self {
        Context { lang, body: Expr::Hole }
    }

    pub fn language(&self) -> Language {
        self.lang
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.fmt(f)
    }
}

fn check_language(body: &Expr, lang: Language) -> Result<(), SyntaxError> {
    match body.foreign_primitive(lang) {
        Some(op) => Err(SyntaxError::WrongLanguage {
            name: op.name().to_string(),
            language: lang,
        }),
        None => Ok(()),
    }
}

fn check_closed(body: &Expr, lang: Language) -> Result<(), SyntaxError> {
    let unbound = body
        .free_vars()
        .into_iter()
        .find(|x| !(lang == Language::Target && is_syscall_name(x)));
    match unbound {
        Some(x) => Err(SyntaxError::Unbound(x)),
        None => Ok(()),
    }
}

pub fn parse_program(text: &str, lang: Language) -> Result<Program, SyntaxError> {
    let body = Parser::new(text, lang, false)?.parse_all()?;
    Program::new(lang, body)
}

pub fn parse_context(text: &str, lang: Language) -> Result<Context, SyntaxError> {
    let body = Parser::new(text, lang, true)?.parse_all()?;
    Context::new(lang, body)
}

/// Parse an expression without the closedness check. Holes are accepted.
pub fn parse_expr(text: &str, lang: Language) -> Result<Expr, SyntaxError> {
    Parser::new(text, lang, true)?.parse_all()
}

/// Put `prog` in the hole of `ctx`. Bindings around the hole are visible to
/// the program; no renaming takes place.
pub fn plug(ctx: &Context, prog: &Program) -> Result<Program, SyntaxError> {
    if ctx.lang != prog.lang {
        return Err(SyntaxError::LanguageMismatch {
            context: ctx.lang,
            program: prog.lang,
        });
    }
    Ok(Program {
        lang: ctx.lang,
        body: ctx.body.fill_hole(&prog.body),
    })
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Arrow,
    Cmp(CmpOp),
    LParen,
    RParen,
    Semi,
    Minus,
    Hole,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Ident(x) => write!(f, "`{x}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Hole => f.write_str("`[.]`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let err = |line, column, message: String| SyntaxError::Parse { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            column += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i);
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<u64>().map_err(|_| {
                err(
                    start_line,
                    start_col,
                    alloc::format!("integer literal {digits} is too large"),
                )
            })?;
            Tok::Int(n)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                advance(1, &mut i);
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
                ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
                ('[', Some('.')) if chars.get(i + 2) == Some(&']') => (Tok::Hole, 3),
                ('-', _) => (Tok::Minus, 1),
                ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
                ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
                ('=', _) => (Tok::Cmp(CmpOp::Eq), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (';', _) => (Tok::Semi, 1),
                _ => {
                    return Err(err(line, column, alloc::format!("unexpected character `{c}`")));
                }
            };
            advance(len, &mut i);
            tok
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    lang: Language,
    holes_allowed: bool,
}

impl Parser {
    fn new(text: &str, lang: Language, holes_allowed: bool) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            lang,
            holes_allowed,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: String) -> SyntaxError {
        let here = &self.toks[self.pos];
        SyntaxError::Parse {
            line: here.line,
            column: here.column,
            message,
        }
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(alloc::format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&alloc::format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(x) if !is_reserved(&x) => {
                self.bump();
                Ok(x)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn parse_all(mut self) -> Result<Expr, SyntaxError> {
        let e = self.full()?;
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(e)
    }

    fn full(&mut self) -> Result<Expr, SyntaxError> {
        let first = self.simple()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            let rest = self.full()?;
            return Ok(Expr::seq(first, rest));
        }
        Ok(first)
    }

    fn simple(&mut self) -> Result<Expr, SyntaxError> {
        if self.is_keyword("fun") {
            self.bump();
            let param = self.binder()?;
            self.expect(Tok::Arrow)?;
            let body = self.full()?;
            return Ok(Expr::Lam(param, Box::new(body)));
        }
        if self.is_keyword("let") {
            self.bump();
            let name = self.binder()?;
            self.expect(Tok::Cmp(CmpOp::Eq))?;
            let bound = self.full()?;
            self.expect_keyword("in")?;
            let body = self.full()?;
            return Ok(Expr::Let(name, Box::new(bound), Box::new(body)));
        }
        if self.is_keyword("if") {
            self.bump();
            let lhs = self.app()?;
            let op = match self.peek() {
                Tok::Cmp(op) => *op,
                _ => return Err(self.unexpected("a comparison operator")),
            };
            self.bump();
            let rhs = self.app()?;
            self.expect_keyword("then")?;
            let then = self.simple()?;
            self.expect_keyword("else")?;
            let otherwise = self.simple()?;
            return Ok(Expr::if_then_else(op, lhs, rhs, then, otherwise));
        }
        self.app()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::LParen | Tok::Hole => true,
            Tok::Ident(x) => !is_reserved(x),
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Expr, SyntaxError> {
        let mut head = match self.peek().clone() {
            Tok::Ident(name) if PRIMITIVES.contains(&name.as_str()) => {
                let op = PrimOp::from_reserved(&name).expect("reserved primitive");
                if op.language() != self.lang {
                    return Err(SyntaxError::WrongLanguage {
                        name,
                        language: self.lang,
                    });
                }
                self.bump();
                if !self.starts_atom() {
                    return Err(self.unexpected(&alloc::format!("an argument for `{name}`")));
                }
                Expr::Prim(op, Box::new(self.atom()?))
            }
            Tok::Ident(name) if self.lang == Language::Target && is_syscall_name(&name) => {
                self.bump();
                if self.starts_atom() {
                    Expr::Prim(PrimOp::Syscall(name), Box::new(self.atom()?))
                } else {
                    Expr::Var(name)
                }
            }
            _ => self.atom()?,
        };
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Expr::app(head, arg);
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                i64::try_from(n)
                    .map(Expr::Int)
                    .map_err(|_| self.error(alloc::format!("integer literal {n} is too large")))
            }
            Tok::Ident(x) if !is_reserved(&x) => {
                self.bump();
                Ok(Expr::Var(x))
            }
            Tok::Hole => {
                if !self.holes_allowed {
                    return Err(self.error("a program cannot contain a hole".to_string()));
                }
                self.bump();
                Ok(Expr::Hole)
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::Minus {
                    self.bump();
                    let n = match self.peek() {
                        Tok::Int(n) => *n,
                        _ => return Err(self.unexpected("an integer literal")),
                    };
                    let value = i64::try_from(n)
                        .ok()
                        .and_then(i64::checked_neg)
                        .or((n == 1u64 << 63).then_some(i64::MIN))
                        .ok_or_else(|| self.error(alloc::format!("integer literal -{n} is too small")))?;
                    self.bump();
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Int(value));
                }
                let inner = self.full()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(x) => Err(self.error(alloc::format!("`{x}` is reserved and cannot be used here"))),
            _ => Err(self.unexpected("an expression")),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_full(self, f)
    }
}

/// A position that extends to the next `)`, `in` or end of input.
fn write_full(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Seq(a, b) => {
            write_simple(a, f)?;
            f.write_str("; ")?;
            write_full(b, f)
        }
        Expr::Lam(x, body) => {
            write!(f, "fun {x} -> ")?;
            write_full(body, f)
        }
        Expr::Let(x, bound, body) => {
            write!(f, "let {x} = ")?;
            write_full(bound, f)?;
            f.write_str(" in ")?;
            write_full(body, f)
        }
        _ => write_simple(e, f),
    }
}

/// A position that may be followed by `;`, `then` or `else`.
fn write_simple(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::If(g, then, otherwise) => {
            f.write_str("if ")?;
            write_app(&g.lhs, f)?;
            write!(f, " {} ", g.op.symbol())?;
            write_app(&g.rhs, f)?;
            f.write_str(" then ")?;
            write_simple(then, f)?;
            f.write_str(" else ")?;
            write_simple(otherwise, f)
        }
        _ => write_app(e, f),
    }
}

fn write_app(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::App(func, arg) => {
            write_head(func, f)?;
            f.write_str(" ")?;
            write_atom(arg, f)
        }
        Expr::Prim(op, arg) => {
            write!(f, "{} ", op.name())?;
            write_atom(arg, f)
        }
        _ => write_atom(e, f),
    }
}

fn write_head(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::App(..) | Expr::Prim(..) => write_app(e, f),
        // A bare syscall name in head position would reparse as a call.
        Expr::Var(x) if is_syscall_name(x) => write!(f, "({x})"),
        _ => write_atom(e, f),
    }
}

fn write_atom(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Int(n) if *n < 0 => write!(f, "({n})"),
        Expr::Int(n) => write!(f, "{n}"),
        Expr::Var(x) => f.write_str(x),
        Expr::Hole => f.write_str("[.]"),
        _ => {
            f.write_str("(")?;
            write_full(e, f)?;
            f.write_str(")")
        }
    }
}
