#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

//! Secure translation validation at load time.
//!
//! A program written in a small functional source language is compiled to a
//! target language whose I/O goes through system calls. Before the compiled
//! program is run inside some target context, the pair is checked: every
//! observable trace prefix the plugged target term can produce must also be
//! producible by the source program inside some source context. The check is
//! decided on history expressions, regular over-approximations of the
//! observable traces inferred by a type-and-effect analysis.
//!
//! The crate is `no_std` and only needs `alloc`. File handling and the
//! command-line front end live in the companion `stv-cli` crate.
//!
//! Modules, bottom-up:
//! - [`syntax`]: ASTs, the concrete ML-style grammar, one-hole contexts.
//! - [`semantics`]: a fuel-bounded interpreter producing observable traces.
//! - [`compiler`]: the source-to-target translation and one optimization.
//! - [`history`]: history expressions, trace automata, inclusion, equivalence.
//! - [`effects`]: type-and-effect inference yielding history expressions.
//! - [`validator`]: the robust-safety check with witnesses.
//! - [`testgen`]: seeded generators and brute-force trace enumeration.

extern crate alloc;

pub mod compiler;
pub mod effects;
pub mod history;
pub mod semantics;
pub mod syntax;
pub mod testgen;
pub mod validator;

pub use compiler::{compile, translate, CompilationUnit, Pass};
pub use effects::{infer, infer_in_hole, EffType, TypeEnv};
pub use history::{equiv, includes, member, normalize, prefix_close, to_automaton};
pub use history::{ActionName, Alphabet, HistExpr, Inclusion, TraceAutomaton, Word};
pub use semantics::{run, trace_prefixes, Action, Halt, Outcome, Trace, Value, DEFAULT_FUEL};
pub use syntax::{parse_context, parse_program, plug, Context, Expr, Language, PrimOp, Program};
pub use validator::{back_translate, source_alphabet, validate, RejectReason, Verdict};
