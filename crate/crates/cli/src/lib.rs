//! The `stv` command-line tool.
//!
//! Exit codes: `0` success or accept, `1` reject or inequivalent, `2` usage
//! or tool error. With `--json` every invocation prints exactly one JSON
//! document on standard output, errors included.

pub mod files;
pub mod report;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stv_core::compiler::{compile, CompileError};
use stv_core::effects::{infer, EffectError, TypeEnv};
use stv_core::history::{distinguishing_word, word_to_string, ActionName, Alphabet, HistoryError};
use stv_core::semantics::{run as evaluate, Halt, RuntimeError, DEFAULT_FUEL};
use stv_core::syntax::{plug, Program, SyntaxError};
use stv_core::validator::{soundness_fuzz, validate, FuzzError, ValidationError, Verdict, APPROXIMATION_CAVEAT};

use report::{CompileDoc, EquivDoc, ErrorDoc, FuzzDoc, InferDoc, TraceDoc, VerdictDoc};

#[derive(Debug, Parser)]
#[command(name = "stv", version, about = "Load-time secure translation validation")]
pub struct Cli {
    /// Print one JSON document on standard output.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a source program to the target language.
    Compile {
        input: PathBuf,
        /// Where to write the target program; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        passes: PassArgs,
    },
    /// Infer the type and history expression of a program, or of a program
    /// plugged into a context.
    Infer {
        file: PathBuf,
        #[arg(long)]
        ctx: Option<PathBuf>,
    },
    /// Run a program and print its trace, one action per line.
    Trace {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long)]
        ctx: Option<PathBuf>,
    },
    /// Decide trace equivalence of two history expressions, given inline or
    /// as files.
    Equiv {
        h1: String,
        h2: String,
        /// Declare an action beyond `display` and `send`.
        #[arg(long = "action", value_name = "NAME")]
        actions: Vec<String>,
    },
    /// Check that a compiled program is safe to link into a target context.
    Validate {
        program: PathBuf,
        #[arg(long)]
        ctx: PathBuf,
        #[command(flatten)]
        passes: PassArgs,
    },
    /// Check inferred histories against runs of generated programs.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct PassArgs {
    /// Optimization pass to run after translation; repeatable.
    #[arg(long = "pass", value_name = "NAME")]
    pub passes: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: unknown file extension (expected .src, .trg, .sctx or .tctx)", .0.display())]
    Extension(PathBuf),
    #[error("{}: expected {what}", path.display())]
    Expected { path: PathBuf, what: &'static str },
    #[error("{}: {source}", path.display())]
    Syntax { path: PathBuf, source: SyntaxError },
    #[error("history expression `{input}`: {source}")]
    History { input: String, source: HistoryError },
    #[error("undeclared action `{0}`; declare it with --action")]
    UndeclaredAction(ActionName),
    #[error(transparent)]
    Plug(#[from] SyntaxError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error("cannot write output: {0}")]
    Output(#[source] io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e)
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// Parse `args` and execute. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if cli.json {
                let _ = emit(out, &ErrorDoc { error: e.to_string() });
            }
            EXIT_ERROR
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, doc: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).expect("report documents serialize");
    writeln!(out, "{text}")?;
    Ok(())
}

fn with_context(file: &Path, ctx: Option<&Path>) -> Result<Program, CliError> {
    let program = files::load_program(file)?;
    match ctx {
        Some(c) => Ok(plug(&files::load_context(c)?, &program)?),
        None => Ok(program),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Compile { input, output, passes } => {
            let unit = compile(&files::load_program(input)?, &passes.passes)?;
            let text = format!("{}\n", unit.target);
            if let Some(path) = output {
                files::write(path, &text)?;
            }
            if cli.json {
                emit(
                    out,
                    &CompileDoc {
                        target: unit.target.to_string(),
                        passes: unit.applied_passes.iter().map(|p| p.name().to_string()).collect(),
                        output: output.as_ref().map(|p| p.display().to_string()),
                    },
                )?;
            } else if output.is_none() {
                write!(out, "{text}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Infer { file, ctx } => {
            let program = with_context(file, ctx.as_deref())?;
            let (ty, effect) = infer(program.body(), &TypeEnv::new())?;
            if cli.json {
                emit(
                    out,
                    &InferDoc {
                        ty: ty.to_string(),
                        effect: effect.to_string(),
                    },
                )?;
            } else {
                writeln!(out, "type: {ty}")?;
                writeln!(out, "effect: {effect}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Trace { file, fuel, ctx } => {
            let program = with_context(file, ctx.as_deref())?;
            let outcome = evaluate(program.body(), *fuel)?;
            if cli.json {
                emit(out, &TraceDoc::new(&outcome))?;
            } else {
                write!(out, "{}", outcome.trace)?;
                match &outcome.halt {
                    Halt::Value(v) => writeln!(err, "value: {v}")?,
                    Halt::OutOfFuel => writeln!(err, "out of fuel after {fuel} steps")?,
                }
            }
            Ok(EXIT_OK)
        }
        Command::Equiv { h1, h2, actions } => {
            let (h1, h2) = (files::load_history(h1)?, files::load_history(h2)?);
            let mut alphabet = Alphabet::observable();
            for a in actions {
                alphabet.insert(ActionName::new(a.as_str()));
            }
            if let Some(a) = h1.actions().union(&h2.actions()).iter().find(|a| !alphabet.contains(a)) {
                return Err(CliError::UndeclaredAction(a.clone()));
            }
            let witness = distinguishing_word(&h1, &h2, &alphabet).expect("alphabet covers both expressions");
            if cli.json {
                emit(out, &EquivDoc::new(witness.as_ref()))?;
            } else {
                match &witness {
                    None => writeln!(out, "equivalent")?,
                    Some(w) => writeln!(out, "not equivalent: {} is in exactly one language", word_to_string(w))?,
                }
            }
            Ok(if witness.is_none() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Validate { program, ctx, passes } => {
            let verdict = validate(
                &files::load_program(program)?,
                &passes.passes,
                &files::load_context(ctx)?,
            )?;
            if cli.json {
                emit(out, &VerdictDoc::new(&verdict))?;
            } else {
                match &verdict {
                    Verdict::Accept {
                        source_context,
                        h_target,
                        h_source,
                    } => {
                        writeln!(out, "accept")?;
                        writeln!(out, "H_T = {h_target}")?;
                        writeln!(out, "H_S = {h_source}")?;
                        writeln!(out, "source context: {source_context}")?;
                    }
                    Verdict::Reject {
                        witness,
                        reason,
                        h_target,
                    } => {
                        writeln!(out, "reject")?;
                        writeln!(out, "witness: {}", word_to_string(witness))?;
                        writeln!(out, "reason: {reason}")?;
                        writeln!(out, "H_T = {h_target}")?;
                        writeln!(out, "note: {APPROXIMATION_CAVEAT}")?;
                    }
                }
            }
            Ok(if verdict.is_accept() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Fuzz { n, seed } => {
            let report = soundness_fuzz(*n, *seed)?;
            if cli.json {
                emit(out, &FuzzDoc::new(&report))?;
            } else {
                writeln!(
                    out,
                    "{} runs, {} terminated, {} out of fuel, {} violations",
                    report.runs,
                    report.terminated,
                    report.out_of_fuel,
                    report.violations.len()
                )?;
                for v in &report.violations {
                    writeln!(out, "seed {}: {}", v.seed, report::describe_violation(&v.kind))?;
                    writeln!(out, "  {}", v.term)?;
                }
            }
            Ok(if report.violations.is_empty() {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            })
        }
    }
}
