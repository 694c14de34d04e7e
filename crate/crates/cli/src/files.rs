//! Reading programs, contexts and history expressions from disk.

use std::fs;
use std::path::{Path, PathBuf};

use stv_core::history::HistExpr;
use stv_core::syntax::{parse_context, parse_program, Context, Language, Program, SyntaxError};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Program(Language),
    Context(Language),
}

/// `.src`, `.trg`, `.sctx` and `.tctx`.
pub fn kind_of(path: &Path) -> Result<FileKind, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("src") => Ok(FileKind::Program(Language::Source)),
        Some("trg") => Ok(FileKind::Program(Language::Target)),
        Some("sctx") => Ok(FileKind::Context(Language::Source)),
        Some("tctx") => Ok(FileKind::Context(Language::Target)),
        _ => Err(CliError::Extension(path.to_path_buf())),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn syntax(path: &Path) -> impl FnOnce(SyntaxError) -> CliError {
    let path = path.to_path_buf();
    move |source| CliError::Syntax { path, source }
}

pub fn load_program(path: &Path) -> Result<Program, CliError> {
    match kind_of(path)? {
        FileKind::Program(lang) => parse_program(&read(path)?, lang).map_err(syntax(path)),
        FileKind::Context(_) => Err(CliError::Expected {
            path: path.to_path_buf(),
            what: "a program (.src or .trg)",
        }),
    }
}

pub fn load_context(path: &Path) -> Result<Context, CliError> {
    match kind_of(path)? {
        FileKind::Context(lang) => parse_context(&read(path)?, lang).map_err(syntax(path)),
        FileKind::Program(_) => Err(CliError::Expected {
            path: path.to_path_buf(),
            what: "a context (.sctx or .tctx)",
        }),
    }
}

/// A history expression given inline, or the path of a file holding one.
pub fn load_history(arg: &str) -> Result<HistExpr, CliError> {
    let path = PathBuf::from(arg);
    let text = if path.is_file() { read(&path)? } else { arg.to_string() };
    text.trim().parse().map_err(|source| CliError::History {
        input: arg.to_string(),
        source,
    })
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
