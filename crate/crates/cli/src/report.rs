//! JSON documents printed in `--json` mode. One document per invocation.

use serde::Serialize;

use stv_core::history::{word_to_string, ActionName, Word};
use stv_core::semantics::{Halt, Outcome};
use stv_core::validator::{FuzzReport, RejectReason, Verdict, ViolationKind, APPROXIMATION_CAVEAT};

fn names(word: &[ActionName]) -> Vec<String> {
    word.iter().map(|a| a.as_str().to_string()).collect()
}

#[derive(Debug, Serialize)]
pub struct ErrorDoc {
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct CompileDoc {
    pub target: String,
    pub passes: Vec<String>,
    pub output: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct InferDoc {
    #[serde(rename = "type")]
    pub ty: String,
    pub effect: String,
}

#[derive(Debug, Serialize)]
pub struct ActionDoc {
    pub action: String,
    pub payload: Option<i64>,
}

#[derive(Debug, Serialize)]
pub struct TraceDoc {
    pub trace: Vec<ActionDoc>,
    pub terminated: bool,
    pub value: Option<String>,
}

impl TraceDoc {
    pub fn new(outcome: &Outcome<'_>) -> Self {
        let value = match &outcome.halt {
            Halt::Value(v) => Some(v.to_string()),
            Halt::OutOfFuel => None,
        };
        TraceDoc {
            trace: outcome
                .trace
                .actions()
                .iter()
                .map(|a| ActionDoc {
                    action: a.name.as_str().to_string(),
                    payload: a.payload,
                })
                .collect(),
            terminated: outcome.terminated(),
            value,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EquivDoc {
    pub equivalent: bool,
    pub witness: Option<Vec<String>>,
}

impl EquivDoc {
    pub fn new(witness: Option<&Word>) -> Self {
        EquivDoc {
            equivalent: witness.is_none(),
            witness: witness.map(|w| names(w)),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictName {
    Accept,
    Reject,
}

#[derive(Debug, Serialize)]
pub struct VerdictDoc {
    pub verdict: VerdictName,
    pub witness: Option<Vec<String>>,
    pub reason: Option<String>,
    pub h_target: String,
    pub h_source: Option<String>,
    pub source_context: Option<String>,
    pub note: Option<String>,
}

impl VerdictDoc {
    pub fn new(verdict: &Verdict) -> Self {
        match verdict {
            Verdict::Accept {
                source_context,
                h_target,
                h_source,
            } => VerdictDoc {
                verdict: VerdictName::Accept,
                witness: None,
                reason: None,
                h_target: h_target.to_string(),
                h_source: Some(h_source.to_string()),
                source_context: Some(source_context.to_string()),
                note: None,
            },
            Verdict::Reject {
                witness,
                reason,
                h_target,
            } => VerdictDoc {
                verdict: VerdictName::Reject,
                witness: Some(names(witness)),
                reason: Some(reason_tag(reason).to_string()),
                h_target: h_target.to_string(),
                h_source: None,
                source_context: None,
                note: Some(APPROXIMATION_CAVEAT.to_string()),
            },
        }
    }
}

pub fn reason_tag(reason: &RejectReason) -> &'static str {
    match reason {
        RejectReason::AlphabetEscape(_) => "alphabet_escape",
        RejectReason::InclusionFailure(_) => "inclusion_failure",
        RejectReason::BackTranslationFailure(_) => "back_translation_failure",
    }
}

#[derive(Debug, Serialize)]
pub struct ViolationDoc {
    pub seed: u64,
    pub term: String,
    pub problem: String,
}

#[derive(Debug, Serialize)]
pub struct FuzzDoc {
    pub runs: usize,
    pub terminated: usize,
    pub out_of_fuel: usize,
    pub violations: Vec<ViolationDoc>,
}

pub fn describe_violation(kind: &ViolationKind) -> String {
    match kind {
        ViolationKind::TraceEscapes { trace, history } => {
            format!("trace {} escapes {history}", word_to_string(trace))
        }
        ViolationKind::Stuck(e) => e.to_string(),
        ViolationKind::IllTyped(e) => format!("generated term rejected by inference: {e}"),
    }
}

impl FuzzDoc {
    pub fn new(report: &FuzzReport) -> Self {
        FuzzDoc {
            runs: report.runs,
            terminated: report.terminated,
            out_of_fuel: report.out_of_fuel,
            violations: report
                .violations
                .iter()
                .map(|v| ViolationDoc {
                    seed: v.seed,
                    term: v.term.clone(),
                    problem: describe_violation(&v.kind),
                })
                .collect(),
        }
    }
}
